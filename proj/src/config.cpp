#include "skan/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace skan {

namespace {

std::string kind_of(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_unsigned()) return "unsigned integer";
  if (v.is_number_integer()) return "integer";
  if (v.is_number_float()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

[[noreturn]] void type_error(const std::string& path, const Json& v, const char* expected) {
  throw ConfigError(path, "config key '" + path + "': expected " + expected + ", got " + kind_of(v));
}

void read(const Json& v, const std::string& path, std::uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
  } else if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (x < 0) throw ConfigError(path, "config key '" + path + "': must be >= 0");
    out = static_cast<std::uint64_t>(x);
  } else {
    type_error(path, v, "unsigned integer");
  }
}

template <class T>
  requires(std::is_unsigned_v<T> && !std::is_same_v<T, std::uint64_t> && !std::is_same_v<T, bool>)
void read(const Json& v, const std::string& path, T& out) {
  std::uint64_t x = 0;
  read(v, path, x);
  if (x > std::numeric_limits<T>::max()) throw ConfigError(path, "config key '" + path + "': value out of range");
  out = static_cast<T>(x);
}

void read(const Json& v, const std::string& path, double& out) {
  if (!v.is_number()) type_error(path, v, "number");
  out = v.get<double>();
}

void read(const Json& v, const std::string& path, bool& out) {
  if (!v.is_boolean()) type_error(path, v, "boolean");
  out = v.get<bool>();
}

void read(const Json& v, const std::string& path, std::string& out) {
  if (!v.is_string()) type_error(path, v, "string");
  out = v.get<std::string>();
}

template <class Parse, class T>
void read_enum(const Json& v, const std::string& path, T& out, Parse parse) {
  std::string s;
  read(v, path, s);
  try {
    out = parse(s);
  } catch (const Error& e) {
    throw ConfigError(path, "config key '" + path + "': " + e.what());
  }
}

void read(const Json& v, const std::string& path, LsbPolicy& out) { read_enum(v, path, out, parse_lsb_policy); }
void read(const Json& v, const std::string& path, NormSignal& out) { read_enum(v, path, out, parse_norm_signal); }
void read(const Json& v, const std::string& path, SlopeInit& out) { read_enum(v, path, out, parse_slope_init); }

template <class T>
void read(const Json& v, const std::string& path, std::vector<T>& out) {
  if (!v.is_array()) type_error(path, v, "array");
  std::vector<T> tmp(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) read(v[i], path + "[" + std::to_string(i) + "]", tmp[i]);
  out = std::move(tmp);
}

// Tracks which keys of one object were consumed.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object())
      throw ConfigError(where_, "config " + (where_.empty() ? std::string("root") : "key '" + where_ + "'") +
                                    ": expected object, got " + kind_of(j_));
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  bool get(const std::string& key, T& out) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    read(j_.at(key), path(key), out);
    return true;
  }

  const Json* sub(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(path(key), "unknown config key '" + path(key) + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto ext = path.extension().string();
  if (ext == ".json") {
    try {
      return Json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("config file " + path.string() + ": " + e.what());
    }
  }
  if (ext == ".toml") {
    try {
      const auto table = toml::parse(ss.str(), path.string());
      std::ostringstream js;
      js << toml::json_formatter{table};
      return Json::parse(js.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "config file " << path.string() << ": " << e.description() << " (line " << e.source().begin.line
          << ")";
      throw Error(msg.str());
    }
  }
  throw Error("config file " + path.string() + ": unsupported extension (expected .json or .toml)");
}

void merge_config(Json& base, const Json& overlay) {
  if (base.is_object() && overlay.is_object()) {
    for (const auto& [key, value] : overlay.items()) {
      if (base.contains(key))
        merge_config(base[key], value);
      else
        base[key] = value;
    }
  } else {
    base = overlay;
  }
}

void apply_params(NeuronParams& p, const Json& j, const std::string& where) {
  Reader r(j, where);
  r.get("n_synapses", p.n_synapses);
  r.get("bit_width", p.bit_width);
  r.get("slope_frac_bits", p.slope_frac_bits);
  r.get("w_rise", p.w_rise);
  r.get("w_fall", p.w_fall);
  r.get("slope_step", p.slope_step);
  r.get("slope_min", p.slope_min);
  r.get("slope_max", p.slope_max);
  r.get("theta_rise", p.theta_rise);
  r.get("theta_fall", p.theta_fall);
  r.get("theta_min", p.theta_min);
  r.get("theta_init", p.theta_init);
  r.get("w_init", p.w_init);
  r.get("dr_init_policy", p.dr_init_policy);
  r.get("dr_init", p.dr_init);
  r.get("dr_seed", p.dr_seed);
  r.get("lsb_policy", p.lsb_policy);
  r.get("norm_signal", p.norm_signal);
  r.get("adaptive_weights", p.adaptive_weights);
  r.finish();
}

namespace {

void apply_params_key(Reader& r, NeuronParams& p) {
  if (const Json* j = r.sub("params")) apply_params(p, *j, r.path("params"));
}

std::uint64_t duration_slope(const NeuronParams& p, std::uint32_t steps) {
  return (p.w_init << p.slope_frac_bits) / steps;
}

}  // namespace

SimulationConfig simulation_config_from_json(const Json& j) {
  Reader r(j, "");
  std::string preset = "fig3";
  std::uint64_t seed = 0;
  r.get("preset", preset);
  r.get("seed", seed);
  if (preset != "fig3") throw ConfigError("preset", "config key 'preset': unknown simulation preset '" + preset + "' (expected fig3)");
  auto cfg = fig3_preset(seed);
  r.get("presentations", cfg.program.presentations);
  r.get("response_tail", cfg.program.response_tail);
  r.get("gap_min", cfg.program.gap_min);
  r.get("gap_max", cfg.program.gap_max);
  r.get("noise_in_gaps", cfg.program.noise_in_gaps);
  r.get("inject_shift_every", cfg.inject_shift_every);
  double lambda = 0.0;
  if (r.get("noise_lambda", lambda)) cfg.noise = NoiseSpec::uniform(cfg.noise.lambda_per_channel.size(), lambda);
  apply_params_key(r, cfg.params);
  r.finish();
  return cfg;
}

NormErrorConfig norm_config_from_json(const Json& j) {
  Reader r(j, "");
  NormErrorConfig cfg;
  r.get("seed", cfg.seed);
  r.get("n_synapses", cfg.n_synapses);
  r.get("bit_widths", cfg.bit_widths);
  r.get("policies", cfg.policies);
  r.get("signal", cfg.signal);
  r.get("updates", cfg.updates);
  r.get("seeds", cfg.seeds);
  r.get("rise_fraction", cfg.rise_fraction);
  r.get("fall_fraction", cfg.fall_fraction);
  r.get("flag_probability", cfg.flag_probability);
  r.finish();
  return cfg;
}

SweepConfig sweep_config_from_json(const Json& j) {
  Reader r(j, "");
  std::string preset = "fig7";
  r.get("preset", preset);
  SweepConfig cfg;
  if (preset == "fig7") {
    NormSignal signal = NormSignal::MaxW;
    std::vector<double> lambda3{0.0, 0.25, 0.5, 1.0};
    double base = 0.0;
    r.get("signal", signal);
    r.get("lambda3", lambda3);
    r.get("base_lambda", base);
    cfg = fig7_preset(signal, lambda3, base);
  } else if (preset == "fig8") {
    auto envs = fig8_environment_names();
    r.get("environments", envs);
    try {
      cfg = fig8_preset(envs);
    } catch (const Error& e) {
      throw ConfigError("environments", std::string("config key 'environments': ") + e.what());
    }
  } else {
    throw ConfigError("preset", "config key 'preset': unknown sweep preset '" + preset + "' (expected fig7 or fig8)");
  }
  r.get("lambda_grid", cfg.lambda_grid);
  r.get("seed", cfg.seed);
  r.get("seeds", cfg.seeds);
  r.get("presentations", cfg.presentations);
  r.get("burn_in", cfg.burn_in);
  r.get("window_len", cfg.window_len);
  r.get("response_tail", cfg.response_tail);
  r.get("gap_min", cfg.gap_min);
  r.get("gap_max", cfg.gap_max);
  apply_params_key(r, cfg.params);
  r.finish();
  return cfg;
}

RecognitionConfig recognition_config_from_json(const Json& j) {
  Reader r(j, "");
  std::string preset = fig9_preset_names().front();
  r.get("preset", preset);
  RecognitionConfig cfg;
  try {
    cfg = fig9_preset(preset);
  } catch (const Error& e) {
    throw ConfigError("preset", std::string("config key 'preset': ") + e.what());
  }
  if (r.get("channels", cfg.channels)) {
    if (cfg.channels == 0) throw ConfigError("channels", "config key 'channels': must be >= 1");
    cfg.params.theta_init = cfg.params.theta_init / cfg.params.n_synapses * cfg.channels;
    cfg.params.n_synapses = cfg.channels;
  }
  if (r.get("pattern_span", cfg.pattern_span) && cfg.pattern_span > 0)
    cfg.params.dr_init = duration_slope(cfg.params, cfg.pattern_span);
  r.get("seed", cfg.seed);
  r.get("noisy_counts", cfg.noisy_counts);
  r.get("snr_grid", cfg.snr_grid);
  r.get("seeds", cfg.seeds);
  r.get("presentations", cfg.presentations);
  r.get("learning", cfg.learning);
  r.get("window_len", cfg.window_len);
  r.get("response_tail", cfg.response_tail);
  r.get("gap_min", cfg.gap_min);
  r.get("gap_max", cfg.gap_max);
  apply_params_key(r, cfg.params);
  r.finish();
  return cfg;
}

MnistConfig mnist_config_from_json(const Json& j) {
  Reader r(j, "");
  auto cfg = mnist_preset();
  if (r.get("latency_span", cfg.latency_span) && cfg.latency_span > 0)
    cfg.params.dr_init = duration_slope(cfg.params, cfg.latency_span);
  r.get("seed", cfg.seed);
  r.get("images", cfg.images);
  r.get("corrupted", cfg.corrupted);
  r.get("lambda_lo", cfg.lambda_lo);
  r.get("lambda_hi", cfg.lambda_hi);
  r.get("window_len", cfg.window_len);
  r.get("gap_len", cfg.gap_len);
  apply_params_key(r, cfg.params);
  r.finish();
  return cfg;
}

Json to_json(const SimulationConfig& c) {
  Json pats = Json::array();
  for (const auto& p : c.patterns) pats.push_back(to_json(p));
  return {{"params", to_json(c.params)},       {"patterns", pats},
          {"program", to_json(c.program)},     {"noise", to_json(c.noise)},
          {"noise_seed", c.noise_seed},        {"inject_shift_every", c.inject_shift_every}};
}

Json to_json(const NormErrorConfig& c) {
  std::vector<std::string> pol;
  for (auto p : c.policies) pol.emplace_back(to_string(p));
  return {{"n_synapses", c.n_synapses}, {"bit_widths", c.bit_widths},       {"policies", pol},
          {"signal", to_string(c.signal)}, {"updates", c.updates},          {"seeds", c.seeds},
          {"rise_fraction", c.rise_fraction}, {"fall_fraction", c.fall_fraction},
          {"flag_probability", c.flag_probability}, {"seed", c.seed}};
}

Json to_json(const SweepConfig& c) {
  return {{"params", to_json(c.params)},   {"lambda_grid", c.lambda_grid}, {"seeds", c.seeds},
          {"presentations", c.presentations}, {"burn_in", c.burn_in},     {"window_len", c.window_len},
          {"response_tail", c.response_tail}, {"gap_min", c.gap_min},     {"gap_max", c.gap_max},
          {"seed", c.seed}};
}

Json to_json(const RecognitionConfig& c) {
  return {{"params", to_json(c.params)},     {"channels", c.channels},       {"noisy_counts", c.noisy_counts},
          {"snr_grid", c.snr_grid},           {"seeds", c.seeds},             {"presentations", c.presentations},
          {"learning", c.learning},           {"pattern_span", c.pattern_span}, {"window_len", c.window_len},
          {"response_tail", c.response_tail}, {"gap_min", c.gap_min},         {"gap_max", c.gap_max},
          {"seed", c.seed}};
}

Json to_json(const MnistConfig& c) {
  return {{"params", to_json(c.params)}, {"images", c.images},           {"corrupted", c.corrupted},
          {"lambda_lo", c.lambda_lo},     {"lambda_hi", c.lambda_hi},     {"latency_span", c.latency_span},
          {"window_len", c.window_len},   {"gap_len", c.gap_len},         {"seed", c.seed}};
}

}  // namespace skan
