#include "skan/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace skan {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::string u(std::uint64_t v) { return std::to_string(v); }
std::string d(double v) { return format_double(v); }

std::string lambda_label(const std::vector<double>& lambda) {
  std::string s;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (i) s += ';';
    s += d(lambda[i]);
  }
  return s;
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

std::string norm_error_csv(const std::vector<NormErrorRow>& rows) {
  std::string out = "bit_width,lsb_policy,seed,rms_error,spearman_rank_corr,right_shifts,left_shifts\n";
  for (const auto& r : rows)
    out += join({u(r.bit_width), to_string(r.policy), u(r.seed), d(r.rms_error), d(r.spearman),
                 u(r.right_shifts), u(r.left_shifts)});
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "point,lambda_vector,synapse,lambda,mean_weight,sd_weight,fire_rate\n";
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    const auto& pt = result.points[p];
    for (std::size_t i = 0; i < pt.mean_weight.size(); ++i)
      out += join({u(p), lambda_label(pt.lambda), u(i), d(pt.lambda[i]), d(pt.mean_weight[i]), d(pt.sd_weight[i]),
                   d(pt.fire_rate)});
  }
  return out;
}

std::string sweep_trace_csv(const SweepResult& result) {
  std::string out = "point,presentation,synapse,weight\n";
  for (std::size_t p = 0; p < result.traces.size(); ++p)
    for (std::size_t k = 0; k < result.traces[p].size(); ++k)
      for (std::size_t i = 0; i < result.traces[p][k].size(); ++i)
        out += join({u(p), u(k), u(i), d(result.traces[p][k][i])});
  return out;
}

std::string recognition_csv(const std::vector<RecognitionReport>& reports) {
  std::string out =
      "noisy_channels,snr,adaptive,seed,target,target_tie,targets,detected,missed,false_positives,"
      "gap_false_positives,disabled_noisy,disabled_clean,error\n";
  for (const auto& r : reports)
    out += join({u(r.condition.noisy_channels.size()), d(r.condition.snr), r.condition.adaptive ? "1" : "0",
                 u(r.condition.seed), std::to_string(r.target), r.target_tie ? "1" : "0", u(r.targets),
                 u(r.detected), u(r.missed), u(r.false_positives), u(r.gap_false_positives), u(r.disabled_noisy),
                 u(r.disabled_clean), d(r.error)});
  return out;
}

std::string recognition_summary_csv(const std::vector<RecognitionSummary>& rows) {
  std::string out = "noisy_channels,snr,adaptive,mean_error,sd_error\n";
  for (const auto& r : rows)
    out += join({u(r.noisy), d(r.snr), r.adaptive ? "1" : "0", d(r.mean_error), d(r.sd_error)});
  return out;
}

std::string presentations_csv(const SimulationTrace& trace) {
  std::string out = "presentation,pattern,start,pulses,pulse_width,first_onset,theta,synapse,kernel_peak,w,dr\n";
  for (const auto& p : trace.presentations)
    for (std::size_t i = 0; i < p.weights.size(); ++i)
      out += join({u(p.index), std::to_string(p.pattern), u(p.start), u(p.pulses), u(p.pulse_width),
                   std::to_string(p.first_onset), u(p.theta), u(i), std::to_string(p.kernel_peaks[i]),
                   u(p.weights[i]), u(p.slopes[i])});
  return out;
}

std::string grid_csv(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw Error("grid_csv: size does not match rows x cols");
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> cells;
    for (std::size_t c = 0; c < cols; ++c) cells.push_back(d(values[r * cols + c]));
    out += join(cells);
  }
  return out;
}

Json to_json(const NeuronParams& p) {
  return {{"n_synapses", p.n_synapses},
          {"bit_width", p.bit_width},
          {"slope_frac_bits", p.slope_frac_bits},
          {"w_rise", p.w_rise},
          {"w_fall", p.w_fall},
          {"slope_step", p.slope_step},
          {"slope_min", p.slope_min},
          {"slope_max", p.slope_max},
          {"theta_rise", p.theta_rise},
          {"theta_fall", p.theta_fall},
          {"theta_min", p.theta_min},
          {"theta_init", p.theta_init},
          {"w_init", p.w_init},
          {"dr_init_policy", to_string(p.dr_init_policy)},
          {"dr_init", p.dr_init},
          {"dr_seed", p.dr_seed},
          {"lsb_policy", to_string(p.lsb_policy)},
          {"norm_signal", to_string(p.norm_signal)},
          {"adaptive_weights", p.adaptive_weights}};
}

Json to_json(const SynapseState& s) {
  return {{"w", s.w}, {"r", s.r}, {"dr", s.dr}, {"phase", to_string(s.phase)}, {"d_flag", s.d_flag},
          {"enabled", s.enabled}};
}

Json to_json(const NeuronState& s) {
  Json syn = Json::array();
  for (const auto& x : s.synapses) syn.push_back(to_json(x));
  return {{"synapses", syn},   {"theta", s.theta},     {"sum_r", s.sum_r}, {"s", s.s},
          {"prev_s", s.prev_s}, {"prev_sum_r", s.prev_sum_r}, {"t", s.t}};
}

Json to_json(const PatternSpec& p) {
  return {{"n_channels", p.n_channels}, {"offsets", p.offsets}, {"window_len", p.window_len}};
}

Json to_json(const NoiseSpec& n) {
  Json lam = Json::array();
  for (double x : n.lambda_per_channel) lam.push_back(json_number(x));
  return {{"lambda_per_channel", lam}};
}

Json to_json(const ProgramSpec& p) {
  return {{"presentations", p.presentations}, {"n_patterns", p.n_patterns}, {"window_len", p.window_len},
          {"response_tail", p.response_tail}, {"gap_min", p.gap_min},       {"gap_max", p.gap_max},
          {"noise_in_gaps", p.noise_in_gaps}, {"seed", p.seed}};
}

Json to_json(const SimulationTrace& trace) {
  Json pres = Json::array();
  for (const auto& p : trace.presentations)
    pres.push_back({{"index", p.index},
                    {"pattern", p.pattern},
                    {"start", p.start},
                    {"pulses", p.pulses},
                    {"pulse_width", p.pulse_width},
                    {"first_onset", p.first_onset},
                    {"theta", p.theta},
                    {"kernel_peaks", p.kernel_peaks},
                    {"weights", p.weights},
                    {"slopes", p.slopes}});
  return {{"presentations", pres},
          {"onsets", trace.onsets},
          {"right_shifts", trace.right_shifts},
          {"left_shifts", trace.left_shifts},
          {"injected_pairs", trace.injected_pairs},
          {"final_state", to_json(trace.final_state)}};
}

Json to_json(const MnistReport& r) {
  Json lam = Json::array();
  for (double x : r.corruption.lambdas) lam.push_back(x);
  return {{"images", r.images},
          {"output_pulses", r.output_pulses},
          {"corrupted_pixels", r.corruption.pixels},
          {"corrupted_lambdas", lam},
          {"corrupted_disabled", r.corrupted_disabled},
          {"clean_disabled", r.clean_disabled},
          {"last_corrupted_disable", r.last_corrupted_disable},
          {"slope_intensity_pearson", json_number(r.slope_intensity_pearson)},
          {"dataset_checksum", r.dataset_checksum}};
}

std::string pgm(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw Error("pgm: size does not match rows x cols");
  double lo = 0.0, hi = 0.0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (double v : values) {
    const double x = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    out += static_cast<char>(static_cast<unsigned char>(std::lround(x * 255.0)));
  }
  return out;
}

namespace {

constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt_tick(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto ty = [&](double y) { return spec.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_y && s.y[i] <= 0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    const double gx = left + pw * k / 4, gy = top + ph - ph * k / 4;
    os << "<line x1=\"" << gx << "\" y1=\"" << top + ph << "\" x2=\"" << gx << "\" y2=\"" << top + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << gx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt_tick(xv)
       << "</text>\n";
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << gy << "\" x2=\"" << left << "\" y2=\"" << gy
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
       << fmt_tick(spec.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (spec.log_y && s.y[i] <= 0)) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 30 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(std::span<const double> values, std::size_t rows, std::size_t cols,
                        const std::string& title) {
  if (values.size() != rows * cols) throw Error("heatmap_svg: size does not match rows x cols");
  const double cell = std::max(4.0, 336.0 / static_cast<double>(std::max(rows, cols)));
  const double top = 36, left = 10;
  double lo = 0, hi = 0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left * 2 + cell * static_cast<double>(cols)
     << "\" height=\"" << top + 10 + cell * static_cast<double>(rows)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"20\">" << escape(title) << " [" << fmt_tick(lo) << ", " << fmt_tick(hi)
     << "]</text>\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      const int g = static_cast<int>(std::lround(hi > lo ? (v - lo) / (hi - lo) * 255.0 : 0.0));
      os << "<rect x=\"" << left + cell * static_cast<double>(c) << "\" y=\"" << top + cell * static_cast<double>(r)
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << g << ',' << g << ',' << g
         << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

std::string git_blob_hash(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha1: context allocation failed");
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha1 failed");
  static const char* digits = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

Json RunManifest::to_json() const {
  return {{"tool_version", tool_version}, {"command", command},       {"config", config},
          {"config_hash", git_blob_hash(config.dump())},                {"seeds", seeds},
          {"input_checksums", input_checksums}, {"start_time", start_time}, {"end_time", end_time},
          {"outputs", outputs}};
}

std::string timestamp_now() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& name, std::string_view bytes) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void OutputDir::write_json(const std::string& name, const Json& value) { write(name, value.dump(2) + "\n"); }

}  // namespace skan
