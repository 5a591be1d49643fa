#include <CLI11.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skan/config.hpp"
#include "skan/experiments.hpp"
#include "skan/mnist.hpp"
#include "skan/report.hpp"
#include "skan/rng.hpp"
#include "skan/stats.hpp"

#ifndef SKAN_VERSION
#define SKAN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace skan;

namespace {

class DatasetMissing : public Error {
 public:
  using Error::Error;
};

class FetchFailed : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool serial = false;
  bool plot = false;
  std::string out = "runs";
  std::string run_name;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON or TOML config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--jobs", c.jobs, "Worker threads for the fan-out (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--serial", c.serial, "Run the serial reference path");
  cmd->add_flag("--plot", c.plot, "Also write SVG plots");
  cmd->add_option("--out", c.out, "Parent directory for run directories");
  cmd->add_option("--run-name", c.run_name, "Run directory name (default: command and config hash)");
}

// Defaults < file < flags.
Json resolve(const Common& c, const Json& flags) {
  Json j = Json::object();
  if (!c.config.empty()) merge_config(j, load_config_file(c.config));
  if (c.seed) j["seed"] = *c.seed;
  merge_config(j, flags);
  return j;
}

Parallelism parallelism(const Common& c) { return c.serial ? Parallelism::serial_only() : Parallelism{false, c.jobs}; }

struct Run {
  RunManifest manifest;
  std::unique_ptr<OutputDir> dir;
};

Run open_run(const Common& c, const std::string& command, const Json& resolved, std::uint64_t seed) {
  Run run;
  run.manifest.tool_version = SKAN_VERSION;
  run.manifest.command = command;
  run.manifest.config = resolved;
  run.manifest.seeds = {seed};
  run.manifest.start_time = timestamp_now();
  if (!c.config.empty()) {
    const auto bytes = read_file(c.config);
    run.manifest.input_checksums["config_file"] =
        git_blob_hash({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  }
  const std::string name =
      c.run_name.empty() ? command + "-" + git_blob_hash(resolved.dump()).substr(0, 12) : c.run_name;
  run.dir = std::make_unique<OutputDir>(fs::path(c.out) / name);
  return run;
}

void close_run(Run& run) {
  run.manifest.end_time = timestamp_now();
  run.manifest.outputs = run.dir->files();
  run.manifest.outputs.push_back("manifest.json");
  run.dir->write_json("manifest.json", run.manifest.to_json());
  std::cout << run.dir->path().string() << "\n";
}

std::vector<double> to_doubles(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

std::vector<double> iota_x(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
  return x;
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
  Common common;
  std::string preset;
  std::optional<std::size_t> presentations;
  std::optional<std::size_t> inject_every;
  std::optional<double> noise;
};

void cmd_simulate(const SimulateOpts& o) {
  Json flags = Json::object();
  if (!o.preset.empty()) flags["preset"] = o.preset;
  if (o.presentations) flags["presentations"] = *o.presentations;
  if (o.inject_every) flags["inject_shift_every"] = *o.inject_every;
  if (o.noise) flags["noise_lambda"] = *o.noise;
  const Json input = resolve(o.common, flags);
  const auto cfg = simulation_config_from_json(input);
  const Json resolved = to_json(cfg);
  auto run = open_run(o.common, "simulate", resolved, cfg.program.seed);
  run.manifest.seeds.push_back(cfg.noise_seed);

  const auto trace = run_simulation(cfg);
  run.dir->write_json("trace.json", to_json(trace));
  run.dir->write("presentations.csv", presentations_csv(trace));
  run.dir->write_json("state.json", to_json(trace.final_state));

  const auto program = make_program(cfg.program);
  const auto raster = compose_stream(program, cfg.patterns, cfg.noise, cfg.noise_seed);
  run.dir->write("raster.csv", raster_to_csv(raster));
  Json pats = Json::array();
  for (const auto& p : cfg.patterns) pats.push_back(to_json(p));
  run.dir->write_json("raster.json", {{"patterns", pats},
                                      {"program", to_json(cfg.program)},
                                      {"noise", to_json(cfg.noise)},
                                      {"noise_seed", cfg.noise_seed},
                                      {"steps", raster.steps()},
                                      {"channels", raster.channels()}});

  if (o.common.plot) {
    Series width{"pulse width", {}, {}};
    std::vector<Series> peaks(cfg.params.n_synapses);
    for (std::size_t i = 0; i < peaks.size(); ++i) peaks[i].label = "synapse " + std::to_string(i);
    for (const auto& p : trace.presentations) {
      width.x.push_back(static_cast<double>(p.index));
      width.y.push_back(static_cast<double>(p.pulse_width));
      for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (p.kernel_peaks[i] < 0) continue;
        peaks[i].x.push_back(static_cast<double>(p.index));
        peaks[i].y.push_back(static_cast<double>(p.kernel_peaks[i]));
      }
    }
    Series onset{"output onset", {}, {}};
    for (const auto& p : trace.presentations)
      if (p.first_onset >= 0) {
        onset.x.push_back(static_cast<double>(p.index));
        onset.y.push_back(static_cast<double>(p.first_onset));
      }
    peaks.push_back(onset);
    run.dir->write("pulse_width.svg", line_plot_svg({width}, {"Output pulse width", "presentation", "steps"}));
    run.dir->write("kernel_peaks.svg",
                   line_plot_svg(peaks, {"Kernel peak times", "presentation", "step in window"}));
  }
  close_run(run);
}

// ---------------------------------------------------------------------------

struct NormOpts {
  Common common;
  std::vector<unsigned> bits;
  std::vector<std::string> policies;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> updates;
  std::string signal;
};

void cmd_normcheck(const NormOpts& o) {
  Json flags = Json::object();
  if (!o.bits.empty()) flags["bit_widths"] = o.bits;
  if (!o.policies.empty()) flags["policies"] = o.policies;
  if (o.seeds) flags["seeds"] = *o.seeds;
  if (o.updates) flags["updates"] = *o.updates;
  if (!o.signal.empty()) flags["signal"] = o.signal;
  const auto cfg = norm_config_from_json(resolve(o.common, flags));
  auto run = open_run(o.common, "normcheck", to_json(cfg), cfg.seed);

  const auto rows = run_norm_error(cfg, parallelism(o.common));
  run.dir->write("norm_error.csv", norm_error_csv(rows));

  std::string summary = "bit_width,lsb_policy,median_rms_error,median_spearman\n";
  std::vector<Series> series;
  for (auto policy : cfg.policies) {
    Series s{to_string(policy), {}, {}};
    for (auto b : cfg.bit_widths) {
      std::vector<double> err, rho;
      for (const auto& r : rows)
        if (r.bit_width == b && r.policy == policy) {
          err.push_back(r.rms_error);
          rho.push_back(r.spearman);
        }
      const double me = median(err), mr = median(rho);
      summary += std::to_string(b) + "," + to_string(policy) + "," + format_double(me) + "," + format_double(mr) + "\n";
      s.x.push_back(b);
      s.y.push_back(me);
    }
    series.push_back(s);
  }
  run.dir->write("norm_summary.csv", summary);
  if (o.common.plot)
    run.dir->write("norm_error.svg",
                   line_plot_svg(series, {"Median rms relative error", "bit width b", "rms error", true}));
  close_run(run);
}

// ---------------------------------------------------------------------------

struct SweepOpts {
  Common common;
  std::string preset;
  std::string signal;
  std::vector<std::string> environments;
  std::vector<double> lambda3;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> presentations;
  std::optional<std::size_t> burn_in;
};

void cmd_sweep(const SweepOpts& o) {
  Json flags = Json::object();
  if (!o.preset.empty()) flags["preset"] = o.preset;
  if (!o.signal.empty()) flags["signal"] = o.signal;
  if (!o.environments.empty()) flags["environments"] = o.environments;
  if (!o.lambda3.empty()) flags["lambda3"] = o.lambda3;
  if (o.seeds) flags["seeds"] = *o.seeds;
  if (o.presentations) flags["presentations"] = *o.presentations;
  if (o.burn_in) flags["burn_in"] = *o.burn_in;
  const Json input = resolve(o.common, flags);
  const auto cfg = sweep_config_from_json(input);
  auto run = open_run(o.common, "sweep-noise", to_json(cfg), cfg.seed);

  const auto result = run_noise_sweep(cfg, parallelism(o.common));
  run.dir->write("sweep.csv", sweep_csv(result));
  run.dir->write("traces.csv", sweep_trace_csv(result));

  if (o.common.plot) {
    const std::size_t n = cfg.params.n_synapses;
    std::vector<Series> by_synapse;
    for (std::size_t p = 0; p < result.points.size(); ++p) {
      Series s{"point " + std::to_string(p), iota_x(n), result.points[p].mean_weight};
      by_synapse.push_back(s);
    }
    run.dir->write("steady_state.svg",
                   line_plot_svg(by_synapse, {"Steady-state weights", "synapse", "mean weight"}));
    for (std::size_t p = 0; p < result.traces.size(); ++p) {
      std::vector<Series> lines(n);
      for (std::size_t i = 0; i < n; ++i) {
        lines[i].label = "w" + std::to_string(i);
        lines[i].x = iota_x(result.traces[p].size());
        for (const auto& row : result.traces[p]) lines[i].y.push_back(row[i]);
      }
      run.dir->write("trace_point" + std::to_string(p) + ".svg",
                     line_plot_svg(lines, {"Weights, point " + std::to_string(p), "presentation", "weight"}));
    }
  }
  close_run(run);
}

// ---------------------------------------------------------------------------

struct RecognitionOpts {
  Common common;
  std::string preset;
  std::vector<std::size_t> noisy;
  std::vector<double> snr;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> presentations;
};

void cmd_recognition(const RecognitionOpts& o) {
  Json flags = Json::object();
  if (!o.preset.empty()) flags["preset"] = o.preset;
  if (!o.noisy.empty()) flags["noisy_counts"] = o.noisy;
  if (!o.snr.empty()) flags["snr_grid"] = o.snr;
  if (o.seeds) flags["seeds"] = *o.seeds;
  if (o.presentations) flags["presentations"] = *o.presentations;
  const auto cfg = recognition_config_from_json(resolve(o.common, flags));
  auto run = open_run(o.common, "recognition", to_json(cfg), cfg.seed);

  const auto reports = run_recognition(cfg, parallelism(o.common));
  const auto summary = summarize(reports);
  run.dir->write("recognition.csv", recognition_csv(reports));
  run.dir->write("recognition_summary.csv", recognition_summary_csv(summary));

  if (o.common.plot) {
    std::map<std::pair<std::size_t, bool>, Series> lines;
    for (const auto& s : summary) {
      auto& line = lines[{s.noisy, s.adaptive}];
      line.label = std::to_string(s.noisy) + " noisy, " + (s.adaptive ? "adaptive" : "static");
      line.x.push_back(s.snr);
      line.y.push_back(s.mean_error);
    }
    std::vector<Series> series;
    for (auto& [key, line] : lines) series.push_back(line);
    run.dir->write("recognition.svg", line_plot_svg(series, {"Recognition error", "noise (SNR 1:x)", "error"}));
  }
  close_run(run);
}

// ---------------------------------------------------------------------------

struct MnistOpts {
  Common common;
  std::optional<std::size_t> images;
  std::string data_dir;
  std::string split;
};

fs::path default_data_dir() {
  if (const char* env = std::getenv("SKAN_MNIST_DIR"); env && *env) return env;
  return "data/mnist";
}

bool split_present(const fs::path& dir, const std::string& split) {
  for (const char* kind : {"-images-idx3-ubyte", "-labels-idx1-ubyte"}) {
    const auto base = dir / (split + kind);
    if (!fs::exists(base) && !fs::exists(fs::path(base.string() + ".gz"))) return false;
  }
  return true;
}

void cmd_mnist(const MnistOpts& o) {
  Json flags = Json::object();
  if (o.images) flags["images"] = *o.images;
  if (!o.data_dir.empty()) flags["data_dir"] = o.data_dir;
  if (!o.split.empty()) flags["split"] = o.split;
  Json input = resolve(o.common, flags);
  fs::path dir = default_data_dir();
  std::string split = "train";
  if (input.contains("data_dir")) {
    if (!input["data_dir"].is_string()) throw ConfigError("data_dir", "config key 'data_dir': expected string");
    dir = input["data_dir"].get<std::string>();
    input.erase("data_dir");
  }
  if (input.contains("split")) {
    if (!input["split"].is_string()) throw ConfigError("split", "config key 'split': expected string");
    split = input["split"].get<std::string>();
    input.erase("split");
    if (split != "train" && split != "t10k")
      throw ConfigError("split", "config key 'split': expected train or t10k, got '" + split + "'");
  }
  const auto cfg = mnist_config_from_json(input);
  if (!split_present(dir, split))
    throw DatasetMissing("MNIST " + split + " files not found in " + dir.string() +
                         "; run `skan fetch-data --dir " + dir.string() + "` or set SKAN_MNIST_DIR");

  const auto all = load_mnist(dir, split);
  const auto zeros = filter_label(all, 0);
  Json resolved = to_json(cfg);
  resolved["split"] = split;
  auto run = open_run(o.common, "mnist", resolved, cfg.seed);
  run.manifest.input_checksums[split + "-images-sha256"] = all.checksum;
  run.manifest.input_checksums[split + "-labels-sha256"] = sha256_hex(all.labels);

  const auto report = run_mnist(zeros, cfg);
  const auto& f = report.field;
  const auto slope = to_doubles(f.slope);
  const auto weight = to_doubles(f.weight);
  const std::vector<double> disabled(f.disabled.begin(), f.disabled.end());
  const std::vector<double> disabled_at(f.disabled_at.begin(), f.disabled_at.end());
  run.dir->write("slope.csv", grid_csv(slope, f.rows, f.cols));
  run.dir->write("weight.csv", grid_csv(weight, f.rows, f.cols));
  run.dir->write("disabled.csv", grid_csv(disabled, f.rows, f.cols));
  run.dir->write("disabled_at.csv", grid_csv(disabled_at, f.rows, f.cols));
  run.dir->write("mean_intensity.csv", grid_csv(report.mean_intensity, f.rows, f.cols));
  run.dir->write("slope.pgm", pgm(slope, f.rows, f.cols));
  run.dir->write("weight.pgm", pgm(weight, f.rows, f.cols));
  run.dir->write("disabled.pgm", pgm(disabled, f.rows, f.cols));
  run.dir->write_json("mnist.json", to_json(report));
  if (o.common.plot) {
    run.dir->write("slope.svg", heatmap_svg(slope, f.rows, f.cols, "Final slope dr"));
    run.dir->write("weight.svg", heatmap_svg(weight, f.rows, f.cols, "Final weight w"));
    run.dir->write("disabled_at.svg", heatmap_svg(disabled_at, f.rows, f.cols, "Disable image index (-1 = never)"));
    run.dir->write("mean_intensity.svg", heatmap_svg(report.mean_intensity, f.rows, f.cols, "Mean intensity"));
  }
  close_run(run);
}

// ---------------------------------------------------------------------------

struct FetchOpts {
  std::string dir;
  std::string base_url = "https://ossci-datasets.s3.amazonaws.com/mnist/";
  bool force = false;
};

// sha256 of the decompressed files.
const std::map<std::string, std::string> kMnistSha256{
    {"train-images-idx3-ubyte", "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"},
    {"train-labels-idx1-ubyte", "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"},
    {"t10k-images-idx3-ubyte", "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"},
    {"t10k-labels-idx1-ubyte", "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"},
};

std::vector<std::uint8_t> http_get(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchFailed("bad URL " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(host);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) throw FetchFailed("GET " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw FetchFailed("GET " + url + " returned HTTP " + std::to_string(res->status));
  return {res->body.begin(), res->body.end()};
}

void cmd_fetch(const FetchOpts& o) {
  const fs::path dir = o.dir.empty() ? default_data_dir() : fs::path(o.dir);
  fs::create_directories(dir);
  std::string base = o.base_url;
  if (!base.empty() && base.back() != '/') base += '/';
  Json done = Json::object();
  for (const auto& [name, sha] : kMnistSha256) {
    const auto target = dir / name;
    if (!o.force && fs::exists(target) && sha256_hex(read_file(target)) == sha) {
      done[name] = {{"sha256", sha}, {"status", "present"}};
      continue;
    }
    const auto raw = maybe_gunzip(http_get(base + name + ".gz"));
    const auto got = sha256_hex(raw);
    if (got != sha) throw FetchFailed("checksum mismatch for " + name + ": expected " + sha + ", got " + got);
    const auto tmp = fs::path(target.string() + ".part");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
      if (!out) throw FetchFailed("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
    done[name] = {{"sha256", sha}, {"status", "downloaded"}};
  }
  std::cout << Json{{"dir", dir.string()}, {"files", done}}.dump(2) << "\n";
}

void print_error(const std::string& kind, const std::string& message, const Json& extra = Json::object()) {
  Json e = {{"error", kind}, {"message", message}};
  merge_config(e, extra);
  std::cerr << e.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SKAN neuron simulator and experiment harness"};
  app.set_version_flag("--version", std::string(SKAN_VERSION));
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Single-neuron run with per-presentation trace");
  add_common(c_sim, sim.common);
  c_sim->add_option("--preset", sim.preset, "Simulation preset (fig3)");
  c_sim->add_option("--presentations", sim.presentations);
  c_sim->add_option("--inject-shift-every", sim.inject_every, "Force a right+left shift pair every N presentations");
  c_sim->add_option("--noise", sim.noise, "Uniform noise λ per channel");

  NormOpts norm;
  auto* c_norm = app.add_subcommand("normcheck", "Shift normalization against the division oracle");
  add_common(c_norm, norm.common);
  c_norm->add_option("--bits", norm.bits, "Bit widths, comma separated")->delimiter(',');
  c_norm->add_option("--policies", norm.policies, "LSB policies, comma separated")->delimiter(',');
  c_norm->add_option("--seeds", norm.seeds);
  c_norm->add_option("--updates", norm.updates);
  c_norm->add_option("--signal", norm.signal, "MaxW or SumW");

  SweepOpts sweep;
  auto* c_sweep = app.add_subcommand("sweep-noise", "Steady-state weights across noise environments");
  add_common(c_sweep, sweep.common);
  c_sweep->add_option("--preset", sweep.preset, "fig7 or fig8");
  c_sweep->add_option("--signal", sweep.signal, "MaxW or SumW (fig7)");
  c_sweep->add_option("--environments", sweep.environments, "fig8 environments, comma separated")->delimiter(',');
  c_sweep->add_option("--lambda3", sweep.lambda3, "fig7 λ3 grid, comma separated")->delimiter(',');
  c_sweep->add_option("--seeds", sweep.seeds);
  c_sweep->add_option("--presentations", sweep.presentations);
  c_sweep->add_option("--burn-in", sweep.burn_in);

  RecognitionOpts rec;
  auto* c_rec = app.add_subcommand("recognition", "Two-pattern recognition, static vs adaptive weights");
  add_common(c_rec, rec.common);
  c_rec->add_option("--preset", rec.preset, "bump or aggressive");
  c_rec->add_option("--noisy", rec.noisy, "Noisy channel counts, comma separated")->delimiter(',');
  c_rec->add_option("--snr", rec.snr, "SNR grid (λ per noisy channel), comma separated")->delimiter(',');
  c_rec->add_option("--seeds", rec.seeds);
  c_rec->add_option("--presentations", rec.presentations);

  MnistOpts mn;
  auto* c_mn = app.add_subcommand("mnist", "Receptive field on corrupted MNIST zeros");
  add_common(c_mn, mn.common);
  c_mn->add_option("--images", mn.images);
  c_mn->add_option("--data-dir", mn.data_dir, "Directory with the IDX files (default $SKAN_MNIST_DIR)");
  c_mn->add_option("--split", mn.split, "train or t10k");

  FetchOpts fetch;
  auto* c_fetch = app.add_subcommand("fetch-data", "Download MNIST and verify pinned checksums");
  c_fetch->add_option("--dir", fetch.dir, "Destination (default $SKAN_MNIST_DIR or data/mnist)");
  c_fetch->add_option("--base-url", fetch.base_url, "Mirror serving <name>.gz files");
  c_fetch->add_flag("--force", fetch.force, "Download even if verified files are present");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*c_sim) cmd_simulate(sim);
    else if (*c_norm) cmd_normcheck(norm);
    else if (*c_sweep) cmd_sweep(sweep);
    else if (*c_rec) cmd_recognition(rec);
    else if (*c_mn) cmd_mnist(mn);
    else if (*c_fetch) cmd_fetch(fetch);
  } catch (const ConfigError& e) {
    print_error("invalid_config", e.what(), {{"key", e.key()}});
    return 2;
  } catch (const DatasetMissing& e) {
    print_error("dataset_missing", e.what());
    return 3;
  } catch (const FetchFailed& e) {
    print_error("fetch_failed", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
