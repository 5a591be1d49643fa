// Acceptance run: one PASS/FAIL line per criterion.
//
//   skan_acceptance [--cli PATH] [--mnist-dir DIR] [--only N] [--jobs N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "skan/experiments.hpp"
#include "skan/mnist.hpp"
#include "skan/stats.hpp"

using namespace skan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string fmt(double x, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << x;
  return os.str();
}

Parallelism g_par;

// 1 -------------------------------------------------------------------------
Outcome kernel_oracle() {
  std::mt19937_64 rng(20240601);
  for (int k = 0; k < 1000; ++k) {
    const auto c = oracle::random_kernel_case(rng);
    NeuronParams p;
    p.n_synapses = 1;
    p.w_init = c.w;
    p.dr_init = c.dr;
    p.slope_frac_bits = c.frac_bits;
    p.slope_min = 1;
    p.slope_max = 1ull << 40;
    p.theta_init = 1ull << 40;
    p.adaptive_weights = false;
    auto s = make_state(p);
    StepEvents ev;
    const auto expect = oracle::kernel_trace(c);
    for (std::size_t t = 0; t < c.spikes.size(); ++t) {
      step(s, {&c.spikes[t], 1}, p, ev);
      if (s.synapses[0].r != expect[t])
        return fail("case " + std::to_string(k) + " step " + std::to_string(t) + ": r=" +
                    std::to_string(s.synapses[0].r) + " oracle=" + std::to_string(expect[t]));
    }
  }
  return {true, "1000 cases exact"};
}

// 2 -------------------------------------------------------------------------
Outcome fig3_replay() {
  auto cfg = fig3_preset(0);
  cfg.program.presentations = 30;
  const auto trace = run_simulation(cfg);
  const auto& offsets = cfg.patterns[0].offsets;
  for (const auto& pr : trace.presentations) {
    if (pr.pulse_width == 0 || pr.pulse_width > 2) continue;
    // Each kernel peak should sit at the same absolute time, so peak minus
    // spike offset differences mirror the pattern ISIs.
    std::int64_t lo = INT64_MAX, hi = INT64_MIN;
    bool all = true;
    for (std::size_t i = 0; i < pr.kernel_peaks.size(); ++i) {
      if (pr.kernel_peaks[i] < 0) all = false;
      lo = std::min(lo, pr.kernel_peaks[i]);
      hi = std::max(hi, pr.kernel_peaks[i]);
    }
    if (!all || hi - lo > 2) continue;
    std::string peaks;
    for (std::size_t i = 0; i < offsets.size(); ++i)
      peaks += (i ? "," : "") + std::to_string(pr.kernel_peaks[i]);
    return {true, "presentation " + std::to_string(pr.index + 1) + ": width " + std::to_string(pr.pulse_width) +
                      ", peaks [" + peaks + "]"};
  }
  const auto& last = trace.presentations.back();
  return fail("no presentation reached width <= 2 with aligned peaks (last width " +
              std::to_string(last.pulse_width) + ")");
}

// 3 -------------------------------------------------------------------------
Outcome stdp_conformance() {
  std::mt19937_64 rng(31337);
  NeuronParams p;
  p.n_synapses = 8;
  p.w_rise = 256;
  p.w_fall = 384;
  p.slope_step = 512;
  p.theta_rise = 4096;
  p.theta_fall = 2048;
  p.theta_init = 60000;
  p.dr_init = (p.w_init << p.slope_frac_bits) / 16;
  const std::uint64_t cap = (p.weight_limit() << 1) | 1;
  auto s = make_state(p);
  StepEvents ev;
  std::vector<std::uint8_t> u(p.n_synapses);
  std::size_t rises = 0, falls = 0, clears = 0;
  for (std::size_t t = 0; t < 100000; ++t) {
    const double rate = (t / 5000) % 2 ? 0.08 : 0.02;
    std::bernoulli_distribution spike(rate);
    for (auto& x : u) x = spike(rng);
    const auto before = s;
    step(s, u, p, ev);
    const bool edge = ev.output_falling || ev.membrane_zeroed;
    for (std::size_t i = 0; i < p.n_synapses; ++i) {
      const auto& a = before.synapses[i];
      const auto& b = s.synapses[i];
      if (a.d_flag && !b.d_flag) {
        if (!edge) return fail("flag of synapse " + std::to_string(i) + " cleared without an edge at step " +
                               std::to_string(t));
        ++clears;
      }
      if (b.w == a.w) continue;
      const std::uint64_t up = std::min(a.w + p.w_rise, cap);
      const std::uint64_t down = a.w > p.w_fall ? a.w - p.w_fall : 0;
      if (b.w == up && ev.output_falling) {
        ++rises;
      } else if (b.w == down && ev.membrane_zeroed && !ev.output_falling) {
        ++falls;
      } else {
        return fail("synapse " + std::to_string(i) + " moved " + std::to_string(a.w) + " -> " +
                    std::to_string(b.w) + " at step " + std::to_string(t));
      }
    }
    if (t % 997 == 0) {
      // Keep weights away from the cap so both rules stay exercised.
      for (auto& x : s.synapses)
        if (x.w > p.weight_limit()) x.w >>= 1;
    }
  }
  if (rises == 0 || falls == 0) return fail("rules not exercised: " + std::to_string(rises) + " rises, " +
                                            std::to_string(falls) + " falls");
  return {true, std::to_string(rises) + " rises, " + std::to_string(falls) + " falls, " + std::to_string(clears) +
                    " flag clears"};
}

// 4 -------------------------------------------------------------------------
Outcome fig5_replay() {
  NormErrorConfig cfg;
  const auto rows = run_norm_error(cfg, g_par);
  std::map<std::pair<unsigned, LsbPolicy>, std::vector<double>> err, rho;
  for (const auto& r : rows) {
    err[{r.bit_width, r.policy}].push_back(r.rms_error);
    rho[{r.bit_width, r.policy}].push_back(r.spearman);
  }
  std::ostringstream os;
  for (auto pol : cfg.policies) {
    double prev = INFINITY;
    for (auto b : cfg.bit_widths) {
      const double m = median(err[{b, pol}]);
      if (!(m < prev))
        return fail(std::string(to_string(pol)) + ": median error not decreasing at b=" + std::to_string(b) + " (" +
                    fmt(m, 5) + " >= " + fmt(prev, 5) + ")");
      prev = m;
      if (b >= 8) {
        const double worst = *std::min_element(rho[{b, pol}].begin(), rho[{b, pol}].end());
        if (worst < 0.95)
          return fail(std::string(to_string(pol)) + ": Spearman " + fmt(worst) + " < 0.95 at b=" + std::to_string(b));
      }
    }
  }
  double worst_ratio = 0.0;
  for (auto b : cfg.bit_widths) {
    if (b < 8) continue;
    const double all = median(err[{b, LsbPolicy::AllLsbHigh}]);
    const double zer = median(err[{b, LsbPolicy::ZeroedLsbHigh}]);
    const double ratio = zer > 0 ? all / zer : (all > 0 ? INFINITY : 1.0);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 2.0) return fail("AllLsbHigh/ZeroedLsbHigh = " + fmt(ratio) + " at b=" + std::to_string(b));
  }
  os << "medians decrease for all policies; min Spearman >= 0.95 at b>=8; max All/Zeroed " << fmt(worst_ratio);
  return {true, os.str()};
}

// 5 -------------------------------------------------------------------------
Outcome shift_invariance() {
  auto base = fig3_preset(0);
  base.program.presentations = 40;
  auto shifted = base;
  shifted.inject_shift_every = 1;
  const auto a = run_simulation(base), b = run_simulation(shifted);
  if (b.injected_pairs == 0) return fail("no shift pair was injected");
  if (a.onsets.size() != b.onsets.size())
    return fail("onset count differs: " + std::to_string(a.onsets.size()) + " vs " + std::to_string(b.onsets.size()));
  std::int64_t worst = 0;
  for (std::size_t i = 0; i < a.onsets.size(); ++i)
    worst = std::max<std::int64_t>(worst, std::llabs(static_cast<std::int64_t>(a.onsets[i]) -
                                                     static_cast<std::int64_t>(b.onsets[i])));
  if (worst > 1) return fail("onset moved by " + std::to_string(worst) + " steps");
  return {true, std::to_string(b.injected_pairs) + " pairs injected, " + std::to_string(a.onsets.size()) +
                    " onsets, max shift " + std::to_string(worst)};
}

// 6 -------------------------------------------------------------------------
Outcome fig7_shape() {
  std::ostringstream os;
  for (auto sig : {NormSignal::MaxW, NormSignal::SumW}) {
    const auto cfg = fig7_preset(sig, {0.0, 0.25, 0.5, 1.0});
    const auto res = run_noise_sweep(cfg, g_par);
    os << to_string(sig) << " w3:";
    double prev = INFINITY;
    for (const auto& pt : res.points) {
      const double w1 = pt.mean_weight[0], w2 = pt.mean_weight[1], w3 = pt.mean_weight[2];
      os << ' ' << fmt(w3, 0);
      if (w3 > prev) return fail(std::string(to_string(sig)) + ": w3 rises at lambda3=" + fmt(pt.lambda[2], 2));
      prev = w3;
      if (std::abs(w1 - w2) > 0.1 * std::max(w1, w2))
        return fail(std::string(to_string(sig)) + ": w1=" + fmt(w1, 0) + " w2=" + fmt(w2, 0) + " differ by more than 10%");
    }
    os << "; ";
  }
  return {true, os.str() + "w1, w2 within 10%"};
}

// 7 -------------------------------------------------------------------------
Outcome fig8_shape() {
  const auto cfg = fig8_preset({"ramp"});
  const auto res = run_noise_sweep(cfg, g_par);
  const auto& pt = res.points.at(0);
  const double rho = spearman(pt.mean_weight, pt.lambda);
  if (rho > -0.9) return fail("Spearman " + fmt(rho) + " > -0.9");
  return {true, "Spearman " + fmt(rho)};
}

// 8 -------------------------------------------------------------------------
Outcome fig9_shape() {
  auto cfg = fig9_preset(fig9_preset_names().front());
  cfg.noisy_counts = {8};
  const auto sum = summarize(run_recognition(cfg, g_par));
  std::map<double, double> st, ad;
  for (const auto& r : sum) (r.adaptive ? ad : st)[r.snr] = r.mean_error;
  std::ostringstream table;
  for (const auto& [snr, e] : st) table << " " << fmt(snr, 2) << ":" << fmt(e) << "/" << fmt(ad[snr]);
  const std::string grid = " [snr:static/adaptive" + table.str() + "]";

  if (!(st[0.0] < 0.02 && ad[0.0] < 0.02))
    return fail("(a) error at SNR 0: static " + fmt(st[0.0]) + ", adaptive " + fmt(ad[0.0]) + grid);
  for (const auto& [snr, e] : st)
    if (snr >= 1.0 && !(ad[snr] < e)) return fail("(b) adaptive not below static at SNR " + fmt(snr, 2) + grid);
  bool c = false;
  for (const auto& [snr, e] : st)
    if (snr >= 0.5 && snr <= 2.0 && ad[snr] < 0.05 && e > 0.20) c = true;
  if (!c) return fail("(c) no SNR in [0.5, 2] with adaptive < 5% and static > 20%" + grid);
  if (!(ad[0.25] > ad[1.0]))
    return fail("(d) no low-noise bump: adaptive " + fmt(ad[0.25]) + " at 0.25 vs " + fmt(ad[1.0]) + " at 1" + grid);
  return {true, "(a)-(d) hold for preset " + fig9_preset_names().front() + grid};
}

// 9 -------------------------------------------------------------------------
Outcome mnist_zeros(const std::string& dir) {
  if (dir.empty()) return fail("no MNIST directory (set SKAN_MNIST_DIR or pass --mnist-dir)");
  ImageSet train;
  try {
    train = load_mnist(dir, "train");
  } catch (const std::exception& e) {
    return fail(std::string("cannot load MNIST: ") + e.what());
  }
  const auto zeros = filter_label(train, 0);
  const auto cfg = mnist_preset();
  const auto rep = run_mnist(zeros, cfg);
  std::ostringstream os;
  os << rep.corrupted_disabled << "/" << rep.corruption.pixels.size() << " corrupted disabled";
  if (rep.last_corrupted_disable >= 0) os << " by image " << rep.last_corrupted_disable + 1;
  os << ", " << rep.clean_disabled << " clean disabled, slope/intensity Pearson "
     << fmt(rep.slope_intensity_pearson);
  if (rep.last_corrupted_disable < 0 || rep.last_corrupted_disable >= 1000) return fail(os.str());
  if (rep.clean_disabled != 0) return fail(os.str());
  if (rep.slope_intensity_pearson > -0.5) return fail(os.str());
  return {true, os.str()};
}

// 10 ------------------------------------------------------------------------
int run(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_synthetic_mnist(const fs::path& dir) {
  fs::create_directories(dir);
  ImageSet set;
  set.rows = 28;
  set.cols = 28;
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t p = 0; p < 784; ++p) {
      const double r = std::hypot(static_cast<double>(p / 28) - 13.5, static_cast<double>(p % 28) - 13.5);
      const bool ring = r > 6.0 && r < 10.0;
      set.pixels.push_back(ring ? static_cast<std::uint8_t>(160 + rng() % 96) : 0);
    }
    set.labels.push_back(i % 4 == 3 ? 1 : 0);
  }
  const auto img = serialize_idx_images(set), lab = serialize_idx_labels(set);
  std::ofstream(dir / "train-images-idx3-ubyte", std::ios::binary)
      .write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  std::ofstream(dir / "train-labels-idx1-ubyte", std::ios::binary)
      .write(reinterpret_cast<const char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
}

Outcome determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return fail("CLI binary not found (pass --cli)");
  const fs::path root = fs::temp_directory_path() / "skan_acceptance_determinism";
  fs::remove_all(root);
  write_synthetic_mnist(root / "mnist");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate", "--presentations 20"},
      {"simulate", "--presentations 20 --noise 0.5 --inject-shift-every 4"},
      {"normcheck", "--bits 4,8 --seeds 3 --updates 500"},
      {"sweep-noise", "--preset fig7 --seeds 2 --presentations 200 --burn-in 100"},
      {"recognition", "--noisy 8 --snr 0,1 --seeds 2 --presentations 150"},
      {"mnist", "--images 40 --data-dir " + (root / "mnist").string()},
  };
  std::size_t compared = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& [sub, args] = runs[k];
    const std::string name = "r" + std::to_string(k);
    for (const char* rep : {"a", "b"}) {
      const std::string cmd = "SOURCE_DATE_EPOCH=1700000000 '" + cli + "' " + sub + " " + args + " --seed 5 --out '" +
                              (root / rep).string() + "' --run-name " + name + " > /dev/null";
      if (run(cmd) != 0) return fail("command failed: " + cmd);
    }
    const fs::path a = root / "a" / name, b = root / "b" / name;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      const auto ext = e.path().extension();
      if (ext != ".csv" && ext != ".json") continue;
      const auto other = b / e.path().filename();
      if (!fs::exists(other)) return fail(sub + ": " + e.path().filename().string() + " missing in rerun");
      if (slurp(e.path()) != slurp(other)) return fail(sub + ": " + e.path().filename().string() + " differs");
      ++files;
    }
    if (files == 0) return fail(sub + ": no CSV/JSON output");
    compared += files;
  }
  fs::remove_all(root);
  return {true, std::to_string(compared) + " CSV/JSON files byte-identical across " + std::to_string(runs.size()) +
                    " reruns"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SKAN acceptance criteria"};
  std::string cli, mnist_dir;
  int only = 0;
  if (const char* env = std::getenv("SKAN_MNIST_DIR")) mnist_dir = env;
  app.add_option("--cli", cli, "Path to the skan CLI binary");
  app.add_option("--mnist-dir", mnist_dir, "Directory with the MNIST IDX files");
  app.add_option("--only", only, "Run a single criterion");
  app.add_option("--jobs", g_par.jobs, "OpenMP threads for fan-out (0 = default)");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "kernel arithmetic oracle", 1, kernel_oracle},
      {2, "pulse sharpening", 1, fig3_replay},
      {3, "STDP rule conformance", 10, stdp_conformance},
      {4, "shift normalization error", 30, fig5_replay},
      {5, "shift invariance", 5, shift_invariance},
      {6, "three-synapse noise sweep", 120, fig7_shape},
      {7, "ramp environment sweep", 120, fig8_shape},
      {8, "two-pattern recognition", 600, fig9_shape},
      {9, "MNIST zeros", 300, [&] { return mnist_zeros(mnist_dir); }},
      {10, "determinism", 600, [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.pass && secs > c.limit_s) out = fail("over time budget; " + out.detail);
    failed += !out.pass;
    std::printf("criterion %2d %s: %s (%.2fs / %.0fs) %s\n", c.id, out.pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, out.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
