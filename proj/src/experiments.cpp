#include "skan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "skan/rng.hpp"
#include "skan/simulator.hpp"
#include "skan/stats.hpp"

namespace skan {

namespace {

std::vector<std::uint64_t> weights_of(const NeuronState& s) {
  std::vector<std::uint64_t> out;
  out.reserve(s.synapses.size());
  for (const auto& syn : s.synapses) out.push_back(syn.w);
  return out;
}

std::vector<std::uint64_t> slopes_of(const NeuronState& s) {
  std::vector<std::uint64_t> out;
  out.reserve(s.synapses.size());
  for (const auto& syn : s.synapses) out.push_back(syn.dr);
  return out;
}

// Kernel duration T steps for a weight w: dr = w / T in fixed point.
std::uint64_t slope_for_duration(std::uint64_t w, std::uint32_t steps, unsigned frac_bits) {
  return (w << frac_bits) / steps;
}

}  // namespace

// ---------------------------------------------------------------------------

SimulationTrace run_simulation(const SimulationConfig& cfg) {
  const auto program = make_program(cfg.program);
  const auto raster = compose_stream(program, cfg.patterns, cfg.noise, cfg.noise_seed);
  if (raster.channels() != cfg.params.n_synapses)
    throw Error("simulation: stimulus has " + std::to_string(raster.channels()) + " channels, neuron has " +
                std::to_string(cfg.params.n_synapses));

  Neuron neuron(cfg.params);
  const std::size_t n = cfg.params.n_synapses;
  SimulationTrace trace;
  trace.presentations.resize(program.slots.size());
  for (std::size_t k = 0; k < program.slots.size(); ++k) {
    auto& rec = trace.presentations[k];
    rec.index = k;
    rec.pattern = program.slots[k].pattern;
    rec.start = program.slots[k].start;
    rec.kernel_peaks.assign(n, -1);
  }

  std::vector<Phase> before(n);
  std::size_t k = 0;
  bool inject_pending = false;
  for (std::uint64_t t = 0; t < raster.steps(); ++t) {
    for (std::size_t i = 0; i < n; ++i) before[i] = neuron.state().synapses[i].phase;
    const auto& ev = neuron.advance(raster.row(t));
    if (ev.output_rising) trace.onsets.push_back(t);

    while (k < program.slots.size() && t >= program.response_end(program.slots[k])) ++k;
    if (k < program.slots.size() && t >= program.slots[k].start) {
      auto& rec = trace.presentations[k];
      const auto rel = static_cast<std::int64_t>(t - rec.start);
      if (ev.output_rising) {
        if (rec.pulses == 0) rec.first_onset = rel;
        ++rec.pulses;
      }
      if (neuron.state().s) ++rec.pulse_width;
      for (std::size_t i = 0; i < n; ++i)
        if (before[i] == Phase::Rising && neuron.state().synapses[i].phase != Phase::Rising &&
            rec.kernel_peaks[i] < 0)
          rec.kernel_peaks[i] = rel;
      if (t + 1 == program.response_end(program.slots[k])) {
        rec.theta = neuron.state().theta;
        rec.weights = weights_of(neuron.state());
        rec.slopes = slopes_of(neuron.state());
        if (cfg.inject_shift_every > 0 && k % cfg.inject_shift_every == 0) inject_pending = true;
      }
    }
    if (inject_pending && neuron.state().standby() && neuron.inject_shift_pair()) {
      inject_pending = false;
      ++trace.injected_pairs;
    }
  }
  trace.right_shifts = neuron.right_shifts();
  trace.left_shifts = neuron.left_shifts();
  trace.final_state = neuron.state();
  return trace;
}

SimulationConfig fig3_preset(std::uint64_t seed) {
  SimulationConfig cfg;
  auto& p = cfg.params;
  p.n_synapses = 3;
  p.adaptive_weights = false;
  p.dr_init = 2048ull << 8;
  p.slope_step = 16384;
  p.theta_rise = 2048;
  p.theta_fall = 3072;
  p.theta_init = 1ull << 14;
  cfg.patterns = {PatternSpec{3, {0, 7, 16}, 32}};
  cfg.program.presentations = 40;
  cfg.program.n_patterns = 1;
  cfg.program.window_len = 32;
  cfg.program.response_tail = 32;
  cfg.program.gap_min = 32;
  cfg.program.gap_max = 96;
  cfg.program.seed = seed;
  cfg.noise = NoiseSpec::quiet(3);
  cfg.noise_seed = derive_seed(seed, {1});
  return cfg;
}

// ---------------------------------------------------------------------------

void NormErrorConfig::validate() const {
  if (bit_widths.size() < 2) throw Error("norm error: need at least two bit widths");
  if (policies.empty()) throw Error("norm error: need at least one lsb policy");
  if (n_synapses < 2) throw Error("norm error: n_synapses must be >= 2");
  if (seeds == 0) throw Error("norm error: seeds must be >= 1");
  if (!(rise_fraction > 0.0) || !(fall_fraction > 0.0)) throw Error("norm error: update fractions must be > 0");
  if (!(flag_probability > 0.0 && flag_probability <= 1.0))
    throw Error("norm error: flag_probability must lie in (0, 1]");
}

NormErrorRow norm_error_trial(const NormErrorConfig& cfg, unsigned bit_width, LsbPolicy policy,
                              std::uint64_t seed_index) {
  NeuronParams p;
  p.n_synapses = cfg.n_synapses;
  p.bit_width = bit_width;
  p.lsb_policy = policy;
  p.norm_signal = cfg.signal;
  const std::uint64_t half = std::uint64_t{1} << (bit_width - 1);
  p.w_init = half;
  p.w_rise = std::max<std::uint64_t>(1, std::llround(static_cast<double>(half) * cfg.rise_fraction));
  p.w_fall = std::max<std::uint64_t>(1, std::llround(static_cast<double>(half) * cfg.fall_fraction));
  p.validate();

  NeuronState state = make_state(p);
  const NormConfig norm = NormConfig::from(p);
  std::vector<double> exact(p.n_synapses, static_cast<double>(p.w_init));
  const auto rise = static_cast<double>(p.w_rise);
  const auto fall = static_cast<double>(p.w_fall);
  std::vector<bool> exact_disabled(p.n_synapses, false);

  NormErrorRow row{bit_width, policy, seed_index, 0.0, 0.0, 0, 0};
  std::mt19937_64 rng(derive_seed(cfg.seed, {seed_index}));
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flagged(cfg.flag_probability);
  StepEvents ev;
  for (std::size_t u = 0; u < cfg.updates; ++u) {
    const bool up = coin(rng);
    for (std::size_t i = 0; i < p.n_synapses; ++i) {
      if (!flagged(rng)) continue;
      if (state.synapses[i].enabled) state.synapses[i].d_flag = true;
      if (exact_disabled[i]) continue;
      exact[i] = up ? exact[i] + rise : std::max(exact[i] - fall, 0.0);
      if (exact[i] == 0.0 && policy == LsbPolicy::DisableZeroed) exact_disabled[i] = true;
    }
    ev.clear();
    if (up)
      apply_stdp_rise(state, p, ev);
    else
      apply_stdp_fall(state, p, ev);

    switch (schedule_normalization(state, ev, norm)) {
      case NormAction::RightNow: {
        const auto right = right_shift_neuron(state, norm);
        row.right_shifts += right.shifts;
        for (double& x : exact) x = std::ldexp(x, -static_cast<int>(right.shifts));
        if (!left_shift_wanted(state, norm)) break;
        [[fallthrough]];
      }
      case NormAction::LeftAtStandby: {
        const auto left = left_shift_neuron(state, norm);
        row.left_shifts += left.shifts;
        for (double& x : exact) x = std::ldexp(x, static_cast<int>(left.shifts));
        break;
      }
      case NormAction::None:
        break;
    }
  }

  const auto shifted = weights_of(state);
  const bool any_shifted = std::any_of(shifted.begin(), shifted.end(), [](auto w) { return w > 0; });
  const bool any_exact = std::any_of(exact.begin(), exact.end(), [](double w) { return w > 0.0; });
  if (!any_shifted || !any_exact) {
    row.rms_error = std::nan("");
    row.spearman = std::nan("");
    return row;
  }
  row.rms_error = rms_relative_error(shifted, exact, cfg.signal);
  std::vector<double> as_double(shifted.begin(), shifted.end());
  row.spearman = spearman(as_double, exact);
  return row;
}

std::vector<NormErrorRow> run_norm_error(const NormErrorConfig& cfg, const Parallelism& par) {
  cfg.validate();
  const std::size_t per_b = cfg.policies.size() * cfg.seeds;
  std::vector<NormErrorRow> rows(cfg.bit_widths.size() * per_b);
  fan_out(rows.size(), par, [&](std::size_t idx) {
    const unsigned b = cfg.bit_widths[idx / per_b];
    const LsbPolicy pol = cfg.policies[(idx % per_b) / cfg.seeds];
    rows[idx] = norm_error_trial(cfg, b, pol, idx % cfg.seeds);
  });
  return rows;
}

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
  params.validate();
  if (lambda_grid.empty()) throw Error("sweep: lambda grid is empty");
  for (const auto& l : lambda_grid) {
    if (l.size() != params.n_synapses)
      throw Error("sweep: lambda vector has " + std::to_string(l.size()) + " entries, neuron has " +
                  std::to_string(params.n_synapses) + " synapses");
    NoiseSpec{l}.validate();
  }
  if (seeds == 0) throw Error("sweep: seeds must be >= 1");
  if (burn_in >= presentations) throw Error("sweep: burn_in must be < presentations");
}

std::vector<std::vector<double>> sweep_trial(const SweepConfig& cfg, const std::vector<double>& lambda,
                                             std::uint64_t seed_index, std::size_t* onsets_after_burn_in) {
  const std::uint64_t base = derive_seed(cfg.seed, {seed_index});
  const std::size_t n = cfg.params.n_synapses;
  std::vector<PatternSpec> patterns{gen_pattern(n, cfg.window_len, derive_seed(base, {1}))};
  ProgramSpec ps;
  ps.presentations = cfg.presentations;
  ps.n_patterns = 1;
  ps.window_len = cfg.window_len;
  ps.response_tail = cfg.response_tail;
  ps.gap_min = cfg.gap_min;
  ps.gap_max = cfg.gap_max;
  ps.seed = derive_seed(base, {2});
  const auto program = make_program(ps);
  const auto raster = compose_stream(program, patterns, NoiseSpec{lambda}, derive_seed(base, {3}));

  Neuron neuron(cfg.params);
  std::vector<std::vector<double>> trace;
  trace.reserve(program.slots.size());
  std::size_t k = 0;
  std::size_t late_onsets = 0;
  for (std::uint64_t t = 0; t < raster.steps() && k < program.slots.size(); ++t) {
    const auto& ev = neuron.advance(raster.row(t));
    if (ev.output_rising && k >= cfg.burn_in) ++late_onsets;
    if (t + 1 == program.response_end(program.slots[k])) {
      const auto& syn = neuron.state().synapses;
      std::vector<double> w(syn.size());
      for (std::size_t i = 0; i < syn.size(); ++i) w[i] = static_cast<double>(syn[i].w);
      trace.push_back(std::move(w));
      ++k;
    }
  }
  if (onsets_after_burn_in) *onsets_after_burn_in = late_onsets;
  return trace;
}

SweepResult run_noise_sweep(const SweepConfig& cfg, const Parallelism& par) {
  cfg.validate();
  const std::size_t points = cfg.lambda_grid.size();
  std::vector<std::vector<double>> steady(points * cfg.seeds);
  std::vector<std::size_t> onsets(points * cfg.seeds);
  std::vector<std::vector<std::vector<double>>> traces(points);
  fan_out(steady.size(), par, [&](std::size_t idx) {
    const std::size_t pt = idx / cfg.seeds;
    const std::size_t s = idx % cfg.seeds;
    auto trace = sweep_trial(cfg, cfg.lambda_grid[pt], s, &onsets[idx]);
    steady[idx] = steady_state(trace, cfg.burn_in);
    if (s == 0) traces[pt] = std::move(trace);
  });

  SweepResult out;
  out.traces = std::move(traces);
  const std::size_t n = cfg.params.n_synapses;
  for (std::size_t pt = 0; pt < points; ++pt) {
    SweepPoint point;
    point.lambda = cfg.lambda_grid[pt];
    point.mean_weight.assign(n, 0.0);
    point.sd_weight.assign(n, 0.0);
    std::size_t fired = 0;
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      point.per_seed.push_back(steady[pt * cfg.seeds + s]);
      fired += onsets[pt * cfg.seeds + s];
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> col;
      for (const auto& row : point.per_seed) col.push_back(row[i]);
      point.mean_weight[i] = mean(col);
      point.sd_weight[i] = stddev(col);
    }
    point.fire_rate = static_cast<double>(fired) /
                      static_cast<double>(cfg.seeds * (cfg.presentations - cfg.burn_in));
    out.points.push_back(std::move(point));
  }
  return out;
}

SweepConfig fig7_preset(NormSignal signal, std::vector<double> lambda3, double base_lambda) {
  SweepConfig cfg;
  auto& p = cfg.params;
  p.n_synapses = 3;
  p.norm_signal = signal;
  p.w_rise = 256;
  p.w_fall = 64;
  p.slope_step = 16384;
  p.dr_init = slope_for_duration(p.w_init, 32, p.slope_frac_bits);
  p.theta_rise = 2048;
  if (signal == NormSignal::MaxW) {
    p.theta_fall = 5120;
    p.theta_init = 3 * p.w_init * 3 / 4;
  } else {
    p.theta_fall = 3072;
    p.theta_init = 3 * p.w_init;
  }
  for (double l : lambda3) cfg.lambda_grid.push_back({base_lambda, base_lambda, l});
  return cfg;
}

std::vector<std::string> fig8_environment_names() { return {"uniform", "half", "groups", "pairs", "ramp"}; }

std::vector<double> fig8_environment(const std::string& name) {
  std::vector<double> l(16, 0.0);
  if (name == "uniform") {
    std::fill(l.begin(), l.end(), 1.0 / 16);
  } else if (name == "half") {
    std::fill(l.begin() + 8, l.end(), 1.0 / 8);
  } else if (name == "groups") {
    for (std::size_t i = 0; i < 16; ++i) l[i] = static_cast<double>(i / 4) / 24.0;
  } else if (name == "pairs") {
    for (std::size_t i = 0; i < 16; ++i) l[i] = static_cast<double>(i / 2) / 56.0;
  } else if (name == "ramp") {
    for (std::size_t i = 0; i < 16; ++i) l[i] = static_cast<double>(i) / 120.0;
  } else {
    throw Error("unknown noise environment '" + name + "' (expected uniform, half, groups, pairs or ramp)");
  }
  return l;
}

SweepConfig fig8_preset(const std::vector<std::string>& environments) {
  SweepConfig cfg;
  auto& p = cfg.params;
  p.n_synapses = 16;
  p.w_rise = 256;
  p.w_fall = 64;
  p.slope_step = 16384;
  p.dr_init = slope_for_duration(p.w_init, 32, p.slope_frac_bits);
  p.theta_rise = 8192;
  p.theta_fall = 40960;
  p.theta_init = 16 * p.w_init * 3 / 5;
  for (const auto& e : environments) cfg.lambda_grid.push_back(fig8_environment(e));
  return cfg;
}

// ---------------------------------------------------------------------------

void RecognitionConfig::validate() const {
  params.validate();
  if (params.n_synapses != channels)
    throw Error("recognition: params.n_synapses (" + std::to_string(params.n_synapses) +
                ") must equal channels (" + std::to_string(channels) + ")");
  for (auto k : noisy_counts)
    if (k > channels) throw Error("recognition: noisy count exceeds channel count");
  for (double x : snr_grid)
    if (!std::isfinite(x) || x < 0.0) throw Error("recognition: snr values must be finite and >= 0");
  if (seeds == 0) throw Error("recognition: seeds must be >= 1");
  if (learning == 0 || learning >= presentations)
    throw Error("recognition: learning must lie in [1, presentations)");
  if (pattern_span < 2 || pattern_span > window_len)
    throw Error("recognition: pattern_span must lie in [2, window_len]");
  ProgramSpec ps;
  ps.n_patterns = 2;
  ps.window_len = window_len;
  ps.response_tail = response_tail;
  ps.gap_min = gap_min;
  ps.gap_max = gap_max;
  ps.validate();
}

std::vector<RecognitionCondition> RecognitionConfig::conditions() const {
  std::vector<RecognitionCondition> out;
  for (auto k : noisy_counts)
    for (double snr : snr_grid)
      for (bool adaptive : {false, true})
        for (std::size_t s = 0; s < seeds; ++s) {
          RecognitionCondition c;
          c.channels = channels;
          for (std::size_t i = 0; i < k; ++i) c.noisy_channels.push_back(i);
          c.snr = snr;
          c.adaptive = adaptive;
          c.seed = s;
          out.push_back(std::move(c));
        }
  return out;
}

RecognitionReport run_recognition_trial(const RecognitionConfig& cfg, const RecognitionCondition& cond) {
  NeuronParams p = cfg.params;
  p.n_synapses = cond.channels;
  p.adaptive_weights = cond.adaptive;

  const std::uint64_t base = derive_seed(cfg.seed, {cond.seed});
  std::vector<PatternSpec> patterns{gen_pattern(cond.channels, cfg.pattern_span, derive_seed(base, {1})),
                                    gen_pattern(cond.channels, cfg.pattern_span, derive_seed(base, {2}))};
  ProgramSpec ps;
  ps.presentations = cfg.presentations;
  ps.n_patterns = 2;
  ps.window_len = cfg.window_len;
  ps.response_tail = cfg.response_tail;
  ps.gap_min = cfg.gap_min;
  ps.gap_max = cfg.gap_max;
  ps.seed = derive_seed(base, {3});
  const auto program = make_program(ps);
  NoiseSpec noise = NoiseSpec::quiet(cond.channels);
  for (auto c : cond.noisy_channels) {
    if (c >= cond.channels) throw Error("recognition: noisy channel index out of range");
    noise.lambda_per_channel[c] = cond.snr;
  }
  const auto raster = compose_stream(program, patterns, noise, derive_seed(base, {4}));

  Neuron neuron(p);
  std::vector<std::size_t> hits(program.slots.size(), 0);
  std::vector<std::uint64_t> gap_onsets;
  std::size_t k = 0;
  for (std::uint64_t t = 0; t < raster.steps(); ++t) {
    if (!neuron.advance(raster.row(t)).output_rising) continue;
    while (k < program.slots.size() && t >= program.response_end(program.slots[k])) ++k;
    if (k < program.slots.size() && t >= program.slots[k].start)
      ++hits[k];
    else
      gap_onsets.push_back(t);
  }

  RecognitionReport rep;
  rep.condition = cond;
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < cfg.learning; ++i)
    count[static_cast<std::size_t>(program.slots[i].pattern)] += hits[i];
  rep.target = count[1] > count[0] ? 1 : 0;
  rep.target_tie = count[0] == count[1];
  for (std::size_t i = cfg.learning; i < program.slots.size(); ++i) {
    if (program.slots[i].pattern == rep.target) {
      ++rep.targets;
      if (hits[i] > 0)
        ++rep.detected;
      else
        ++rep.missed;
    } else {
      rep.false_positives += hits[i];
    }
  }
  const std::uint64_t scored_from = program.response_end(program.slots[cfg.learning - 1]);
  for (auto t : gap_onsets)
    if (t >= scored_from) ++rep.gap_false_positives;
  rep.false_positives += rep.gap_false_positives;

  const std::vector<bool> is_noisy = [&] {
    std::vector<bool> v(cond.channels, false);
    for (auto c : cond.noisy_channels) v[c] = true;
    return v;
  }();
  for (std::size_t i = 0; i < cond.channels; ++i)
    if (!neuron.state().synapses[i].enabled) ++(is_noisy[i] ? rep.disabled_noisy : rep.disabled_clean);
  rep.error = rep.targets == 0 ? 0.0
                               : static_cast<double>(rep.missed + rep.false_positives) /
                                     static_cast<double>(rep.targets);
  return rep;
}

std::vector<RecognitionReport> run_recognition(const RecognitionConfig& cfg, const Parallelism& par) {
  cfg.validate();
  const auto conds = cfg.conditions();
  std::vector<RecognitionReport> out(conds.size());
  fan_out(conds.size(), par, [&](std::size_t i) { out[i] = run_recognition_trial(cfg, conds[i]); });
  return out;
}

std::vector<std::string> fig9_preset_names() { return {"bump", "aggressive"}; }

RecognitionConfig fig9_preset(const std::string& name) {
  RecognitionConfig cfg;
  auto& p = cfg.params;
  p.n_synapses = cfg.channels;
  p.lsb_policy = LsbPolicy::DisableZeroed;
  p.norm_signal = NormSignal::SumW;
  p.w_init = 3ull << 14;
  std::uint64_t theta_percent = 0;
  if (name == "bump") {
    cfg.window_len = 192;
    p.w_rise = 214;
    p.w_fall = 180;
    p.slope_step = 2553;
    p.theta_rise = 4742;
    p.theta_fall = 3946;
    theta_percent = 38;
  } else if (name == "aggressive") {
    cfg.window_len = 128;
    p.w_rise = 132;
    p.w_fall = 217;
    p.slope_step = 1991;
    p.theta_rise = 5378;
    p.theta_fall = 4303;
    theta_percent = 45;
  } else {
    throw Error("unknown recognition preset '" + name + "' (expected bump or aggressive)");
  }
  p.dr_init = slope_for_duration(p.w_init, cfg.pattern_span, p.slope_frac_bits);
  p.theta_init = cfg.channels * p.w_init * theta_percent / 100;
  return cfg;
}

std::vector<RecognitionSummary> summarize(const std::vector<RecognitionReport>& reports) {
  std::vector<RecognitionSummary> out;
  std::map<std::tuple<std::size_t, double, bool>, std::size_t> index;
  std::vector<std::vector<double>> errors;
  for (const auto& r : reports) {
    const auto key = std::make_tuple(r.condition.noisy_channels.size(), r.condition.snr, r.condition.adaptive);
    auto [it, fresh] = index.try_emplace(key, out.size());
    if (fresh) {
      out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), 0.0, 0.0});
      errors.emplace_back();
    }
    errors[it->second].push_back(r.error);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mean_error = mean(errors[i]);
    out[i].sd_error = stddev(errors[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

void MnistConfig::validate() const {
  params.validate();
  if (params.lsb_policy != LsbPolicy::DisableZeroed)
    throw Error("mnist: lsb_policy must be DisableZeroed");
  if (latency_span < 2 || latency_span > window_len)
    throw Error("mnist: latency_span must lie in [2, window_len]");
  if (!(lambda_lo >= 0.0 && lambda_lo < lambda_hi)) throw Error("mnist: need 0 <= lambda_lo < lambda_hi");
  if (corrupted > params.n_synapses) throw Error("mnist: corrupted exceeds the pixel count");
}

MnistReport run_mnist(const ImageSet& zeros, const MnistConfig& cfg) {
  cfg.validate();
  if (zeros.size() == 0) throw Error("mnist: image set is empty");
  const std::size_t npix = zeros.image_size();
  if (cfg.params.n_synapses != npix)
    throw Error("mnist: neuron has " + std::to_string(cfg.params.n_synapses) + " synapses, images have " +
                std::to_string(npix) + " pixels");

  MnistReport rep;
  rep.images = cfg.images;
  rep.dataset_checksum = zeros.checksum;
  rep.corruption = make_corruption_map(npix, cfg.corrupted, cfg.lambda_lo, cfg.lambda_hi, derive_seed(cfg.seed, {1}));
  auto& field = rep.field;
  field.rows = zeros.rows;
  field.cols = zeros.cols;
  field.disabled_at.assign(npix, -1);

  Neuron neuron(cfg.params);
  const std::vector<std::uint8_t> quiet(npix, 0);
  for (std::size_t i = 0; i < cfg.images; ++i) {
    const auto raster =
        encode_image(zeros.image(i % zeros.size()), rep.corruption, cfg.window_len,
                                  derive_seed(cfg.seed, {2, i}), cfg.latency_span);
    for (std::uint64_t t = 0; t < raster.steps(); ++t)
      rep.output_pulses += neuron.advance(raster.row(t)).output_rising;
    for (std::uint32_t t = 0; t < cfg.gap_len; ++t) rep.output_pulses += neuron.advance(quiet).output_rising;
    const auto& syn = neuron.state().synapses;
    for (std::size_t j = 0; j < npix; ++j)
      if (!syn[j].enabled && field.disabled_at[j] < 0) field.disabled_at[j] = static_cast<std::int64_t>(i);
  }

  const auto& syn = neuron.state().synapses;
  field.slope = slopes_of(neuron.state());
  field.weight = weights_of(neuron.state());
  field.disabled.resize(npix);
  for (std::size_t j = 0; j < npix; ++j) field.disabled[j] = syn[j].enabled ? 0 : 1;

  std::vector<bool> corrupted(npix, false);
  for (auto j : rep.corruption.pixels) corrupted[j] = true;
  std::int64_t last = -1;
  for (std::size_t j = 0; j < npix; ++j) {
    if (!field.disabled[j]) continue;
    if (corrupted[j]) {
      ++rep.corrupted_disabled;
      last = std::max(last, field.disabled_at[j]);
    } else {
      ++rep.clean_disabled;
    }
  }
  if (rep.corrupted_disabled == rep.corruption.pixels.size()) rep.last_corrupted_disable = last;

  rep.mean_intensity.assign(npix, 0.0);
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const auto img = zeros.image(i);
    for (std::size_t j = 0; j < npix; ++j) rep.mean_intensity[j] += img[j];
  }
  for (double& m : rep.mean_intensity) m /= static_cast<double>(zeros.size());

  std::vector<double> s, m;
  for (std::size_t j = 0; j < npix; ++j) {
    if (field.disabled[j]) continue;
    s.push_back(static_cast<double>(field.slope[j]));
    m.push_back(rep.mean_intensity[j]);
  }
  rep.slope_intensity_pearson = s.size() >= 2 ? pearson(s, m) : 0.0;
  return rep;
}

MnistConfig mnist_preset() {
  MnistConfig cfg;
  cfg.window_len = 112;
  cfg.gap_len = 512;
  auto& p = cfg.params;
  p.n_synapses = 784;
  p.lsb_policy = LsbPolicy::DisableZeroed;
  p.w_rise = 256;
  p.w_fall = 512;
  p.slope_step = 8192;
  p.slope_max = 262144ull << 8;
  p.dr_init = slope_for_duration(p.w_init, cfg.latency_span, p.slope_frac_bits);
  // Theta has to fall faster than the membrane peak loses weight while silent.
  p.theta_rise = 1ull << 20;
  p.theta_fall = 1ull << 20;
  p.theta_init = 784 * p.w_init * 78 / 100;
  return cfg;
}

}  // namespace skan
