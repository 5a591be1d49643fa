#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "skan/homeostasis.hpp"
#include "skan/mnist.hpp"
#include "skan/neuron.hpp"
#include "skan/stimulus.hpp"

namespace skan {

// How independent trials fan out. jobs = 0 uses the OpenMP default.
struct Parallelism {
  bool serial = false;
  int jobs = 0;

  static Parallelism serial_only() { return {true, 1}; }
};

// Runs body(i) for i in [0, n). Results must be written to slot i by the
// caller so the merge order never depends on scheduling. The first exception
// (lowest index) is rethrown after all iterations finish.
template <class Body>
void fan_out(std::size_t n, const Parallelism& par, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
  if (par.serial) {
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    const int threads = par.jobs > 0 ? par.jobs : 0;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads != 1)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Single-neuron simulation with per-presentation trace.

struct PresentationRecord {
  std::size_t index = 0;
  int pattern = -1;
  std::uint64_t start = 0;
  std::size_t pulses = 0;          // output onsets attributed to this presentation
  std::uint64_t pulse_width = 0;   // steps with s = 1 in the attribution window
  std::int64_t first_onset = -1;   // relative to the presentation start
  std::uint64_t theta = 0;         // at the end of the attribution window
  std::vector<std::int64_t> kernel_peaks;  // per synapse, relative to start; -1 if none
  std::vector<std::uint64_t> weights;
  std::vector<std::uint64_t> slopes;
};

struct SimulationConfig {
  NeuronParams params;
  std::vector<PatternSpec> patterns;
  ProgramSpec program;
  NoiseSpec noise;
  std::uint64_t noise_seed = 0;
  // Force a right+left shift pair at the first standby step after every
  // presentation whose index is a multiple of this (0 disables).
  std::size_t inject_shift_every = 0;
};

struct SimulationTrace {
  std::vector<PresentationRecord> presentations;
  std::vector<std::uint64_t> onsets;  // absolute output onset steps
  std::uint64_t right_shifts = 0;
  std::uint64_t left_shifts = 0;
  std::uint64_t injected_pairs = 0;
  NeuronState final_state;
};

SimulationTrace run_simulation(const SimulationConfig& cfg);

// Three channels, one fixed pattern, static weights.
SimulationConfig fig3_preset(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Shift normalization against the division oracle.

struct NormErrorConfig {
  std::size_t n_synapses = 16;
  std::vector<unsigned> bit_widths{4, 6, 8, 10, 12, 16};
  // DisableZeroed is accepted too, but random updates eventually disable every synapse.
  std::vector<LsbPolicy> policies{LsbPolicy::ZeroedLsbHigh, LsbPolicy::AllLsbHigh};
  NormSignal signal = NormSignal::MaxW;
  std::size_t updates = 10000;
  std::size_t seeds = 30;
  // Update sizes as a fraction of the half range, so every bit width sees
  // the same relative dynamics.
  double rise_fraction = 0.1;
  double fall_fraction = 0.1;
  double flag_probability = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NormErrorRow {
  unsigned bit_width = 0;
  LsbPolicy policy = LsbPolicy::ZeroedLsbHigh;
  std::uint64_t seed = 0;
  double rms_error = 0.0;
  double spearman = 0.0;
  std::uint64_t right_shifts = 0;
  std::uint64_t left_shifts = 0;
};

// One replay: the same seeded update sequence through the register path and
// the double-precision path. Under DisableZeroed the exact path freezes a
// synapse once its own value falls to zero.
NormErrorRow norm_error_trial(const NormErrorConfig& cfg, unsigned bit_width, LsbPolicy policy,
                              std::uint64_t seed_index);

// Rows ordered by (bit width, policy, seed) as listed in the config.
std::vector<NormErrorRow> run_norm_error(const NormErrorConfig& cfg, const Parallelism& par = {});

// ---------------------------------------------------------------------------
// Steady-state weights in a noise environment.

struct SweepConfig {
  NeuronParams params;
  std::vector<std::vector<double>> lambda_grid;  // one per-channel λ vector per point
  std::size_t seeds = 10;
  std::size_t presentations = 2000;
  std::size_t burn_in = 1000;
  std::uint32_t window_len = 32;
  std::uint32_t response_tail = 32;
  std::uint32_t gap_min = 64;
  std::uint32_t gap_max = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepPoint {
  std::vector<double> lambda;
  std::vector<double> mean_weight;  // over seeds of the per-seed steady state
  std::vector<double> sd_weight;
  std::vector<std::vector<double>> per_seed;
  double fire_rate = 0.0;  // output onsets per post-burn-in presentation
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // Weight after every presentation for seed 0 of each point.
  std::vector<std::vector<std::vector<double>>> traces;
};

// Weights sampled at the end of each presentation's response window.
std::vector<std::vector<double>> sweep_trial(const SweepConfig& cfg, const std::vector<double>& lambda,
                                             std::uint64_t seed_index, std::size_t* onsets_after_burn_in);

SweepResult run_noise_sweep(const SweepConfig& cfg, const Parallelism& par = {});

// Three synapses, λ1 = λ2 = `base_lambda`, λ3 swept.
SweepConfig fig7_preset(NormSignal signal, std::vector<double> lambda3 = {0.0, 0.25, 0.5, 1.0},
                        double base_lambda = 0.0);

// Sixteen-synapse environments: "uniform", "half", "groups", "pairs", "ramp".
std::vector<double> fig8_environment(const std::string& name);
std::vector<std::string> fig8_environment_names();
SweepConfig fig8_preset(const std::vector<std::string>& environments);

// ---------------------------------------------------------------------------
// Two-pattern recognition benchmark.

struct RecognitionCondition {
  std::size_t channels = 16;
  std::vector<std::size_t> noisy_channels;
  double snr = 0.0;  // λ on every noisy channel
  bool adaptive = true;
  std::uint64_t seed = 0;
};

struct RecognitionConfig {
  NeuronParams params;  // adaptive_weights is overridden per arm
  std::size_t channels = 16;
  std::vector<std::size_t> noisy_counts{2, 4, 8, 16};
  std::vector<double> snr_grid{0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0};
  std::size_t seeds = 10;
  std::size_t presentations = 1000;
  std::size_t learning = 100;
  std::uint32_t pattern_span = 16;
  std::uint32_t window_len = 128;
  std::uint32_t response_tail = 32;
  std::uint32_t gap_min = 32;
  std::uint32_t gap_max = 64;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<RecognitionCondition> conditions() const;
};

struct RecognitionReport {
  RecognitionCondition condition;
  int target = 0;
  bool target_tie = false;
  std::size_t targets = 0;
  std::size_t detected = 0;
  std::size_t missed = 0;
  std::size_t false_positives = 0;
  std::size_t gap_false_positives = 0;
  std::size_t disabled_noisy = 0;
  std::size_t disabled_clean = 0;
  double error = 0.0;
};

RecognitionReport run_recognition_trial(const RecognitionConfig& cfg, const RecognitionCondition& cond);

// Reports follow cfg.conditions() order.
std::vector<RecognitionReport> run_recognition(const RecognitionConfig& cfg, const Parallelism& par = {});

// "bump" keeps the low-noise error bump visible; "aggressive" uses a larger
// w_fall.
RecognitionConfig fig9_preset(const std::string& name);
std::vector<std::string> fig9_preset_names();

struct RecognitionSummary {
  std::size_t noisy = 0;
  double snr = 0.0;
  bool adaptive = false;
  double mean_error = 0.0;
  double sd_error = 0.0;
};

// Mean error over seeds per (noisy count, SNR, arm), in condition order.
std::vector<RecognitionSummary> summarize(const std::vector<RecognitionReport>& reports);

// ---------------------------------------------------------------------------
// MNIST zeros receptive field.

struct MnistConfig {
  NeuronParams params;
  std::size_t images = 3000;
  std::size_t corrupted = 40;
  double lambda_lo = 1.0;
  double lambda_hi = 3.0;
  std::uint32_t latency_span = 32;  // latency code covers the first steps of the window
  std::uint32_t window_len = 64;    // noise covers the whole window
  std::uint32_t gap_len = 128;      // quiet steps after each image
  std::uint64_t seed = 0;

  void validate() const;
};

struct ReceptiveField {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint64_t> slope;
  std::vector<std::uint64_t> weight;
  std::vector<std::uint8_t> disabled;
  std::vector<std::int64_t> disabled_at;  // training-image index, -1 if never
};

struct MnistReport {
  ReceptiveField field;
  CorruptionMap corruption;
  std::size_t images = 0;
  std::size_t output_pulses = 0;
  std::size_t corrupted_disabled = 0;
  std::size_t clean_disabled = 0;
  std::int64_t last_corrupted_disable = -1;  // -1 unless every corrupted pixel was disabled
  std::vector<double> mean_intensity;
  double slope_intensity_pearson = 0.0;
  std::string dataset_checksum;
};

// `zeros` must already be filtered; images cycle if the budget exceeds the set.
MnistReport run_mnist(const ImageSet& zeros, const MnistConfig& cfg);

MnistConfig mnist_preset();

}  // namespace skan
