#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Phase : std::uint8_t { Idle, Rising, Falling };

enum class LsbPolicy : std::uint8_t { AllLsbHigh, ZeroedLsbHigh, DisableZeroed };

enum class NormSignal : std::uint8_t { MaxW, SumW };

enum class SlopeInit : std::uint8_t { Uniform, SeededRandom };

const char* to_string(Phase p);
const char* to_string(LsbPolicy p);
const char* to_string(NormSignal s);
const char* to_string(SlopeInit s);
LsbPolicy parse_lsb_policy(const std::string& s);
NormSignal parse_norm_signal(const std::string& s);
SlopeInit parse_slope_init(const std::string& s);

// All values are unsigned integers in register units. Slopes carry
// `slope_frac_bits` fractional bits; weights, kernels and the threshold
// share one integer scale.
struct NeuronParams {
  std::size_t n_synapses = 1;
  unsigned bit_width = 16;
  unsigned slope_frac_bits = 8;
  std::uint64_t w_rise = 1024;
  std::uint64_t w_fall = 64;
  std::uint64_t slope_step = 1 << 8;
  std::uint64_t slope_min = 256ull << 8;
  std::uint64_t slope_max = 16384ull << 8;
  std::uint64_t theta_rise = 512;
  std::uint64_t theta_fall = 512;
  std::uint64_t theta_min = 1;
  std::uint64_t theta_init = 1ull << 14;
  std::uint64_t w_init = 1ull << 15;
  SlopeInit dr_init_policy = SlopeInit::Uniform;
  std::uint64_t dr_init = 2048ull << 8;
  std::uint64_t dr_seed = 0;
  LsbPolicy lsb_policy = LsbPolicy::ZeroedLsbHigh;
  NormSignal norm_signal = NormSignal::MaxW;
  bool adaptive_weights = true;

  // Throws skan::Error naming the first violated constraint.
  void validate() const;

  // Width of the weight register: b for MaxW, b + ceil(log2 n) for SumW.
  unsigned weight_register_bits() const;
  std::uint64_t weight_limit() const { return (std::uint64_t{1} << weight_register_bits()) - 1; }
};

struct SynapseState {
  std::uint64_t w = 0;
  std::uint64_t r = 0;
  std::uint64_t dr = 0;
  Phase phase = Phase::Idle;
  bool d_flag = false;
  bool enabled = true;

  bool operator==(const SynapseState&) const = default;
};

struct NeuronState {
  std::vector<SynapseState> synapses;
  std::uint64_t theta = 0;
  std::uint64_t sum_r = 0;
  bool s = false;
  bool prev_s = false;
  std::uint64_t prev_sum_r = 0;
  std::uint64_t t = 0;

  bool operator==(const NeuronState&) const = default;

  bool standby() const;
};

struct StepEvents {
  bool output_falling = false;    // ↓s
  bool membrane_zeroed = false;   // ↓Σr
  bool output_rising = false;
  bool weight_overflow = false;
  std::vector<std::size_t> rose;
  std::vector<std::size_t> fell;
  std::vector<std::size_t> zeroed;

  void clear();
};

NeuronState make_state(const NeuronParams& params);

// Kernel step size: integer part of the fixed-point slope, never below 1.
inline std::uint64_t slope_step_int(std::uint64_t dr, unsigned frac_bits) {
  const std::uint64_t i = dr >> frac_bits;
  return i == 0 ? 1 : i;
}

// One Δt of the neuron: spike intake, kernel update, soma comparison,
// threshold and slope adaptation while the output is high, then the
// edge-triggered weight/flag rules. `events` is overwritten.
void step(NeuronState& state, std::span<const std::uint8_t> inputs,
          const NeuronParams& params, StepEvents& events);

// Edge handlers used by `step`; exposed so the rules can be exercised in
// isolation. Both clear every flag they consume.
void apply_stdp_rise(NeuronState& state, const NeuronParams& params, StepEvents& events);
void apply_stdp_fall(NeuronState& state, const NeuronParams& params, StepEvents& events);

}  // namespace skan
