#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "skan/neuron.hpp"

namespace skan {

// Shift-based weight normalization. The monitored signal (max or sum of the
// enabled weights) is kept in the top half of its register: an overflow
// halves every neuron value, a quiet neuron whose signal sits in the bottom
// half doubles them.
struct NormConfig {
  unsigned bit_width = 16;
  NormSignal signal = NormSignal::MaxW;
  LsbPolicy lsb_policy = LsbPolicy::ZeroedLsbHigh;
  unsigned sum_register_bits = 16;
  std::uint64_t slope_min = 1;
  std::uint64_t slope_max = ~std::uint64_t{0};
  std::uint64_t theta_min = 1;

  static NormConfig from(const NeuronParams& params);

  unsigned signal_bits() const { return signal == NormSignal::MaxW ? bit_width : sum_register_bits; }
  std::uint64_t signal_limit() const { return (std::uint64_t{1} << signal_bits()) - 1; }
  std::uint64_t half_range() const { return std::uint64_t{1} << (signal_bits() - 1); }
  std::uint64_t weight_limit() const;
};

enum class ShiftDirection : std::uint8_t { Right, Left };
enum class ShiftTrigger : std::uint8_t { Overflow, StandbyMsbLow };

struct NormEvent {
  ShiftDirection direction = ShiftDirection::Right;
  ShiftTrigger trigger = ShiftTrigger::Overflow;
  std::uint64_t timestep = 0;
  unsigned shifts = 0;
  std::vector<std::size_t> zeroed_synapses;
};

enum class NormAction : std::uint8_t { None, RightNow, LeftAtStandby };

// Max or sum over enabled synapses.
std::uint64_t monitored_signal(const NeuronState& state, NormSignal signal);

bool overflowed(const NeuronState& state, const NormConfig& cfg);
bool left_shift_wanted(const NeuronState& state, const NormConfig& cfg);

// Halves w, r, theta and dr until nothing overflows (at most bit_width
// times), then applies the LSB policy to weights left at zero.
NormEvent right_shift_neuron(NeuronState& state, const NormConfig& cfg);

// Doubles w, theta and dr while the monitored signal sits in the bottom half
// of its range. Requires standby; throws otherwise.
NormEvent left_shift_neuron(NeuronState& state, const NormConfig& cfg);

NormAction schedule_normalization(const NeuronState& state, const StepEvents& events,
                                  const NormConfig& cfg);

// Double-precision reference: scales `weights` so the max (or sum) equals
// `reference`. Throws on an all-zero vector.
std::vector<double> normalize_oracle(std::span<const double> weights, NormSignal signal,
                                     double reference = 1.0);

// RMS of componentwise differences after dividing each vector by its own
// monitored signal.
double rms_relative_error(std::span<const std::uint64_t> shifted, std::span<const double> oracle,
                          NormSignal signal);

}  // namespace skan
