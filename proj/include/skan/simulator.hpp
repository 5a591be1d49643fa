#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skan/homeostasis.hpp"
#include "skan/neuron.hpp"

namespace skan {

// A neuron plus its homeostasis: every advance runs one `step`, then any
// right shift the step's overflow demands, then standby left shifts.
class Neuron {
 public:
  explicit Neuron(const NeuronParams& params);
  Neuron(const NeuronParams& params, NeuronState state);

  const StepEvents& advance(std::span<const std::uint8_t> inputs);

  // Forces a right shift followed by a left shift. Only valid in standby;
  // returns false (and does nothing) otherwise.
  bool inject_shift_pair();

  const NeuronState& state() const { return state_; }
  const NeuronParams& params() const { return params_; }
  const NormConfig& norm() const { return norm_; }
  const StepEvents& events() const { return events_; }
  // Normalization events emitted by the most recent advance.
  const std::vector<NormEvent>& norm_events() const { return norm_events_; }
  std::uint64_t right_shifts() const { return right_shifts_; }
  std::uint64_t left_shifts() const { return left_shifts_; }

 private:
  NeuronParams params_;
  NormConfig norm_;
  NeuronState state_;
  StepEvents events_;
  std::vector<NormEvent> norm_events_;
  std::uint64_t right_shifts_ = 0;
  std::uint64_t left_shifts_ = 0;
};

}  // namespace skan
