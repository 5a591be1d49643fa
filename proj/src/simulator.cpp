#include "skan/simulator.hpp"

namespace skan {

Neuron::Neuron(const NeuronParams& params) : Neuron(params, make_state(params)) {}

Neuron::Neuron(const NeuronParams& params, NeuronState state)
    : params_(params), norm_(NormConfig::from(params)), state_(std::move(state)) {
  params_.validate();
  if (state_.synapses.size() != params_.n_synapses)
    throw Error("neuron state has " + std::to_string(state_.synapses.size()) + " synapses, params say " +
                std::to_string(params_.n_synapses));
}

const StepEvents& Neuron::advance(std::span<const std::uint8_t> inputs) {
  norm_events_.clear();
  step(state_, inputs, params_, events_);
  switch (schedule_normalization(state_, events_, norm_)) {
    case NormAction::RightNow: {
      auto ev = right_shift_neuron(state_, norm_);
      right_shifts_ += ev.shifts;
      norm_events_.push_back(std::move(ev));
      if (state_.standby() && left_shift_wanted(state_, norm_)) {
        auto left = left_shift_neuron(state_, norm_);
        left_shifts_ += left.shifts;
        norm_events_.push_back(std::move(left));
      }
      break;
    }
    case NormAction::LeftAtStandby: {
      auto ev = left_shift_neuron(state_, norm_);
      left_shifts_ += ev.shifts;
      norm_events_.push_back(std::move(ev));
      break;
    }
    case NormAction::None:
      break;
  }
  return events_;
}

bool Neuron::inject_shift_pair() {
  if (!state_.standby()) return false;
  NormConfig forced = norm_;
  // Zeroing a weight here would not be undone by the left shift.
  if (forced.lsb_policy == LsbPolicy::DisableZeroed) forced.lsb_policy = LsbPolicy::ZeroedLsbHigh;
  auto right = right_shift_neuron(state_, forced);
  right_shifts_ += right.shifts;
  auto left = left_shift_neuron(state_, forced);
  left_shifts_ += left.shifts;
  return true;
}

}  // namespace skan
