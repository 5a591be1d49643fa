#include "skan/homeostasis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace skan {

NormConfig NormConfig::from(const NeuronParams& params) {
  NormConfig cfg;
  cfg.bit_width = params.bit_width;
  cfg.signal = params.norm_signal;
  cfg.lsb_policy = params.lsb_policy;
  cfg.sum_register_bits =
      params.bit_width + static_cast<unsigned>(std::bit_width(params.n_synapses - 1));
  cfg.slope_min = params.slope_min;
  cfg.slope_max = params.slope_max;
  cfg.theta_min = params.theta_min;
  return cfg;
}

std::uint64_t NormConfig::weight_limit() const {
  // Under SumW a single weight may legitimately hold the whole sum.
  return signal == NormSignal::MaxW ? signal_limit() : (std::uint64_t{1} << sum_register_bits) - 1;
}

std::uint64_t monitored_signal(const NeuronState& state, NormSignal signal) {
  std::uint64_t acc = 0;
  for (const auto& syn : state.synapses) {
    if (!syn.enabled) continue;
    acc = signal == NormSignal::MaxW ? std::max(acc, syn.w) : acc + syn.w;
  }
  return acc;
}

bool overflowed(const NeuronState& state, const NormConfig& cfg) {
  const std::uint64_t wl = cfg.weight_limit();
  for (const auto& syn : state.synapses)
    if (syn.enabled && syn.w > wl) return true;
  return monitored_signal(state, cfg.signal) > cfg.signal_limit();
}

bool left_shift_wanted(const NeuronState& state, const NormConfig& cfg) {
  const std::uint64_t sig = monitored_signal(state, cfg.signal);
  return sig > 0 && sig < cfg.half_range();
}

NormEvent right_shift_neuron(NeuronState& state, const NormConfig& cfg) {
  NormEvent ev;
  ev.direction = ShiftDirection::Right;
  ev.trigger = ShiftTrigger::Overflow;
  ev.timestep = state.t;

  std::vector<bool> was_live(state.synapses.size());
  for (std::size_t i = 0; i < state.synapses.size(); ++i) was_live[i] = state.synapses[i].w != 0;

  do {
    for (auto& syn : state.synapses) {
      if (!syn.enabled) continue;
      syn.w >>= 1;
      syn.dr = std::max(syn.dr >> 1, cfg.slope_min);
      if (syn.phase == Phase::Idle) continue;
      // An active kernel keeps a nonzero height so its membrane edge still fires.
      syn.r = std::max<std::uint64_t>(syn.r >> 1, 1);
    }
    state.theta = std::max(state.theta >> 1, cfg.theta_min);
    ++ev.shifts;
  } while (overflowed(state, cfg) && ev.shifts < cfg.signal_bits());

  for (std::size_t i = 0; i < state.synapses.size(); ++i) {
    auto& syn = state.synapses[i];
    if (!syn.enabled) continue;
    // Only weights this shift took to zero count; a weight already at zero
    // stays there under ZeroedLsbHigh.
    const bool zero = syn.w == 0 && was_live[i];
    if (zero) ev.zeroed_synapses.push_back(i);
    switch (cfg.lsb_policy) {
      case LsbPolicy::AllLsbHigh:
        syn.w |= 1;
        break;
      case LsbPolicy::ZeroedLsbHigh:
        if (zero) syn.w = 1;
        break;
      case LsbPolicy::DisableZeroed:
        if (zero) syn = SynapseState{.w = 0, .r = 0, .dr = syn.dr, .phase = Phase::Idle,
                                     .d_flag = false, .enabled = false};
        break;
    }
  }

  std::uint64_t sum = 0;
  for (const auto& syn : state.synapses) sum += syn.r;
  state.sum_r = sum;
  state.prev_sum_r = sum;
  return ev;
}

NormEvent left_shift_neuron(NeuronState& state, const NormConfig& cfg) {
  if (!state.standby())
    throw Error("left shift requested while kernels are in flight (t=" + std::to_string(state.t) + ")");
  NormEvent ev;
  ev.direction = ShiftDirection::Left;
  ev.trigger = ShiftTrigger::StandbyMsbLow;
  ev.timestep = state.t;

  const std::uint64_t wl = cfg.weight_limit();
  const std::uint64_t theta_cap = std::uint64_t{1} << 62;
  while (left_shift_wanted(state, cfg) && ev.shifts < cfg.signal_bits()) {
    for (auto& syn : state.synapses) {
      if (!syn.enabled) continue;
      syn.w = std::min(syn.w << 1, wl);
      syn.dr = std::min(syn.dr << 1, cfg.slope_max);
    }
    state.theta = std::min(state.theta << 1, theta_cap);
    ++ev.shifts;
  }
  return ev;
}

NormAction schedule_normalization(const NeuronState& state, const StepEvents& events,
                                  const NormConfig& cfg) {
  if (events.weight_overflow || overflowed(state, cfg)) return NormAction::RightNow;
  if (state.standby() && left_shift_wanted(state, cfg)) return NormAction::LeftAtStandby;
  return NormAction::None;
}

std::vector<double> normalize_oracle(std::span<const double> weights, NormSignal signal,
                                     double reference) {
  double sig = 0.0;
  for (double w : weights) sig = signal == NormSignal::MaxW ? std::max(sig, w) : sig + w;
  if (!(sig > 0.0)) throw Error("normalize_oracle: weight vector has no positive entry");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w = w / sig * reference;
  return out;
}

double rms_relative_error(std::span<const std::uint64_t> shifted, std::span<const double> oracle,
                          NormSignal signal) {
  if (shifted.size() != oracle.size())
    throw Error("rms_relative_error: length mismatch " + std::to_string(shifted.size()) + " vs " +
                std::to_string(oracle.size()));
  if (shifted.empty()) return 0.0;
  std::vector<double> a(shifted.begin(), shifted.end());
  const auto ra = normalize_oracle(a, signal);
  const auto rb = normalize_oracle(oracle, signal);
  double acc = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) acc += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return std::sqrt(acc / static_cast<double>(ra.size()));
}

}  // namespace skan
