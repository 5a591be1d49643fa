#include "skan/neuron.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <random>

namespace skan {

namespace {

constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; }

}  // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "Idle";
    case Phase::Rising: return "Rising";
    case Phase::Falling: return "Falling";
  }
  return "?";
}

const char* to_string(LsbPolicy p) {
  switch (p) {
    case LsbPolicy::AllLsbHigh: return "AllLsbHigh";
    case LsbPolicy::ZeroedLsbHigh: return "ZeroedLsbHigh";
    case LsbPolicy::DisableZeroed: return "DisableZeroed";
  }
  return "?";
}

const char* to_string(NormSignal s) { return s == NormSignal::MaxW ? "MaxW" : "SumW"; }

const char* to_string(SlopeInit s) { return s == SlopeInit::Uniform ? "Uniform" : "SeededRandom"; }

LsbPolicy parse_lsb_policy(const std::string& s) {
  if (s == "AllLsbHigh") return LsbPolicy::AllLsbHigh;
  if (s == "ZeroedLsbHigh") return LsbPolicy::ZeroedLsbHigh;
  if (s == "DisableZeroed") return LsbPolicy::DisableZeroed;
  throw Error("unknown lsb_policy '" + s + "'");
}

NormSignal parse_norm_signal(const std::string& s) {
  if (s == "MaxW") return NormSignal::MaxW;
  if (s == "SumW") return NormSignal::SumW;
  throw Error("unknown norm_signal '" + s + "'");
}

SlopeInit parse_slope_init(const std::string& s) {
  if (s == "Uniform") return SlopeInit::Uniform;
  if (s == "SeededRandom") return SlopeInit::SeededRandom;
  throw Error("unknown dr_init_policy '" + s + "'");
}

unsigned NeuronParams::weight_register_bits() const {
  if (norm_signal == NormSignal::MaxW) return bit_width;
  return bit_width + static_cast<unsigned>(std::bit_width(n_synapses - 1));
}

void NeuronParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid neuron params: ") + what);
  };
  require(n_synapses >= 1, "n_synapses must be >= 1");
  require(bit_width >= 2 && bit_width <= 40, "bit_width must be in [2, 40]");
  require(slope_frac_bits <= 16, "slope_frac_bits must be <= 16");
  require(w_rise >= 1, "w_rise must be >= 1");
  require(w_fall >= 1, "w_fall must be >= 1");
  require(slope_step >= 1, "slope_step must be >= 1");
  require(theta_rise >= 1, "theta_rise must be >= 1");
  require(theta_fall >= 1, "theta_fall must be >= 1");
  require(slope_min > 0 && slope_min <= slope_max, "need 0 < slope_min <= slope_max");
  require(theta_min >= 1, "theta_min must be >= 1");
  require(theta_init >= theta_min, "theta_init must be >= theta_min");
  require(w_init >= 1 && w_init <= weight_limit(), "w_init must be in [1, 2^b - 1]");
  require(w_rise <= (weight_limit() >> 1) + 1, "w_rise must not exceed half the weight range");
  if (dr_init_policy == SlopeInit::Uniform)
    require(dr_init >= slope_min && dr_init <= slope_max, "dr_init must lie in [slope_min, slope_max]");
}

bool NeuronState::standby() const {
  if (sum_r != 0) return false;
  return std::all_of(synapses.begin(), synapses.end(),
                     [](const SynapseState& syn) { return syn.phase == Phase::Idle; });
}

void StepEvents::clear() {
  output_falling = membrane_zeroed = output_rising = weight_overflow = false;
  rose.clear();
  fell.clear();
  zeroed.clear();
}

NeuronState make_state(const NeuronParams& params) {
  params.validate();
  NeuronState state;
  state.synapses.resize(params.n_synapses);
  std::mt19937_64 rng(params.dr_seed);
  std::uniform_int_distribution<std::uint64_t> slope(params.slope_min, params.slope_max);
  for (auto& syn : state.synapses) {
    syn.w = params.w_init;
    syn.dr = params.dr_init_policy == SlopeInit::Uniform ? params.dr_init : slope(rng);
  }
  state.theta = params.theta_init;
  return state;
}

void apply_stdp_rise(NeuronState& state, const NeuronParams& params, StepEvents& events) {
  const std::uint64_t limit = params.weight_limit();
  const std::uint64_t cap = (limit << 1) | 1;
  for (std::size_t i = 0; i < state.synapses.size(); ++i) {
    auto& syn = state.synapses[i];
    if (!syn.d_flag) continue;
    syn.d_flag = false;
    if (!params.adaptive_weights) continue;
    syn.w = std::min(syn.w + params.w_rise, cap);
    events.rose.push_back(i);
    if (syn.w > limit) events.weight_overflow = true;
  }
}

void apply_stdp_fall(NeuronState& state, const NeuronParams& params, StepEvents& events) {
  for (std::size_t i = 0; i < state.synapses.size(); ++i) {
    auto& syn = state.synapses[i];
    if (!syn.d_flag) continue;
    syn.d_flag = false;
    if (!params.adaptive_weights) continue;
    syn.w = syn.w > params.w_fall ? syn.w - params.w_fall : 0;
    events.fell.push_back(i);
    if (syn.w == 0) {
      events.zeroed.push_back(i);
      if (params.lsb_policy == LsbPolicy::DisableZeroed) {
        syn.enabled = false;
        syn.r = 0;
        syn.phase = Phase::Idle;
      }
    }
  }
}

void step(NeuronState& state, std::span<const std::uint8_t> inputs, const NeuronParams& params,
          StepEvents& events) {
  if (inputs.size() != state.synapses.size())
    throw Error("input width " + std::to_string(inputs.size()) + " does not match synapse count " +
                std::to_string(state.synapses.size()));
  events.clear();
  const unsigned f = params.slope_frac_bits;

  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < state.synapses.size(); ++i) {
    auto& syn = state.synapses[i];
    if (!syn.enabled) continue;
    if (inputs[i] && syn.phase == Phase::Idle) {
      syn.phase = Phase::Rising;
      syn.d_flag = true;
    }
    const std::uint64_t inc = slope_step_int(syn.dr, f);
    if (syn.phase == Phase::Rising) {
      syn.r = std::min(syn.r + inc, syn.w);
      if (syn.r >= syn.w) syn.phase = syn.w == 0 ? Phase::Idle : Phase::Falling;
    } else if (syn.phase == Phase::Falling) {
      syn.r = syn.r > inc ? syn.r - inc : 0;
      if (syn.r == 0) syn.phase = Phase::Idle;
    }
    sum += syn.r;
  }
  state.sum_r = sum;
  state.s = sum > state.theta;

  if (state.s) {
    state.theta = sat_add(state.theta, params.theta_rise);
    for (auto& syn : state.synapses) {
      if (syn.phase == Phase::Rising) {
        syn.dr = std::min(syn.dr + params.slope_step, params.slope_max);
      } else if (syn.phase == Phase::Falling) {
        syn.dr = syn.dr > params.slope_min + params.slope_step ? syn.dr - params.slope_step
                                                               : params.slope_min;
      }
    }
  }

  events.output_rising = !state.prev_s && state.s;
  events.output_falling = state.prev_s && !state.s;
  events.membrane_zeroed = state.prev_sum_r > 0 && sum == 0;
  if (events.output_falling) apply_stdp_rise(state, params, events);
  if (events.membrane_zeroed) {
    apply_stdp_fall(state, params, events);
    state.theta = state.theta > params.theta_min + params.theta_fall ? state.theta - params.theta_fall
                                                                     : params.theta_min;
  }

  state.prev_s = state.s;
  state.prev_sum_r = sum;
  ++state.t;
}

}  // namespace skan
