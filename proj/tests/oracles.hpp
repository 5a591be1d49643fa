#pragma once

// Reference implementations shared by the unit tests and the acceptance
// binary. They are written from the rules directly and never call the
// simulator.

#include <cstdint>
#include <random>
#include <vector>

#include "skan/neuron.hpp"

namespace skan::oracle {

struct KernelCase {
  std::uint64_t w = 0;
  std::uint64_t dr = 0;
  unsigned frac_bits = 0;
  std::vector<std::uint8_t> spikes;  // one entry per step
};

// Closed-form ramp: a trigger at step t0 gives r = min(k*inc, w) for the
// k-th step of the rise, then w - j*inc (floored at 0) on the way down.
// Spikes during an active kernel are ignored.
inline std::vector<std::uint64_t> kernel_trace(const KernelCase& c) {
  const std::uint64_t inc = std::max<std::uint64_t>(1, c.dr >> c.frac_bits);
  const std::uint64_t up = (c.w + inc - 1) / inc;
  const std::uint64_t down = (c.w + inc - 1) / inc;
  std::vector<std::uint64_t> r(c.spikes.size(), 0);
  std::int64_t trigger = -1;
  for (std::size_t t = 0; t < c.spikes.size(); ++t) {
    if (trigger >= 0) {
      const auto k = static_cast<std::uint64_t>(static_cast<std::int64_t>(t) - trigger) + 1;
      if (k > up + down) trigger = -1;
    }
    if (trigger < 0 && c.spikes[t]) trigger = static_cast<std::int64_t>(t);
    if (trigger < 0) continue;
    const auto k = static_cast<std::uint64_t>(static_cast<std::int64_t>(t) - trigger) + 1;
    if (k <= up) {
      r[t] = std::min(k * inc, c.w);
    } else {
      const std::uint64_t j = k - up;
      r[t] = c.w > j * inc ? c.w - j * inc : 0;
    }
  }
  return r;
}

inline KernelCase random_kernel_case(std::mt19937_64& rng) {
  KernelCase c;
  c.frac_bits = static_cast<unsigned>(rng() % 9);
  c.w = 1 + rng() % 65535;
  const std::uint64_t steps = 1 + rng() % 64;  // target ramp duration
  c.dr = std::max<std::uint64_t>(1, (c.w << c.frac_bits) / steps + rng() % (1u << c.frac_bits));
  const std::size_t len = 64 + rng() % 256;
  const double p = std::uniform_real_distribution<double>(0.005, 0.2)(rng);
  std::bernoulli_distribution spike(p);
  c.spikes.resize(len);
  for (auto& s : c.spikes) s = spike(rng) ? 1 : 0;
  return c;
}

}  // namespace skan::oracle
