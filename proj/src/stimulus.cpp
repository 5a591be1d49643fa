#include "skan/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "skan/neuron.hpp"
#include "skan/rng.hpp"

namespace skan {

void PatternSpec::validate() const {
  if (offsets.size() != n_channels) throw Error("pattern: offsets size does not match n_channels");
  if (window_len < 2) throw Error("pattern: window_len must be >= 2");
  for (auto o : offsets)
    if (o >= window_len) throw Error("pattern: offset " + std::to_string(o) + " outside window");
}

NoiseSpec NoiseSpec::uniform(std::size_t n_channels, double lambda) {
  return NoiseSpec{std::vector<double>(n_channels, lambda)};
}

void NoiseSpec::validate() const {
  for (double l : lambda_per_channel)
    if (!std::isfinite(l) || l < 0.0) throw Error("noise: lambda must be finite and >= 0");
}

PatternSpec gen_pattern(std::size_t n_channels, std::uint32_t window_len, std::uint64_t seed) {
  if (window_len < 2) throw Error("gen_pattern: window_len must be >= 2");
  PatternSpec p{n_channels, std::vector<std::uint32_t>(n_channels), window_len};
  std::mt19937_64 rng(derive_seed(seed, {0x9a77e12}));
  std::uniform_int_distribution<std::uint32_t> pick(0, window_len - 1);
  for (auto& o : p.offsets) o = pick(rng);
  return p;
}

SpikeTimes gen_noise(const NoiseSpec& spec, std::uint32_t window_len, std::uint64_t seed) {
  spec.validate();
  SpikeTimes out(spec.lambda_per_channel.size());
  if (window_len == 0) return out;
  std::mt19937_64 rng(derive_seed(seed, {0x2015e}));
  std::uniform_int_distribution<std::uint32_t> when(0, window_len - 1);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double lambda = spec.lambda_per_channel[c];
    if (lambda <= 0.0) continue;
    std::poisson_distribution<unsigned> count(lambda);
    const unsigned k = count(rng);
    auto& times = out[c];
    times.reserve(k);
    for (unsigned j = 0; j < k; ++j) times.push_back(when(rng));
    std::sort(times.begin(), times.end());
  }
  return out;
}

void ProgramSpec::validate() const {
  if (n_patterns == 0) throw Error("program: n_patterns must be >= 1");
  if (window_len < 2) throw Error("program: window_len must be >= 2");
  if (gap_min > gap_max) throw Error("program: gap_min > gap_max");
  if (response_tail > gap_min) throw Error("program: response_tail must not exceed gap_min");
}

StimulusProgram make_program(const ProgramSpec& spec) {
  spec.validate();
  StimulusProgram prog;
  prog.spec = spec;
  prog.slots.reserve(spec.presentations);
  std::mt19937_64 rng(derive_seed(spec.seed, {0x5c4ed}));
  std::uniform_int_distribution<std::uint32_t> gap(spec.gap_min, spec.gap_max);
  std::uniform_int_distribution<std::size_t> which(0, spec.n_patterns - 1);
  std::uint64_t t = gap(rng);
  for (std::size_t k = 0; k < spec.presentations; ++k) {
    const int pat = static_cast<int>(which(rng));
    prog.slots.push_back(Slot{pat, t});
    t += spec.window_len + gap(rng);
  }
  prog.total_len = t;
  return prog;
}

std::uint64_t Raster::count() const {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::uint64_t Raster::count_channel(std::size_t c) const {
  std::uint64_t n = 0;
  for (std::uint64_t t = 0; t < n_steps_; ++t) n += at(t, c);
  return n;
}

void add_noise(Raster& raster, const NoiseSpec& noise, std::uint32_t window_len, std::uint64_t seed) {
  if (noise.lambda_per_channel.size() != raster.channels())
    throw Error("noise spec width does not match raster");
  if (window_len == 0) throw Error("noise window must be >= 1");
  bool any = false;
  for (double l : noise.lambda_per_channel) any = any || l > 0.0;
  if (!any) return;
  const std::uint64_t chunks = (raster.steps() + window_len - 1) / window_len;
  for (std::uint64_t k = 0; k < chunks; ++k) {
    const auto spikes = gen_noise(noise, window_len, derive_seed(seed, {k}));
    const std::uint64_t base = k * window_len;
    for (std::size_t c = 0; c < spikes.size(); ++c)
      for (auto dt : spikes[c])
        if (base + dt < raster.steps()) raster.set(base + dt, c);
  }
}

Raster compose_stream(const StimulusProgram& program, std::span<const PatternSpec> patterns,
                      const NoiseSpec& noise, std::uint64_t noise_seed) {
  const std::size_t n = patterns.empty() ? noise.lambda_per_channel.size() : patterns.front().n_channels;
  for (const auto& p : patterns) {
    p.validate();
    if (p.n_channels != n) throw Error("compose_stream: patterns differ in channel count");
    if (p.window_len > program.spec.window_len)
      throw Error("compose_stream: pattern window longer than program window");
  }
  Raster raster(program.total_len, n);
  for (const auto& slot : program.slots) {
    if (slot.pattern < 0) continue;
    if (static_cast<std::size_t>(slot.pattern) >= patterns.size())
      throw Error("compose_stream: slot references missing pattern");
    const auto& p = patterns[static_cast<std::size_t>(slot.pattern)];
    for (std::size_t c = 0; c < n; ++c) raster.set(slot.start + p.offsets[c], c);
  }
  if (noise.lambda_per_channel.empty()) return raster;
  if (noise.lambda_per_channel.size() != n) throw Error("compose_stream: noise spec width does not match patterns");
  if (program.spec.noise_in_gaps) {
    add_noise(raster, noise, program.spec.window_len, noise_seed);
    return raster;
  }
  for (std::size_t k = 0; k < program.slots.size(); ++k) {
    const auto spikes = gen_noise(noise, program.spec.window_len, derive_seed(noise_seed, {k}));
    const std::uint64_t base = program.slots[k].start;
    for (std::size_t c = 0; c < n; ++c)
      for (auto dt : spikes[c]) raster.set(base + dt, c);
  }
  return raster;
}

std::uint32_t encode_latency(std::uint8_t intensity, std::uint32_t t_max) {
  if (t_max < 1) throw Error("encode_latency: t_max must be >= 1");
  const std::uint64_t num = std::uint64_t{255u - intensity} * t_max;
  return static_cast<std::uint32_t>((2 * num + 255) / 510);
}

std::vector<std::uint32_t> encode_latency(std::span<const std::uint8_t> image, std::uint32_t t_max) {
  std::vector<std::uint32_t> out(image.size());
  std::transform(image.begin(), image.end(), out.begin(),
                 [t_max](std::uint8_t p) { return encode_latency(p, t_max); });
  return out;
}

std::string raster_to_csv(const Raster& raster) {
  std::ostringstream os;
  os << "timestep,channel\n";
  for (std::uint64_t t = 0; t < raster.steps(); ++t)
    for (std::size_t c = 0; c < raster.channels(); ++c)
      if (raster.at(t, c)) os << t << ',' << c << '\n';
  return os.str();
}

}  // namespace skan
