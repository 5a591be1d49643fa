#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skan {

// One spike per channel at `offsets[c]` within a window of `window_len` steps.
struct PatternSpec {
  std::size_t n_channels = 0;
  std::vector<std::uint32_t> offsets;
  std::uint32_t window_len = 0;

  void validate() const;
  bool operator==(const PatternSpec&) const = default;
};

// Expected Poisson noise spikes per window, per channel. SNR 1:x is λ = x.
struct NoiseSpec {
  std::vector<double> lambda_per_channel;

  static NoiseSpec uniform(std::size_t n_channels, double lambda);
  static NoiseSpec quiet(std::size_t n_channels) { return uniform(n_channels, 0.0); }
  void validate() const;
};

using SpikeTimes = std::vector<std::vector<std::uint32_t>>;  // [channel] -> times

PatternSpec gen_pattern(std::size_t n_channels, std::uint32_t window_len, std::uint64_t seed);

// Per-channel Poisson(λ) counts with uniform times in [0, window_len).
// Times within a channel are sorted; duplicates are kept.
SpikeTimes gen_noise(const NoiseSpec& spec, std::uint32_t window_len, std::uint64_t seed);

struct Slot {
  int pattern = -1;  // index into the pattern list, -1 for a blank slot
  std::uint64_t start = 0;
};

struct ProgramSpec {
  std::size_t presentations = 0;
  std::size_t n_patterns = 1;
  std::uint32_t window_len = 32;
  // Steps after the window during which a response is still attributed to
  // the presentation. Must not exceed gap_min.
  std::uint32_t response_tail = 32;
  std::uint32_t gap_min = 32;
  std::uint32_t gap_max = 96;
  // Noise is a continuous Poisson process tiled in window-sized chunks over
  // the whole stream. When false it is drawn only inside presentation windows.
  bool noise_in_gaps = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Gap, window, gap, window, ... followed by a trailing gap.
struct StimulusProgram {
  ProgramSpec spec;
  std::vector<Slot> slots;
  std::uint64_t total_len = 0;

  std::uint64_t response_end(const Slot& slot) const {
    return slot.start + spec.window_len + spec.response_tail;
  }
};

// Presentation order is uniform over patterns and fully determined by the seed.
StimulusProgram make_program(const ProgramSpec& spec);

// Time-major binary raster.
class Raster {
 public:
  Raster() = default;
  Raster(std::uint64_t n_steps, std::size_t n_channels)
      : n_steps_(n_steps), n_channels_(n_channels), bits_(n_steps * n_channels, 0) {}

  std::uint64_t steps() const { return n_steps_; }
  std::size_t channels() const { return n_channels_; }
  std::span<const std::uint8_t> row(std::uint64_t t) const {
    return {bits_.data() + t * n_channels_, n_channels_};
  }
  std::uint8_t at(std::uint64_t t, std::size_t c) const { return bits_[t * n_channels_ + c]; }
  void set(std::uint64_t t, std::size_t c) { bits_[t * n_channels_ + c] = 1; }
  std::uint64_t count() const;
  std::uint64_t count_channel(std::size_t c) const;

  bool operator==(const Raster&) const = default;

 private:
  std::uint64_t n_steps_ = 0;
  std::size_t n_channels_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Adds Poisson noise tiled over [0, raster.steps()) in window-sized chunks.
void add_noise(Raster& raster, const NoiseSpec& noise, std::uint32_t window_len, std::uint64_t seed);

// Union of the scheduled target spikes and channel noise. Chunk (or window) k
// draws its noise from derive_seed(noise_seed, {k}).
Raster compose_stream(const StimulusProgram& program, std::span<const PatternSpec> patterns,
                      const NoiseSpec& noise, std::uint64_t noise_seed);

// Brightest first: t = round((255 - p) * t_max / 255).
std::uint32_t encode_latency(std::uint8_t intensity, std::uint32_t t_max);
std::vector<std::uint32_t> encode_latency(std::span<const std::uint8_t> image, std::uint32_t t_max);

// CSV of (timestep, channel) pairs.
std::string raster_to_csv(const Raster& raster);

}  // namespace skan
