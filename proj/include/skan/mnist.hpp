#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skan/stimulus.hpp"

namespace skan {

// Row-major 8-bit images, all the same size.
struct ImageSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
  std::vector<std::uint8_t> labels;
  std::string checksum;              // sha256 of the decompressed image payload

  std::size_t size() const { return labels.size(); }
  std::size_t image_size() const { return rows * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * image_size(), image_size()};
  }
};

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Inflates gzip input; anything else is returned unchanged.
std::vector<std::uint8_t> maybe_gunzip(std::span<const std::uint8_t> bytes);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Both accept raw or gzip IDX bytes.
ImageSet parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes);
ImageSet parse_idx_images(std::span<const std::uint8_t> image_bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> label_bytes);

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& set);
std::vector<std::uint8_t> serialize_idx_labels(const ImageSet& set);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Looks for `<split>-images-idx3-ubyte[.gz]` and the matching labels file.
// `split` is "train" or "t10k".
ImageSet load_mnist(const std::filesystem::path& dir, const std::string& split);

ImageSet filter_label(const ImageSet& set, int digit);

struct CorruptionMap {
  std::vector<std::size_t> pixels;  // sorted, unique
  std::vector<double> lambdas;      // same order as pixels

  void validate(std::size_t n_pixels) const;
};

// `count` distinct pixels, each with λ drawn uniformly from the open
// interval (lambda_lo, lambda_hi).
CorruptionMap make_corruption_map(std::size_t n_pixels, std::size_t count, double lambda_lo, double lambda_hi,
                                  std::uint64_t seed);

// One image as a raster of `window` steps: every pixel spikes once at its
// latency (t_max = latency_span - 1), corrupted pixels add Poisson noise over
// the whole window. latency_span = 0 means the full window.
Raster encode_image(std::span<const std::uint8_t> image, const CorruptionMap& map, std::uint32_t window,
                    std::uint64_t seed, std::uint32_t latency_span = 0);

std::vector<Raster> corrupt_pixels(const ImageSet& set, const CorruptionMap& map, std::uint64_t seed,
                                   std::uint32_t window, std::uint32_t latency_span = 0);

}  // namespace skan
