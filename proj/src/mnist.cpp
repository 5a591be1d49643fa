#include "skan/mnist.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <random>

#include "skan/neuron.hpp"
#include "skan/rng.hpp"

namespace skan {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void check_magic(std::span<const std::uint8_t> b, std::uint32_t want, const char* what) {
  if (b.size() < 4) throw Error(std::string(what) + ": file too short for an IDX header");
  const std::uint32_t got = read_be32(b, 0);
  if (got != want) throw Error(std::string(what) + ": bad magic " + hex32(got) + ", expected " + hex32(want));
}

void check_length(std::size_t expected, std::size_t actual, const char* what) {
  if (actual < expected)
    throw Error(std::string(what) + ": truncated payload, expected " + std::to_string(expected) + " bytes, got " +
                std::to_string(actual));
}

}  // namespace

std::vector<std::uint8_t> maybe_gunzip(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 0x1f || bytes[1] != 0x8b) return {bytes.begin(), bytes.end()};
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw Error("gzip: inflateInit failed");
  std::unique_ptr<z_stream, decltype(&inflateEnd)> guard(&zs, inflateEnd);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> chunk;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = chunk.size();
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) throw Error("gzip: corrupt stream (zlib code " + std::to_string(rc) + ")");
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) throw Error("gzip: truncated stream");
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* digits = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

ImageSet parse_idx_images(std::span<const std::uint8_t> image_bytes) {
  const auto raw = maybe_gunzip(image_bytes);
  check_magic(raw, kIdxImageMagic, "idx images");
  check_length(16, raw.size(), "idx images header");
  ImageSet set;
  const std::size_t count = read_be32(raw, 4);
  set.rows = read_be32(raw, 8);
  set.cols = read_be32(raw, 12);
  const std::size_t payload = count * set.rows * set.cols;
  check_length(16 + payload, raw.size(), "idx images");
  set.pixels.assign(raw.begin() + 16, raw.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  set.labels.assign(count, 0);
  set.checksum = sha256_hex(raw);
  return set;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> label_bytes) {
  const auto raw = maybe_gunzip(label_bytes);
  check_magic(raw, kIdxLabelMagic, "idx labels");
  check_length(8, raw.size(), "idx labels header");
  const std::size_t count = read_be32(raw, 4);
  check_length(8 + count, raw.size(), "idx labels");
  return {raw.begin() + 8, raw.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

ImageSet parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes) {
  ImageSet set = parse_idx_images(image_bytes);
  auto labels = parse_idx_labels(label_bytes);
  if (labels.size() != set.size())
    throw Error("idx: " + std::to_string(set.size()) + " images but " + std::to_string(labels.size()) + " labels");
  set.labels = std::move(labels);
  return set;
}

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + set.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(set.size()));
  write_be32(out, static_cast<std::uint32_t>(set.rows));
  write_be32(out, static_cast<std::uint32_t>(set.cols));
  out.insert(out.end(), set.pixels.begin(), set.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const ImageSet& set) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(set.size()));
  out.insert(out.end(), set.labels.begin(), set.labels.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageSet load_mnist(const std::filesystem::path& dir, const std::string& split) {
  auto find = [&](const std::string& stem) {
    for (const char* ext : {"", ".gz"}) {
      auto p = dir / (stem + ext);
      if (std::filesystem::exists(p)) return p;
    }
    throw Error("MNIST file " + (dir / stem).string() + "[.gz] not found; run `skan fetch-data --dir " +
                dir.string() + "` or set SKAN_MNIST_DIR");
  };
  const auto images = read_file(find(split + "-images-idx3-ubyte"));
  const auto labels = read_file(find(split + "-labels-idx1-ubyte"));
  return parse_idx(images, labels);
}

ImageSet filter_label(const ImageSet& set, int digit) {
  ImageSet out;
  out.rows = set.rows;
  out.cols = set.cols;
  out.checksum = set.checksum;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.labels[i] != digit) continue;
    const auto img = set.image(i);
    out.pixels.insert(out.pixels.end(), img.begin(), img.end());
    out.labels.push_back(set.labels[i]);
  }
  return out;
}

void CorruptionMap::validate(std::size_t n_pixels) const {
  if (pixels.size() != lambdas.size()) throw Error("corruption map: pixels and lambdas differ in length");
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] >= n_pixels) throw Error("corruption map: pixel " + std::to_string(pixels[i]) + " out of range");
    if (i && pixels[i] <= pixels[i - 1]) throw Error("corruption map: pixels must be sorted and unique");
    if (!std::isfinite(lambdas[i]) || lambdas[i] < 0) throw Error("corruption map: bad lambda");
  }
}

CorruptionMap make_corruption_map(std::size_t n_pixels, std::size_t count, double lambda_lo, double lambda_hi,
                                  std::uint64_t seed) {
  if (count > n_pixels) throw Error("corruption map: more corrupted pixels than pixels");
  if (!(lambda_lo < lambda_hi) || lambda_lo < 0) throw Error("corruption map: need 0 <= lambda_lo < lambda_hi");
  std::mt19937_64 rng(derive_seed(seed, {0xc0aa}));
  std::vector<std::size_t> all(n_pixels);
  for (std::size_t i = 0; i < n_pixels; ++i) all[i] = i;
  // Partial Fisher-Yates with a portable index draw.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_pixels - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  CorruptionMap map;
  map.pixels.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(map.pixels.begin(), map.pixels.end());
  std::uniform_real_distribution<double> lam(lambda_lo, lambda_hi);
  for (std::size_t i = 0; i < count; ++i) {
    double l = lam(rng);
    while (l <= lambda_lo) l = lam(rng);
    map.lambdas.push_back(l);
  }
  return map;
}

Raster encode_image(std::span<const std::uint8_t> image, const CorruptionMap& map, std::uint32_t window,
                    std::uint64_t seed, std::uint32_t latency_span) {
  if (window < 2) throw Error("encode_image: window must be >= 2");
  if (latency_span == 0) latency_span = window;
  if (latency_span < 2 || latency_span > window)
    throw Error("encode_image: latency_span must lie in [2, window]");
  Raster raster(window, image.size());
  const std::uint32_t t_max = latency_span - 1;
  for (std::size_t p = 0; p < image.size(); ++p) raster.set(encode_latency(image[p], t_max), p);
  if (map.pixels.empty()) return raster;
  NoiseSpec noise = NoiseSpec::quiet(map.pixels.size());
  noise.lambda_per_channel = map.lambdas;
  const auto spikes = gen_noise(noise, window, seed);
  for (std::size_t k = 0; k < map.pixels.size(); ++k)
    for (auto t : spikes[k]) raster.set(t, map.pixels[k]);
  return raster;
}

std::vector<Raster> corrupt_pixels(const ImageSet& set, const CorruptionMap& map, std::uint64_t seed,
                                   std::uint32_t window, std::uint32_t latency_span) {
  map.validate(set.image_size());
  std::vector<Raster> out(set.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < set.size(); ++i) out[i] = encode_image(set.image(i), map, window, derive_seed(seed, {i}), latency_span);
  return out;
}

}  // namespace skan
