#include <doctest.h>

#include <cmath>

#include "skan/neuron.hpp"
#include "skan/stats.hpp"
#include "skan/stimulus.hpp"

using namespace skan;

TEST_CASE("gen_pattern is deterministic and in range") {
  const auto a = gen_pattern(16, 32, 5), b = gen_pattern(16, 32, 5);
  CHECK(a == b);
  for (auto o : a.offsets) CHECK(o < 32);
  const auto one = gen_pattern(1, 10, 3);
  REQUIRE(one.offsets.size() == 1);
  CHECK(one.offsets[0] < 10);
  CHECK_THROWS_AS(gen_pattern(4, 1, 0), Error);
}

TEST_CASE("distinct seeds give distinct patterns") {
  int same = 0;
  for (std::uint64_t k = 0; k < 100; ++k)
    if (gen_pattern(16, 32, 2 * k) == gen_pattern(16, 32, 2 * k + 1)) ++same;
  CHECK(same == 0);
}

TEST_CASE("zero noise is empty") {
  const auto s = gen_noise(NoiseSpec::quiet(4), 32, 1);
  for (const auto& ch : s) CHECK(ch.empty());
}

TEST_CASE("noise counts follow the rate and channels are independent") {
  const NoiseSpec spec{{2.0, 2.0}};
  std::vector<double> c0, c1;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const auto s = gen_noise(spec, 32, k);
    c0.push_back(static_cast<double>(s[0].size()));
    c1.push_back(static_cast<double>(s[1].size()));
    for (const auto& ch : s)
      for (auto t : ch) REQUIRE(t < 32);
  }
  CHECK(std::abs(mean(c0) - 2.0) < 0.04);
  CHECK(std::abs(mean(c1) - 2.0) < 0.04);
  CHECK(std::abs(pearson(c0, c1)) < 0.05);
}

TEST_CASE("noise is deterministic in the seed") {
  const NoiseSpec spec{{0.5, 1.5, 3.0}};
  CHECK(gen_noise(spec, 64, 9) == gen_noise(spec, 64, 9));
  CHECK_THROWS_AS(gen_noise(NoiseSpec{{-1.0}}, 8, 0), Error);
}

TEST_CASE("program schedule is deterministic and non-overlapping") {
  ProgramSpec ps;
  ps.presentations = 200;
  ps.n_patterns = 2;
  ps.window_len = 32;
  ps.response_tail = 16;
  ps.gap_min = 32;
  ps.gap_max = 96;
  ps.seed = 3;
  const auto a = make_program(ps), b = make_program(ps);
  REQUIRE(a.slots.size() == 200);
  int counts[2] = {0, 0};
  for (std::size_t k = 0; k < a.slots.size(); ++k) {
    CHECK(a.slots[k].start == b.slots[k].start);
    CHECK(a.slots[k].pattern == b.slots[k].pattern);
    ++counts[a.slots[k].pattern];
    if (k > 0) {
      const auto gap = a.slots[k].start - (a.slots[k - 1].start + ps.window_len);
      CHECK(gap >= ps.gap_min);
      CHECK(gap <= ps.gap_max);
    }
  }
  CHECK(counts[0] > 60);
  CHECK(counts[1] > 60);
  CHECK(a.total_len >= a.slots.back().start + ps.window_len + ps.gap_min);
  ps.response_tail = 40;
  CHECK_THROWS_AS(make_program(ps), Error);
}

TEST_CASE("noise-free stream carries exactly one spike per channel per presentation") {
  ProgramSpec ps;
  ps.presentations = 3;
  ps.window_len = 16;
  ps.response_tail = 8;
  ps.gap_min = 16;
  ps.gap_max = 48;
  const auto prog = make_program(ps);
  const std::vector<PatternSpec> pats{gen_pattern(5, 16, 1)};
  const auto r = compose_stream(prog, pats, NoiseSpec::quiet(5), 0);
  for (std::size_t c = 0; c < 5; ++c) CHECK(r.count_channel(c) == 3);
  for (const auto& slot : prog.slots)
    for (std::size_t c = 0; c < 5; ++c) CHECK(r.at(slot.start + pats[0].offsets[c], c) == 1);
}

TEST_CASE("empty program gives an all-zero raster when noise is confined to windows") {
  ProgramSpec ps;
  ps.presentations = 0;
  ps.noise_in_gaps = false;
  const auto prog = make_program(ps);
  const std::vector<PatternSpec> pats{gen_pattern(4, 32, 1)};
  const auto r = compose_stream(prog, pats, NoiseSpec::uniform(4, 1.0), 0);
  CHECK(r.count() == 0);
}

TEST_CASE("target and noise in the same cell collapse to one spike") {
  Raster r(10, 2);
  r.set(3, 1);
  r.set(3, 1);
  CHECK(r.count() == 1);
  CHECK(r.at(3, 1) == 1);
}

TEST_CASE("noise is tiled over gaps by default and confined to windows on request") {
  ProgramSpec ps;
  ps.presentations = 20;
  ps.window_len = 32;
  ps.response_tail = 8;
  ps.gap_min = 64;
  ps.gap_max = 64;
  const std::vector<PatternSpec> pats{gen_pattern(4, 32, 1)};
  auto in_window = [&](const StimulusProgram& prog, std::uint64_t t) {
    for (const auto& s : prog.slots)
      if (t >= s.start && t < s.start + ps.window_len) return true;
    return false;
  };
  const auto tiled_prog = make_program(ps);
  const auto tiled = compose_stream(tiled_prog, pats, NoiseSpec::uniform(4, 2.0), 7);
  std::size_t gap_spikes = 0;
  for (std::uint64_t t = 0; t < tiled.steps(); ++t)
    for (std::size_t c = 0; c < 4; ++c)
      if (tiled.at(t, c) && !in_window(tiled_prog, t)) ++gap_spikes;
  CHECK(gap_spikes > 0);

  ps.noise_in_gaps = false;
  const auto win_prog = make_program(ps);
  const auto windowed = compose_stream(win_prog, pats, NoiseSpec::uniform(4, 2.0), 7);
  for (std::uint64_t t = 0; t < windowed.steps(); ++t)
    for (std::size_t c = 0; c < 4; ++c)
      if (windowed.at(t, c)) CHECK(in_window(win_prog, t));
  CHECK(compose_stream(win_prog, pats, NoiseSpec::uniform(4, 2.0), 7) == windowed);
}

TEST_CASE("latency code") {
  CHECK(encode_latency(255, 31) == 0);
  CHECK(encode_latency(0, 31) == 31);
  CHECK(encode_latency(128, 255) == 127);
  std::uint32_t prev = 0;
  for (int p = 255; p >= 0; --p) {
    const auto t = encode_latency(static_cast<std::uint8_t>(p), 63);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("raster CSV lists (timestep, channel) pairs") {
  Raster r(5, 3);
  r.set(1, 2);
  r.set(4, 0);
  CHECK(raster_to_csv(r) == "timestep,channel\n1,2\n4,0\n");
}
