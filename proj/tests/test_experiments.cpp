#include <doctest.h>

#include <stdexcept>

#include "skan/experiments.hpp"
#include "skan/stats.hpp"

using namespace skan;

TEST_CASE("fan_out visits every index and rethrows the lowest failure") {
  std::vector<int> hit(100, 0);
  fan_out(hit.size(), Parallelism{false, 4}, [&](std::size_t i) { hit[i] = static_cast<int>(i) + 1; });
  for (std::size_t i = 0; i < hit.size(); ++i) CHECK(hit[i] == static_cast<int>(i) + 1);
  try {
    fan_out(50, Parallelism{false, 4}, [&](std::size_t i) {
      if (i == 17 || i == 31) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "fail 17");
  }
}

TEST_CASE("norm error: parallel fan-out is bit-identical to the serial run") {
  NormErrorConfig c;
  c.bit_widths = {4, 8};
  c.seeds = 4;
  c.updates = 2000;
  const auto a = run_norm_error(c, Parallelism::serial_only());
  const auto b = run_norm_error(c, Parallelism{false, 4});
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 2 * c.policies.size() * 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bit_width == b[i].bit_width);
    CHECK(a[i].policy == b[i].policy);
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].rms_error == b[i].rms_error);
    CHECK(a[i].spearman == b[i].spearman);
    CHECK(a[i].right_shifts == b[i].right_shifts);
  }
}

TEST_CASE("sweep: parallel fan-out is bit-identical to the serial run") {
  auto c = fig7_preset(NormSignal::MaxW, {0.0, 1.0});
  c.seeds = 3;
  c.presentations = 300;
  c.burn_in = 150;
  const auto a = run_noise_sweep(c, Parallelism::serial_only());
  const auto b = run_noise_sweep(c, Parallelism{false, 4});
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].mean_weight == b.points[i].mean_weight);
    CHECK(a.points[i].per_seed == b.points[i].per_seed);
    CHECK(a.points[i].fire_rate == b.points[i].fire_rate);
  }
  CHECK(a.traces == b.traces);
}

TEST_CASE("recognition: parallel fan-out is bit-identical and scoring partitions targets") {
  auto c = fig9_preset(fig9_preset_names().front());
  c.noisy_counts = {8};
  c.snr_grid = {0.0, 2.0};
  c.seeds = 2;
  c.presentations = 200;
  c.learning = 50;
  const auto a = run_recognition(c, Parallelism::serial_only());
  const auto b = run_recognition(c, Parallelism{false, 4});
  REQUIRE(a.size() == c.conditions().size());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].error == b[i].error);
    CHECK(a[i].detected == b[i].detected);
    CHECK(a[i].false_positives == b[i].false_positives);
    CHECK(a[i].missed + a[i].detected == a[i].targets);
    CHECK(a[i].error >= 0.0);
    if (!a[i].condition.adaptive) {
      CHECK(a[i].disabled_noisy == 0);
      CHECK(a[i].disabled_clean == 0);
    }
  }
  const auto sum = summarize(a);
  CHECK(sum.size() == 2 * 2);
}

TEST_CASE("recognition conditions cover the grid with both arms") {
  RecognitionConfig c;
  c.noisy_counts = {2, 8};
  c.snr_grid = {0.0, 1.0, 4.0};
  c.seeds = 3;
  const auto conds = c.conditions();
  CHECK(conds.size() == 2 * 3 * 2 * 3);
  std::size_t adaptive = 0;
  for (const auto& k : conds) {
    adaptive += k.adaptive;
    CHECK(k.noisy_channels.size() <= c.channels);
  }
  CHECK(adaptive == conds.size() / 2);
}

TEST_CASE("static simulation keeps its weights") {
  auto c = fig3_preset(1);
  c.program.presentations = 20;
  const auto t = run_simulation(c);
  REQUIRE(t.presentations.size() == 20);
  for (const auto& p : t.presentations) CHECK(p.weights == t.presentations.front().weights);
}

TEST_CASE("simulation is deterministic") {
  auto c = fig3_preset(4);
  c.program.presentations = 30;
  const auto a = run_simulation(c), b = run_simulation(c);
  CHECK(a.onsets == b.onsets);
  CHECK(a.final_state == b.final_state);
}

TEST_CASE("MNIST run on synthetic zeros without corruption disables nothing") {
  ImageSet set;
  set.rows = 8;
  set.cols = 8;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t p = 0; p < 64; ++p) {
      const std::size_t r = p / 8, c = p % 8;
      const bool ring = (r == 1 || r == 6 || c == 1 || c == 6) && r >= 1 && r <= 6 && c >= 1 && c <= 6;
      set.pixels.push_back(ring ? static_cast<std::uint8_t>(200 + i % 50) : 0);
    }
    set.labels.push_back(0);
  }
  auto cfg = mnist_preset();
  cfg.params.n_synapses = 64;
  cfg.params.theta_init = 20 * cfg.params.w_init;
  cfg.images = 30;
  cfg.corrupted = 0;
  const auto rep = run_mnist(set, cfg);
  CHECK(rep.images == 30);
  CHECK(rep.corrupted_disabled == 0);
  CHECK(rep.field.weight.size() == 64);
  CHECK(rep.corruption.pixels.empty());
  CHECK(run_mnist(set, cfg).field.weight == rep.field.weight);
}

TEST_CASE("statistics helpers") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1}, t{1, 2, 2, 3};
  CHECK(mean(x) == 2.5);
  CHECK(median(x) == 2.5);
  CHECK(stddev(x) == doctest::Approx(1.2909944487));
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(spearman(x, z) == doctest::Approx(-1.0));
  CHECK(average_ranks(t) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  const std::vector<double> flat{3, 3, 3, 3};
  CHECK(pearson(x, flat) == 0.0);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(pearson(one, one), Error);
  const std::vector<std::vector<double>> trace{{0, 10}, {2, 20}, {4, 30}};
  CHECK(steady_state(trace, 1) == std::vector<double>{3, 25});
  CHECK_THROWS_AS(steady_state(trace, 3), Error);
}

TEST_CASE("experiment configs reject nonsense") {
  NormErrorConfig n;
  n.bit_widths = {};
  CHECK_THROWS_AS(n.validate(), Error);
  SweepConfig s = fig7_preset(NormSignal::MaxW);
  s.burn_in = s.presentations;
  CHECK_THROWS_AS(s.validate(), Error);
  RecognitionConfig r;
  r.noisy_counts = {17};
  CHECK_THROWS_AS(r.validate(), Error);
  MnistConfig m = mnist_preset();
  m.corrupted = 785;
  CHECK_THROWS_AS(m.validate(), Error);
}
