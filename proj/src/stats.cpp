#include "skan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "skan/neuron.hpp"

namespace skan {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median(std::span<const double> xs) {
  if (xs.empty()) throw Error("median of an empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

static void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error("correlation: length mismatch (" + std::to_string(xs.size()) + " vs " +
                std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw Error("correlation needs at least two samples");
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

std::vector<double> steady_state(const std::vector<std::vector<double>>& trace, std::size_t burn_in) {
  if (trace.size() <= burn_in)
    throw Error("steady_state: trace of " + std::to_string(trace.size()) + " samples is not longer than burn-in " +
                std::to_string(burn_in));
  std::vector<double> acc(trace[burn_in].size(), 0.0);
  for (std::size_t i = burn_in; i < trace.size(); ++i) {
    if (trace[i].size() != acc.size()) throw Error("steady_state: ragged trace");
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += trace[i][c];
  }
  for (double& a : acc) a /= static_cast<double>(trace.size() - burn_in);
  return acc;
}

}  // namespace skan
