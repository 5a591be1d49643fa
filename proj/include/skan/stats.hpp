#pragma once

#include <span>
#include <vector>

namespace skan {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two samples.
double stddev(std::span<const double> xs);
double median(std::span<const double> xs);

// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

// Both throw on length mismatch or fewer than two samples. A constant input
// has no defined correlation and yields 0.
double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);

// Per-column mean of trace rows [burn_in, end). Throws unless
// trace.size() > burn_in.
std::vector<double> steady_state(const std::vector<std::vector<double>>& trace, std::size_t burn_in);

}  // namespace skan
