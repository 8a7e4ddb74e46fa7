#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace klab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion (default 95%).
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

/// Pairwise (cascade) summation in index order; bit-stable for a fixed input order.
double pairwise_sum(std::span<const double> x);

struct MeanStats {
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};
MeanStats mean_stats(std::span<const double> x);

/// Linearly interpolated quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> x, double q);

}  // namespace klab
