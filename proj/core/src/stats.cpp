#include "klab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klab {

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  if (successes > n) throw std::invalid_argument("wilson_interval: successes > n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // the endpoints are exact at the extremes; rounding would otherwise leave 1e-18 residue
  return {successes == 0 ? 0.0 : std::max(0.0, center - half), successes == n ? 1.0 : std::min(1.0, center + half)};
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

MeanStats mean_stats(std::span<const double> x) {
  MeanStats s;
  s.n = x.size();
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  s.mean = pairwise_sum(x) / n;
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - s.mean) * (x[i] - s.mean);
  if (x.size() > 1) {
    s.stddev = std::sqrt(pairwise_sum(dev) / (n - 1.0));
    s.std_error = s.stddev / std::sqrt(n);
  }
  return s;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace klab
