#pragma once

// Small descriptive statistics and the one-sample Kolmogorov-Smirnov
// statistic used by the Monte Carlo checks.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace selpred {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean_and_se: need at least two values");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty input");
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `sample`.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace selpred
