#pragma once

#include <random>

#include "selpred/selpred.hpp"

namespace testing_support {

using namespace selpred;

/// Random design with intercept column and i.i.d. N(0,1) regressors, plus a
/// response with coefficients 1/(j+1) and unit noise.
inline TrainingSample random_sample(Index n, Index p, std::uint64_t seed) {
  Rng rng = make_stream(seed, 7);
  std::normal_distribution<double> z(0.0, 1.0);
  TrainingSample s;
  s.X.resize(n, p + 1);
  s.Y.resize(n);
  for (Index i = 0; i < n; ++i) {
    s.X(i, 0) = 1.0;
    double y = 0.3;
    for (Index j = 1; j <= p; ++j) {
      s.X(i, j) = z(rng);
      y += s.X(i, j) / static_cast<double>(j + 1);
    }
    s.Y[i] = y + z(rng);
  }
  return s;
}

/// Dense random SPD covariance with unit-ish diagonal.
inline MatrixXd random_spd(Index p, std::uint64_t seed) {
  Rng rng = make_stream(seed, 11);
  std::normal_distribution<double> z(0.0, 1.0);
  MatrixXd A(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) A(i, j) = z(rng);
  return A * A.transpose() / static_cast<double>(p) + MatrixXd::Identity(p, p) * 0.5;
}

inline DgpSpec random_spec(Index p, std::uint64_t seed, bool dense) {
  Rng rng = make_stream(seed, 13);
  std::normal_distribution<double> z(0.0, 1.0);
  DgpSpec s;
  s.beta0 = z(rng);
  s.beta.resize(p);
  s.gamma.resize(p);
  for (Index j = 0; j < p; ++j) {
    s.beta[j] = z(rng);
    s.gamma[j] = 0.5 * z(rng);
  }
  s.sigma_u = 0.5 + std::abs(z(rng));
  if (dense)
    s.sigma_x = random_spd(p, seed);
  else
    s.sigma_x = GeometricCovariance{0.5};
  return s;
}

}  // namespace testing_support
