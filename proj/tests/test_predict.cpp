#include <catch_amalgamated.hpp>

#include "selpred/selpred.hpp"
#include "support.hpp"

using namespace selpred;
using Catch::Approx;

namespace {

// Fit with prescribed coefficients and RSS, for checking interval arithmetic.
FitResult synthetic_fit(double intercept, double rss, Index n, Index width) {
  FitResult f;
  f.mask = ModelMask::intercept_only(width);
  f.beta_hat = VectorXd::Zero(width);
  f.beta_hat[0] = intercept;
  f.rss = rss;
  f.n = n;
  f.sigma_hat_sq = rss / static_cast<double>(n - 1);
  return f;
}

}  // namespace

TEST_CASE("interval center and width") {
  // |m| = 1 so delta_hat^2 = sigma_hat^2 = 1
  const FitResult f = synthetic_fit(3.0, 9.0, 10, 2);
  VectorXd x(2);
  x << 1.0, 5.0;
  const PredictionInterval iv = prediction_interval(f, x, 0.05);
  CHECK(iv.center == 3.0);
  CHECK(iv.halfwidth == Approx(1.959963984540054).epsilon(1e-13));
  CHECK(iv.contains(4.9));
  CHECK_FALSE(iv.contains(5.0));
  CHECK(prediction_interval(f, x, 1.0 - 1e-12).halfwidth < 1e-11);
  CHECK_THROWS(prediction_interval(f, x, 0.0));
  CHECK_THROWS(prediction_interval(f, x, 1.0));
}

TEST_CASE("estimated law") {
  CHECK(estimated_law(synthetic_fit(0.0, 9.0, 10, 2)).variance() == Approx(1.0));
  FitResult g = synthetic_fit(0.0, 90.0, 100, 12);
  g.mask = ModelMask::prefix(12, 9);
  CHECK(estimated_law(g).variance() == Approx(100.0 / 91.0).epsilon(1e-14));
  const GaussianLaw zero = estimated_law(synthetic_fit(0.0, 0.0, 10, 2));
  CHECK(zero.degenerate());
}

TEST_CASE("zero-RSS fit gives a point interval at the training response") {
  TrainingSample s = testing_support::random_sample(12, 2, 4);
  s.Y = s.X * Eigen::Vector3d(1.0, 2.0, -1.0);
  const FitResult f = fit_model(s, ModelMask::full(3));
  const PredictionInterval iv = prediction_interval(f, s.X.row(5).transpose(), 0.1);
  CHECK(iv.center == Approx(s.Y[5]).margin(1e-12));
  CHECK(iv.halfwidth < 1e-6);
}

TEST_CASE("infeasible interval has exact coverage; feasible coverage follows the oracle") {
  const Dgp d = build_dgp(testing_support::random_spec(5, 21, true));
  const TrainingSample s = sample_training(d, 40, 2);
  const ModelMask m = ModelMask::prefix(6, 3);
  const FitResult f = fit_model(s, m);
  const OracleQuantities q = oracle_quantities(d, s, m);
  VectorXd x = VectorXd::Ones(6);
  const PredictionInterval inf = infeasible_interval(q, f, x, 0.05);
  // error of center is Normal(0, delta^2) so coverage is nominal
  CHECK(conditional_coverage({0.0, std::sqrt(q.delta_sq)}, inf.halfwidth) == Approx(0.95).margin(1e-12));
  const PredictionInterval feas = prediction_interval(f, x, 0.05);
  CHECK(conditional_coverage(q.law(), feas.halfwidth) ==
        Approx(normal_interval_probability((-feas.halfwidth - q.nu) / std::sqrt(q.delta_sq),
                                           (feas.halfwidth - q.nu) / std::sqrt(q.delta_sq))));
  OracleQuantities match = q;
  match.nu = 0.0;
  match.delta_sq = criterion_value(f, CriterionKind::rho_hat_sq);
  const PredictionInterval same = infeasible_interval(match, f, x, 0.05);
  CHECK(same.center == Approx(feas.center));
  CHECK(same.halfwidth == Approx(feas.halfwidth));
}

TEST_CASE("one-sided threshold test") {
  const FitResult f = synthetic_fit(3.0, 9.0, 10, 2);
  VectorXd x(2);
  x << 1.0, 0.0;
  CHECK(threshold_test(f, x, 3.0, 0.05, ThresholdSide::above).p_value == Approx(0.5));
  const double q = two_sided_quantile(0.05);
  CHECK(threshold_test(f, x, 3.0 - q, 0.05, ThresholdSide::above).p_value == Approx(0.975).epsilon(1e-12));
  const auto below = threshold_test(f, x, 3.0 - q, 0.05, ThresholdSide::below);
  CHECK(below.p_value == Approx(0.025).epsilon(1e-10));
  CHECK(below.reject);
  const FitResult exact = synthetic_fit(3.0, 0.0, 10, 2);
  CHECK(threshold_test(exact, x, 2.0, 0.05, ThresholdSide::above).p_value == 1.0);
  CHECK(threshold_test(exact, x, 4.0, 0.05, ThresholdSide::above).reject);
}
