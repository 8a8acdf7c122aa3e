#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/distributions/normal.hpp>

#include <random>

#include "selpred/selpred.hpp"
#include "support.hpp"

using namespace selpred;
using Catch::Approx;

namespace {

DgpSpec two_regressor_spec(double b) {
  DgpSpec s;
  s.beta = (VectorXd(2) << b, 0.0).finished();
  s.gamma = VectorXd::Zero(2);
  s.sigma_u = 1.0;
  s.sigma_x = MatrixXd(MatrixXd::Identity(2, 2));
  return s;
}

double quadrature_tv(const GaussianLaw& P, const GaussianLaw& Q) {
  auto f = [&](double x) {
    const double p = normal_pdf((x - P.mean) / P.sd) / P.sd;
    const double q = normal_pdf((x - Q.mean) / Q.sd) / Q.sd;
    return 0.5 * std::fabs(p - q);
  };
  const double lo = std::min(P.mean - 40.0 * P.sd, Q.mean - 40.0 * Q.sd);
  const double hi = std::max(P.mean + 40.0 * P.sd, Q.mean + 40.0 * Q.sd);
  // Split at the density crossings so the integrand is smooth on each piece.
  std::vector<double> cuts{lo, hi};
  const double A = 0.5 * (1.0 / (Q.sd * Q.sd) - 1.0 / (P.sd * P.sd));
  const double B = P.mean / (P.sd * P.sd) - Q.mean / (Q.sd * Q.sd);
  const double C = 0.5 * (Q.mean * Q.mean / (Q.sd * Q.sd) - P.mean * P.mean / (P.sd * P.sd)) + std::log(Q.sd / P.sd);
  if (std::fabs(A) < 1e-15) {
    if (B != 0.0) cuts.push_back(-C / B);
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc > 0.0) {
      cuts.push_back((-B + std::sqrt(disc)) / (2.0 * A));
      cuts.push_back((-B - std::sqrt(disc)) / (2.0 * A));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i] < lo || cuts[i + 1] > hi || cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-13);
  }
  return total;
}

}  // namespace

TEST_CASE("conditional regression special cases") {
  const Dgp d = build_dgp(testing_support::random_spec(4, 3, true));
  const ConditionalRegression full = conditional_regression(d, ModelMask::full(5));
  CHECK(full.sigma_sq_m == Approx(d.sigma_u() * d.sigma_u()).epsilon(1e-10));
  CHECK(full.theta[0] == Approx(d.beta0()).margin(1e-10));
  for (Index j = 0; j < 4; ++j) CHECK(full.theta[j + 1] == Approx(d.beta()[j]).margin(1e-10));

  const ConditionalRegression none = conditional_regression(d, ModelMask::intercept_only(5));
  CHECK(none.sigma_sq_m == Approx(d.var_y()));
  CHECK(none.theta[0] == Approx(d.mean_y()));

  const Dgp two = build_dgp(two_regressor_spec(1.7));
  CHECK(conditional_regression(two, ModelMask::from_indices(3, {2})).sigma_sq_m == Approx(1.7 * 1.7 + 1.0));
}

TEST_CASE("two oracle routes agree on random instances") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dgp d = build_dgp(testing_support::random_spec(6, seed, seed % 2 == 0));
    const TrainingSample s = sample_training(d, 25, seed + 100);
    const ModelMask m = ModelMask::from_indices(7, {1, static_cast<Index>(2 + seed % 5)});
    const FitResult f = fit_model(s, m);
    const OracleQuantities q = oracle_quantities(d, s, m);
    const GaussianLaw law = direct_error_law(d, f.beta_hat);
    CHECK(q.nu == Approx(law.mean).margin(1e-9));
    CHECK(q.delta_sq == Approx(law.variance()).epsilon(1e-9));
    CHECK(q.rho_sq == Approx(law.mean * law.mean + law.variance()).epsilon(1e-9));
    CHECK(q.delta_sq >= q.sigma_sq_m * (1.0 - 1e-12));
  }
}

TEST_CASE("intercept-only model has delta^2 equal to sigma^2(m)") {
  const Dgp d = build_dgp(testing_support::random_spec(3, 5, false));
  const TrainingSample s = sample_training(d, 40, 9);
  const OracleQuantities q = oracle_quantities(d, s, ModelMask::intercept_only(4));
  CHECK(q.delta_sq == q.sigma_sq_m);
}

TEST_CASE("no noise and exact coefficients give nu near 0") {
  DgpSpec spec = testing_support::random_spec(3, 6, false);
  spec.sigma_u = 1e-7;
  const Dgp d = build_dgp(spec);
  const TrainingSample s = sample_training(d, 40, 4);
  const OracleQuantities q = oracle_quantities(d, s, ModelMask::full(4));
  CHECK(std::fabs(q.nu) < 1e-5);
  CHECK(q.delta_sq < 1e-12);
  CHECK(q.delta_sq >= q.sigma_sq_m);
}

TEST_CASE("fresh-draw Monte Carlo agrees with the closed form") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dgp d = build_dgp(testing_support::random_spec(5, seed, true));
    const TrainingSample s = sample_training(d, 30, seed);
    const ModelMask m = ModelMask::prefix(6, 3);
    const McEstimate mc = mc_rho_sq(d, fit_model(s, m), 20000, seed);
    CHECK(std::fabs(mc.value - oracle_quantities(d, s, m).rho_sq) <= 4.0 * mc.se);
  }
  DgpSpec exact = testing_support::random_spec(2, 1, false);
  exact.sigma_u = 1e-6;
  const Dgp d = build_dgp(exact);
  const TrainingSample s = sample_training(d, 50, 3);
  CHECK(mc_rho_sq(d, fit_model(s, ModelMask::full(3)), 2000, 1).value < 1e-9);
  CHECK_THROWS(mc_rho_sq(d, fit_model(s, ModelMask::full(3)), 999, 1));
}

TEST_CASE("expected rho^2 arithmetic") {
  CHECK(expected_rho_sq(1.0, 100, 10) == Approx(9898.0 / 8900.0).epsilon(1e-14));
  CHECK(expected_rho_sq(1.0, 100, 10) == Approx(1.112135).margin(1e-6));
  CHECK(expected_rho_sq(2.0, 50, 25) == Approx(4.08).epsilon(1e-14));
  CHECK(expected_rho_sq(3.0, 10, 1) == Approx(3.3).epsilon(1e-14));
  CHECK_THROWS(expected_rho_sq(1.0, 10, 9));
}

TEST_CASE("conditional coverage values") {
  const double q = two_sided_quantile(0.05);
  CHECK(conditional_coverage({0.0, 1.0}, q) == Approx(0.95).epsilon(1e-13));
  CHECK(conditional_coverage({0.0, 2.5}, q * 2.5) == Approx(0.95).epsilon(1e-13));
  CHECK(conditional_coverage({0.0, 1.0}, 1.96 * 1.1) == Approx(2.0 * normal_cdf(2.156) - 1.0).epsilon(1e-14));
  CHECK(conditional_coverage({0.0, 1.0}, 1.96 * 1.1) == Approx(0.9690).margin(1e-4));
  CHECK(conditional_coverage({1.0, 1.0}, 1.96) == Approx(0.8300).margin(1e-4));
  CHECK(conditional_coverage({0.0, 0.0}, 0.0) == 1.0);
  CHECK(conditional_coverage({0.1, 0.0}, 0.05) == 0.0);
}

TEST_CASE("exact TV closed forms") {
  CHECK(exact_tv_gaussian({0.3, 1.2}, {0.3, 1.2}) == 0.0);
  CHECK(exact_tv_gaussian({2.0, 1.0}, {0.0, 1.0}) == Approx(0.682689492137086).epsilon(1e-12));
  for (double a = -6.0; a <= 6.0; a += 0.05)
    CHECK(std::fabs(exact_tv_gaussian({a, 1.0}, {0.0, 1.0}) - (2.0 * normal_cdf(std::fabs(a) / 2.0) - 1.0)) < 1e-10);
  for (double ls = -4.0; ls <= 4.0; ls += 0.04) {
    if (std::fabs(ls) < 1e-9) continue;
    const double s2 = std::exp(ls);
    const double lo = std::min(1.0, s2) * std::fabs(ls) / std::fabs(s2 - 1.0);
    const double hi = std::max(1.0, s2) * std::fabs(ls) / std::fabs(s2 - 1.0);
    const double want = chi_sq_cdf(hi, 1.0) - chi_sq_cdf(lo, 1.0);
    CHECK(std::fabs(exact_tv_gaussian({0.0, std::sqrt(s2)}, {0.0, 1.0}) - want) < 1e-10);
  }
  const double e = std::numbers::e;
  CHECK(exact_tv_gaussian({0.0, std::sqrt(e)}, {0.0, 1.0}) ==
        Approx(chi_sq_cdf(e / (e - 1.0), 1.0) - chi_sq_cdf(1.0 / (e - 1.0), 1.0)).epsilon(1e-12));
}

TEST_CASE("exact TV matches adaptive quadrature on random pairs") {
  Rng rng = make_stream(2024, 0);
  std::uniform_real_distribution<double> mean(-3.0, 3.0), logsd(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const GaussianLaw P{mean(rng), std::exp(logsd(rng))};
    const GaussianLaw Q{mean(rng), std::exp(logsd(rng))};
    CHECK(std::fabs(exact_tv_gaussian(P, Q) - quadrature_tv(P, Q)) < 1e-8);
    CHECK(exact_tv_gaussian(P, Q) == Approx(exact_tv_gaussian(Q, P)).margin(1e-12));
  }
}

TEST_CASE("TV with a degenerate law") {
  CHECK(exact_tv_gaussian({0.0, 0.0}, {0.0, 1.0}) == 1.0);
  CHECK(exact_tv_gaussian({0.0, 0.0}, {0.0, 0.0}) == 0.0);
}

TEST_CASE("delta^2 CDF support and limits") {
  CHECK(delta_sq_cdf(0.99, 1.0, 60, 1) == 0.0);
  CHECK(delta_sq_cdf(1.0, 1.0, 60, 1) == 1.0);
  CHECK(delta_sq_cdf(1.5, 2.0, 60, 15) == 0.0);
  CHECK(delta_sq_cdf(1e6, 2.0, 60, 15) == Approx(1.0));
  double prev = 0.0;
  for (double t = 1.0; t < 3.0; t += 0.01) {
    const double v = delta_sq_cdf(t, 1.0, 60, 15);
    CHECK(v >= prev);
    prev = v;
  }
}
