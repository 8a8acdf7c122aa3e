#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "selpred/selpred.hpp"
#include "support.hpp"

using namespace selpred;
using Catch::Approx;

TEST_CASE("variance of y from the specification") {
  DgpSpec s;
  s.beta = VectorXd::Zero(1);
  s.gamma = VectorXd::Zero(1);
  s.sigma_u = 1.3;
  s.sigma_x = GeometricCovariance{0.5};
  CHECK(build_dgp(s).var_y() == Approx(1.69));

  DgpSpec t;
  t.beta = VectorXd::Ones(2);
  t.gamma = VectorXd::Zero(2);
  t.sigma_u = 1.0;
  t.sigma_x = MatrixXd(MatrixXd::Identity(2, 2));
  CHECK(build_dgp(t).var_y() == Approx(3.0));
}

TEST_CASE("study presets have signal-to-noise ratio 5 and sparse preset is sparse") {
  for (Scenario sc : {Scenario::sparse, Scenario::nonsparse}) {
    const Dgp d = build_dgp(make_scenario_spec(default_scenario(sc, 250)));
    CHECK((d.var_y() - d.sigma_u() * d.sigma_u()) / (d.sigma_u() * d.sigma_u()) == Approx(5.0).epsilon(1e-10));
  }
  const VectorXd b = make_scenario_spec(default_scenario(Scenario::sparse, 1000)).beta;
  const double mx = b.cwiseAbs().maxCoeff();
  const auto small = std::count_if(b.data(), b.data() + b.size(), [&](double v) { return std::fabs(v) < 0.1 * mx; });
  CHECK(static_cast<double>(small) >= 0.6 * 1000.0);
}

TEST_CASE("scaling helpers") {
  const VectorXd beta = (VectorXd(3) << 1.0, 0.0, 0.0).finished();
  const Covariance I = MatrixXd(MatrixXd::Identity(3, 3));
  const VectorXd scaled = scale_to_snr(beta, I, 1.0, 5.0);
  CHECK(scaled[0] == Approx(std::sqrt(5.0)));
  CHECK(scale_to_snr(beta, I, 2.0, 5.0).norm() == Approx(2.0 * scaled.norm()));
  CHECK(scale_to_snr(scaled, I, 1.0, 5.0)[0] == Approx(scaled[0]));

  const VectorXd g = VectorXd::Ones(2), bb = VectorXd::Ones(2);
  CHECK(scale_means(g, bb, std::sqrt(2.0))[0] == Approx(std::sqrt(2.0) / 2.0));
  CHECK_THROWS(scale_means(g, bb, 0.0));
}

TEST_CASE("ARCH coefficients are reproducible and degenerate to iid at alpha 0") {
  ArchParams a;
  CHECK(generate_beta_arch(50, 9, a) == generate_beta_arch(50, 9, a));
  ArchParams flat;
  flat.alpha = 0.0;
  flat.omega = 1.0;
  const VectorXd v = generate_beta_arch(20000, 3, flat);
  const double var = v.squaredNorm() / 20000.0 - std::pow(v.mean(), 2);
  CHECK(var == Approx(1.0).margin(0.05));
}

TEST_CASE("training samples are deterministic per seed and moment-faithful") {
  const Dgp d = build_dgp(testing_support::random_spec(2, 4, true));
  CHECK(sample_training(d, 30, 5).X == sample_training(d, 30, 5).X);
  CHECK_THROWS(sample_training(d, 2, 5));

  const Index n = 100000;
  const TrainingSample s = sample_training(d, n, 77);
  const VectorXd mx = s.X.rightCols(2).colwise().mean();
  for (Index j = 0; j < 2; ++j) {
    const double se = std::sqrt(d.covariance_entry(j, j) / static_cast<double>(n));
    CHECK(std::fabs(mx[j] - d.gamma()[j]) < 4.0 * se);
  }
  const MatrixXd C = s.X.rightCols(2).rowwise() - mx.transpose();
  const MatrixXd S = C.transpose() * C / static_cast<double>(n - 1);
  for (Index j = 0; j < 2; ++j)
    for (Index k = 0; k < 2; ++k) {
      const double sjk = d.covariance_entry(j, k);
      const double se = std::sqrt((d.covariance_entry(j, j) * d.covariance_entry(k, k) + sjk * sjk) / n);
      CHECK(std::fabs(S(j, k) - sjk) < 4.0 * se);
    }
  const double se_y = std::sqrt(d.var_y() / static_cast<double>(n));
  CHECK(std::fabs(s.Y.mean() - d.mean_y()) < 4.0 * se_y);
}

TEST_CASE("geometric covariance products match the dense matrix") {
  const Index p = 40;
  const Covariance g = GeometricCovariance{0.5};
  MatrixXd dense(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < p; ++k) dense(j, k) = std::pow(0.5, std::abs(j - k));
  const VectorXd v = VectorXd::LinSpaced(p, -1.0, 2.0);
  CHECK((covariance_times(g, v) - dense * v).norm() < 1e-12);
  CHECK(quadratic_form(g, v) == Approx(v.dot(dense * v)));
}

TEST_CASE("future draws follow the model") {
  const Dgp d = build_dgp(testing_support::random_spec(3, 8, false));
  CHECK(sample_future(d, 0, 1).empty());
  const auto draws = sample_future(d, 100000, 12);
  double sum = 0.0;
  for (const auto& f : draws) sum += f.y_f;
  CHECK(std::fabs(sum / 1e5 - d.mean_y()) < 4.0 * std::sqrt(d.var_y() / 1e5));
}

TEST_CASE("tiny error variance gives a near-exact full fit") {
  DgpSpec s = testing_support::random_spec(4, 2, false);
  s.sigma_u = 1e-6;
  const TrainingSample smp = sample_training(build_dgp(s), 40, 3);
  const FitResult f = fit_model(smp, ModelMask::full(5));
  CHECK(std::sqrt(f.rss / 40.0) < 1e-5);
}
