#pragma once

// Finite-truncation Gaussian data-generating process
//
//   y = beta0 + sum_j x_j beta_j + u,   x ~ N(gamma, Sigma),  u ~ N(0, sigma_u^2)
//
// with u independent of the regressors. Coefficients beyond p are zero.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "selpred/rng.hpp"

namespace selpred {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sigma_{jk} = r^{|j-k|}; unit variances. Positive definite for |r| < 1.
struct GeometricCovariance {
  double r = 0.5;
};

using Covariance = std::variant<GeometricCovariance, MatrixXd>;

struct DgpSpec {
  double beta0 = 0.0;
  VectorXd beta;   // length p, non-intercept coefficients
  VectorXd gamma;  // length p, regressor means
  Covariance sigma_x = GeometricCovariance{};
  double sigma_u = 1.0;

  Index p() const { return beta.size(); }
};

/// Training data. Column 0 of X is the intercept and is identically one.
struct TrainingSample {
  MatrixXd X;
  VectorXd Y;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols() - 1; }
};

struct FutureDraw {
  VectorXd x_f;  // length p+1, x_f[0] == 1
  double y_f = 0.0;
};

namespace detail {

inline Index covariance_dim(const Covariance& cov, Index fallback) {
  if (const auto* m = std::get_if<MatrixXd>(&cov)) return m->rows();
  return fallback;
}

}  // namespace detail

/// Sigma * v without materializing Sigma for the geometric family
/// (two first-order recursions, O(p)).
inline VectorXd covariance_times(const Covariance& cov, const VectorXd& v) {
  if (const auto* m = std::get_if<MatrixXd>(&cov)) return (*m) * v;
  const double r = std::get<GeometricCovariance>(cov).r;
  const Index p = v.size();
  VectorXd fwd(p), bwd(p), out(p);
  double acc = 0.0;
  for (Index j = 0; j < p; ++j) {
    acc = v[j] + r * acc;
    fwd[j] = acc;
  }
  acc = 0.0;
  for (Index j = p - 1; j >= 0; --j) {
    acc = v[j] + r * acc;
    bwd[j] = acc;
  }
  out = fwd + bwd - v;
  return out;
}

inline double covariance_entry(const Covariance& cov, Index j, Index k) {
  if (const auto* m = std::get_if<MatrixXd>(&cov)) return (*m)(j, k);
  const double r = std::get<GeometricCovariance>(cov).r;
  const Index d = j > k ? j - k : k - j;
  return d == 0 ? 1.0 : std::pow(r, static_cast<double>(d));
}

inline MatrixXd covariance_submatrix(const Covariance& cov, std::span<const Index> idx) {
  const Index k = static_cast<Index>(idx.size());
  MatrixXd out(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b <= a; ++b) out(a, b) = out(b, a) = covariance_entry(cov, idx[a], idx[b]);
  return out;
}

inline double quadratic_form(const Covariance& cov, const VectorXd& v) {
  return v.dot(covariance_times(cov, v));
}

/// Validated, immutable data-generating process. Safe to share across threads.
class Dgp {
 public:
  const DgpSpec& spec() const { return spec_; }
  Index p() const { return spec_.p(); }
  double beta0() const { return spec_.beta0; }
  const VectorXd& beta() const { return spec_.beta; }
  const VectorXd& gamma() const { return spec_.gamma; }
  double sigma_u() const { return spec_.sigma_u; }

  /// beta' Sigma beta
  double signal_variance() const { return signal_variance_; }
  double var_y() const { return signal_variance_ + spec_.sigma_u * spec_.sigma_u; }
  double mean_y() const { return mean_y_; }
  /// Cov(x, y) = Sigma beta
  const VectorXd& cov_xy() const { return cov_xy_; }

  VectorXd covariance_times(const VectorXd& v) const {
    return selpred::covariance_times(spec_.sigma_x, v);
  }
  double covariance_entry(Index j, Index k) const {
    return selpred::covariance_entry(spec_.sigma_x, j, k);
  }
  MatrixXd covariance_submatrix(std::span<const Index> idx) const {
    return selpred::covariance_submatrix(spec_.sigma_x, idx);
  }
  MatrixXd covariance() const {
    std::vector<Index> all(static_cast<std::size_t>(p()));
    for (Index j = 0; j < p(); ++j) all[static_cast<std::size_t>(j)] = j;
    return covariance_submatrix(all);
  }

  /// Fills `x` (length p) with one draw from N(gamma, Sigma).
  template <class Normal>
  void draw_regressors(Rng& rng, Normal& normal, Eigen::Ref<VectorXd> x) const {
    const Index np = p();
    if (const auto* geo = std::get_if<GeometricCovariance>(&spec_.sigma_x)) {
      // AR(1) recursion reproduces r^{|j-k|} exactly with unit variances.
      const double r = geo->r;
      const double innov = std::sqrt(1.0 - r * r);
      double prev = normal(rng);
      x[0] = prev;
      for (Index j = 1; j < np; ++j) {
        prev = r * prev + innov * normal(rng);
        x[j] = prev;
      }
    } else {
      VectorXd z(np);
      for (Index j = 0; j < np; ++j) z[j] = normal(rng);
      x = chol_lower_.triangularView<Eigen::Lower>() * z;
    }
    x += spec_.gamma;
  }

 private:
  friend Dgp build_dgp(DgpSpec spec);

  DgpSpec spec_;
  MatrixXd chol_lower_;
  VectorXd cov_xy_;
  double signal_variance_ = 0.0;
  double mean_y_ = 0.0;
};

/// Validates `spec` and precomputes Var(y), Cov(x, y) and E[y].
inline Dgp build_dgp(DgpSpec spec) {
  const Index p = spec.p();
  if (p < 1) throw std::invalid_argument("build_dgp: p must be >= 1");
  if (spec.gamma.size() != p)
    throw std::invalid_argument("build_dgp: gamma has length " + std::to_string(spec.gamma.size()) +
                                ", expected " + std::to_string(p));
  if (!(spec.sigma_u > 0.0) || !std::isfinite(spec.sigma_u))
    throw std::invalid_argument("build_dgp: sigma_u must be > 0");
  if (!spec.beta.allFinite() || !spec.gamma.allFinite() || !std::isfinite(spec.beta0))
    throw std::invalid_argument("build_dgp: non-finite coefficient or mean");

  Dgp dgp;
  if (const auto* geo = std::get_if<GeometricCovariance>(&spec.sigma_x)) {
    if (!(std::fabs(geo->r) < 1.0))
      throw std::invalid_argument("build_dgp: geometric covariance needs |r| < 1, got r = " +
                                  std::to_string(geo->r));
  } else {
    const MatrixXd& s = std::get<MatrixXd>(spec.sigma_x);
    if (s.rows() != p || s.cols() != p)
      throw std::invalid_argument("build_dgp: sigma_x must be " + std::to_string(p) + "x" +
                                  std::to_string(p));
    const double scale = s.cwiseAbs().maxCoeff();
    if (!s.allFinite() || (s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("build_dgp: sigma_x is not symmetric");
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s, Eigen::EigenvaluesOnly);
      throw std::invalid_argument("build_dgp: sigma_x is not positive definite (smallest eigenvalue " +
                                  std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
    dgp.chol_lower_ = llt.matrixL();
  }
  dgp.cov_xy_ = covariance_times(spec.sigma_x, spec.beta);
  dgp.signal_variance_ = spec.beta.dot(dgp.cov_xy_);
  dgp.mean_y_ = spec.beta0 + spec.gamma.dot(spec.beta);
  dgp.spec_ = std::move(spec);
  return dgp;
}

/// n i.i.d. rows (1, x_i) with y_i = beta0 + x_i' beta + u_i.
inline TrainingSample sample_training(const Dgp& dgp, Index n, Rng& rng) {
  if (n < 3) throw std::invalid_argument("sample_training: n must be >= 3");
  const Index p = dgp.p();
  std::normal_distribution<double> normal(0.0, 1.0);
  TrainingSample s;
  s.X.resize(n, p + 1);
  s.Y.resize(n);
  VectorXd x(p);
  for (Index i = 0; i < n; ++i) {
    dgp.draw_regressors(rng, normal, x);
    s.X(i, 0) = 1.0;
    s.X.row(i).tail(p) = x.transpose();
    s.Y[i] = dgp.beta0() + x.dot(dgp.beta()) + dgp.sigma_u() * normal(rng);
  }
  return s;
}

inline TrainingSample sample_training(const Dgp& dgp, Index n, std::uint64_t seed) {
  Rng rng = make_stream(seed, kTrainingStream);
  return sample_training(dgp, n, rng);
}

inline std::vector<FutureDraw> sample_future(const Dgp& dgp, Index count, Rng& rng) {
  std::vector<FutureDraw> out;
  out.reserve(static_cast<std::size_t>(count));
  const Index p = dgp.p();
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd x(p);
  for (Index i = 0; i < count; ++i) {
    dgp.draw_regressors(rng, normal, x);
    FutureDraw d;
    d.x_f.resize(p + 1);
    d.x_f[0] = 1.0;
    d.x_f.tail(p) = x;
    d.y_f = dgp.beta0() + x.dot(dgp.beta()) + dgp.sigma_u() * normal(rng);
    out.push_back(std::move(d));
  }
  return out;
}

/// Streams for different seeds are independent; the same seed reproduces the
/// same draws.
inline std::vector<FutureDraw> sample_future(const Dgp& dgp, Index count, std::uint64_t seed) {
  Rng rng = make_stream(seed, kFutureStream);
  return sample_future(dgp, count, rng);
}

// ---------------------------------------------------------------------------
// Coefficient construction for the block-sparsity study.

/// ARCH(1) recursion beta_j = s_j z_j, s_j^2 = omega + alpha beta_{j-1}^2.
struct ArchParams {
  double omega = 0.01;
  double alpha = 0.97;

  static ArchParams sparse() { return {0.01, 0.97}; }
  static ArchParams nonsparse() { return {0.5, 0.5}; }
};

inline VectorXd generate_beta_arch(Index length, std::uint64_t seed, ArchParams params) {
  if (length < 1) throw std::invalid_argument("generate_beta_arch: length must be >= 1");
  if (!(params.omega > 0.0) || !(params.alpha >= 0.0) || !(params.alpha < 1.0))
    throw std::invalid_argument(
        "generate_beta_arch: need omega > 0 and 0 <= alpha < 1 (covariance-stationary ARCH(1))");
  Rng rng = make_stream(seed, kTrainingStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd beta(length);
  double prev = 0.0;
  for (Index j = 0; j < length; ++j) {
    const double scale = std::sqrt(params.omega + params.alpha * prev * prev);
    prev = scale * normal(rng);
    beta[j] = prev;
  }
  return beta;
}

/// Rescales beta so that beta' Sigma beta / sigma_u^2 == target_snr.
inline VectorXd scale_to_snr(const VectorXd& beta, const Covariance& sigma_x, double sigma_u,
                             double target_snr) {
  if (!(target_snr > 0.0)) throw std::invalid_argument("scale_to_snr: target_snr must be > 0");
  if (!(sigma_u > 0.0)) throw std::invalid_argument("scale_to_snr: sigma_u must be > 0");
  const double signal = quadratic_form(sigma_x, beta);
  if (!(signal > 0.0)) throw std::invalid_argument("scale_to_snr: beta is zero, cannot rescale");
  return beta * std::sqrt(target_snr * sigma_u * sigma_u / signal);
}

/// Rescales gamma so that gamma' beta == target.
inline VectorXd scale_means(const VectorXd& gamma, const VectorXd& beta, double target) {
  const double current = gamma.dot(beta);
  if (current == 0.0) throw std::invalid_argument("scale_means: gamma' beta is zero, cannot rescale");
  if (target == 0.0) throw std::invalid_argument("scale_means: target 0 is not reachable by scaling");
  return gamma * (target / current);
}

enum class Scenario { sparse, nonsparse };

/// Parameters of the block-sparsity study DGP. Coefficients come from an
/// ARCH(1) realization, are scaled to the requested signal-to-noise ratio, and
/// then the standard-normal means are scaled so that gamma' beta hits
/// `mean_target`.
struct ScenarioParams {
  Scenario scenario = Scenario::sparse;
  Index p = 250;
  double snr = 5.0;
  double mean_target = std::sqrt(2.0);
  double r = 0.5;
  double sigma_u = 1.0;
  double beta0 = 0.0;
  std::uint64_t beta_seed = 20090101;
  std::uint64_t gamma_seed = 20090102;
  ArchParams arch = ArchParams::sparse();
};

inline ScenarioParams default_scenario(Scenario scenario, Index p) {
  ScenarioParams params;
  params.scenario = scenario;
  params.p = p;
  params.arch = scenario == Scenario::sparse ? ArchParams::sparse() : ArchParams::nonsparse();
  return params;
}

inline DgpSpec make_scenario_spec(const ScenarioParams& params) {
  DgpSpec spec;
  spec.beta0 = params.beta0;
  spec.sigma_u = params.sigma_u;
  spec.sigma_x = GeometricCovariance{params.r};
  spec.beta = scale_to_snr(generate_beta_arch(params.p, params.beta_seed, params.arch), spec.sigma_x,
                           params.sigma_u, params.snr);
  Rng rng = make_stream(params.gamma_seed, kTrainingStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd gamma(params.p);
  for (Index j = 0; j < params.p; ++j) gamma[j] = normal(rng);
  spec.gamma = scale_means(gamma, spec.beta, params.mean_target);
  return spec;
}

}  // namespace selpred
