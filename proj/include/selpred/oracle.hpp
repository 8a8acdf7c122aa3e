#pragma once

// True conditional quantities given the DGP and a fixed training sample:
// sigma^2(m), the conditional regression of y on the included regressors, the
// prediction-error law N(nu, delta^2), coverage and Gaussian TV distance.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpred/dgp.hpp"
#include "selpred/lsq.hpp"
#include "selpred/special.hpp"

namespace selpred {

/// Univariate normal N(mean, sd^2); sd == 0 is a point mass.
struct GaussianLaw {
  double mean = 0.0;
  double sd = 1.0;

  bool degenerate() const { return sd == 0.0; }
  double variance() const { return sd * sd; }
};

struct ConditionalRegression {
  ModelMask mask;
  VectorXd theta;     // E[y | z] = z' theta over included columns (intercept first)
  VectorXd eta;       // E[z], eta[0] == 1
  MatrixXd Gamma;     // Cov(z), zero first row and column
  double sigma_sq_m = 0.0;
};

struct OracleQuantities {
  double nu = 0.0;
  double delta_sq = 0.0;
  double rho_sq = 0.0;
  double sigma_sq_m = 0.0;
  bool rank_deficient = false;

  GaussianLaw law() const { return {nu, std::sqrt(delta_sq)}; }
};

/// Included non-intercept columns of `mask`, as 0-based regressor indices.
inline std::vector<Index> regressor_indices(const ModelMask& mask) {
  std::vector<Index> out;
  out.reserve(mask.indices().size());
  for (Index j : mask.indices())
    if (j > 0) out.push_back(j - 1);
  return out;
}

inline ConditionalRegression conditional_regression(const Dgp& dgp, const ModelMask& mask) {
  if (mask.width() != dgp.p() + 1)
    throw std::invalid_argument("conditional_regression: mask width " + std::to_string(mask.width()) +
                                " does not match p + 1 = " + std::to_string(dgp.p() + 1));
  const std::vector<Index> idx = regressor_indices(mask);
  const Index k = static_cast<Index>(idx.size());

  ConditionalRegression out;
  out.mask = mask;
  out.theta = VectorXd::Zero(k + 1);
  out.eta = VectorXd::Zero(k + 1);
  out.Gamma = MatrixXd::Zero(k + 1, k + 1);
  out.eta[0] = 1.0;

  double explained = 0.0;
  if (k > 0) {
    const MatrixXd S = dgp.covariance_submatrix(idx);
    VectorXd c(k), gm(k);
    for (Index a = 0; a < k; ++a) {
      c[a] = dgp.cov_xy()[idx[static_cast<std::size_t>(a)]];
      gm[a] = dgp.gamma()[idx[static_cast<std::size_t>(a)]];
    }
    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("conditional_regression: covariance of included regressors is singular");
    const VectorXd w = llt.solve(c);
    out.theta.tail(k) = w;
    out.eta.tail(k) = gm;
    out.Gamma.bottomRightCorner(k, k) = S;
    explained = std::clamp(c.dot(w), 0.0, dgp.signal_variance());
    out.theta[0] = dgp.mean_y() - gm.dot(w);
  } else {
    out.theta[0] = dgp.mean_y();
  }
  const double su2 = dgp.sigma_u() * dgp.sigma_u();
  out.sigma_sq_m = std::max(su2, dgp.var_y() - explained);
  return out;
}

/// nu and delta^2 through the projection of V = Y - Z theta on the included
/// columns Z: nu = eta' w, delta^2 = w' Gamma w + sigma^2(m), w = (Z'Z)^+ Z'V.
inline OracleQuantities oracle_quantities(const ConditionalRegression& cond, const TrainingSample& sample,
                                          const ModelMask& mask) {
  if (!(cond.mask == mask))
    throw std::invalid_argument("oracle_quantities: conditional regression was built for another mask");
  detail::check_mask_against(sample, mask);
  const MatrixXd Z = select_columns(sample.X, mask.indices());
  const VectorXd V = sample.Y - Z * cond.theta;
  Index rank = 0;
  const VectorXd w = least_squares(Z, V, rank);
  OracleQuantities q;
  q.rank_deficient = rank < Z.cols();
  q.sigma_sq_m = cond.sigma_sq_m;
  q.nu = cond.eta.dot(w);
  q.delta_sq = w.dot(cond.Gamma * w) + cond.sigma_sq_m;
  q.rho_sq = q.nu * q.nu + q.delta_sq;
  return q;
}

inline OracleQuantities oracle_quantities(const Dgp& dgp, const TrainingSample& sample, const ModelMask& mask) {
  return oracle_quantities(conditional_regression(dgp, mask), sample, mask);
}

/// Law of yhat_f - y_f for arbitrary coefficients beta_hat (length p+1):
/// mean b0 - beta0 + gamma'd, variance d' Sigma d + sigma_u^2, d = b_{-1} - beta.
inline GaussianLaw direct_error_law(const Dgp& dgp, const VectorXd& beta_hat) {
  if (beta_hat.size() != dgp.p() + 1)
    throw std::invalid_argument("direct_error_law: beta_hat has length " + std::to_string(beta_hat.size()) +
                                ", expected " + std::to_string(dgp.p() + 1));
  const VectorXd d = beta_hat.tail(dgp.p()) - dgp.beta();
  const double mean = beta_hat[0] - dgp.beta0() + dgp.gamma().dot(d);
  const double var = d.dot(dgp.covariance_times(d)) + dgp.sigma_u() * dgp.sigma_u();
  return {mean, std::sqrt(var)};
}

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

/// Brute-force rho^2: mean squared prediction error over fresh future draws.
inline McEstimate mc_rho_sq(const Dgp& dgp, const FitResult& fit, Index draws, Rng& rng) {
  if (draws < 1000) throw std::invalid_argument("mc_rho_sq: need at least 1000 draws");
  if (fit.beta_hat.size() != dgp.p() + 1)
    throw std::invalid_argument("mc_rho_sq: fit does not match the DGP dimension");
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd x(dgp.p());
  double sum = 0.0, sum_sq = 0.0;
  for (Index i = 0; i < draws; ++i) {
    dgp.draw_regressors(rng, normal, x);
    const double y = dgp.beta0() + x.dot(dgp.beta()) + dgp.sigma_u() * normal(rng);
    const double yhat = fit.beta_hat[0] + x.dot(fit.beta_hat.tail(dgp.p()));
    const double e2 = (yhat - y) * (yhat - y);
    sum += e2;
    sum_sq += e2 * e2;
  }
  const double dn = static_cast<double>(draws);
  const double mean = sum / dn;
  const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
  return {mean, std::sqrt(var / dn)};
}

inline McEstimate mc_rho_sq(const Dgp& dgp, const FitResult& fit, Index draws, std::uint64_t seed) {
  Rng rng = make_stream(seed, kFutureStream);
  return mc_rho_sq(dgp, fit, draws, rng);
}

/// E[rho^2(m)] = sigma^2(m) (n-2)/(n-1-|m|) (1 + 1/n).
inline double expected_rho_sq(double sigma_sq_m, Index n, Index m_size) {
  const double denom = static_cast<double>(n - 1 - m_size);
  if (!(denom > 0.0))
    throw std::invalid_argument("expected_rho_sq: need n - 1 - |m| > 0, got n = " + std::to_string(n) +
                                ", |m| = " + std::to_string(m_size));
  const double dn = static_cast<double>(n);
  return sigma_sq_m * (dn - 2.0) / denom * (1.0 + 1.0 / dn);
}

/// P(|E| <= halfwidth) for E ~ truth.
inline double conditional_coverage(const GaussianLaw& truth, double halfwidth) {
  if (truth.degenerate()) return std::fabs(truth.mean) <= halfwidth ? 1.0 : 0.0;
  return normal_interval_probability((-halfwidth - truth.mean) / truth.sd,
                                     (halfwidth - truth.mean) / truth.sd);
}

/// Exact total variation distance between two univariate normals.
///
/// After standardizing by Q, P = N(a, s^2) and Q = N(0, 1). The log-likelihood
/// ratio log(p/q) is quadratic in x; its roots bound the set where one density
/// dominates, and TV is the difference of the two masses on that set.
inline double exact_tv_gaussian(const GaussianLaw& P, const GaussianLaw& Q) {
  if (P.sd < 0.0 || Q.sd < 0.0) throw std::invalid_argument("exact_tv_gaussian: negative sd");
  if (P.degenerate() || Q.degenerate()) return (P.sd == Q.sd && P.mean == Q.mean) ? 0.0 : 1.0;

  const double a = (P.mean - Q.mean) / Q.sd;
  const double s = P.sd / Q.sd;
  const double log_s2 = 2.0 * std::log(s);
  if (std::fabs(log_s2) < 1e-12) return std::erf(std::fabs(a) / (2.0 * std::numbers::sqrt2));

  const double inv_s2 = 1.0 / (s * s);
  const double A = 0.5 * (1.0 - inv_s2);
  const double B = a * inv_s2;
  const double C = -0.5 * log_s2 - 0.5 * a * a * inv_s2;
  const double disc = std::max(0.0, B * B - 4.0 * A * C);
  double r1 = 0.0, r2 = 0.0;
  if (B == 0.0) {
    r1 = std::sqrt(std::max(0.0, -C / A));
    r2 = -r1;
  } else {
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    r1 = q / A;
    r2 = C / q;
  }
  const double lo = std::min(r1, r2);
  const double hi = std::max(r1, r2);
  const double p_in = normal_interval_probability((lo - a) / s, (hi - a) / s);
  const double q_in = normal_interval_probability(lo, hi);
  // s > 1: p/q > 1 outside [lo, hi]; s < 1: p/q > 1 inside.
  const double tv = s > 1.0 ? q_in - p_in : p_in - q_in;
  return std::clamp(tv, 0.0, 1.0);
}

/// CDF of sigma^2(m) (1 + chi2_{|m|-1} / chi2_{n-|m|+1}), the conditional law
/// of delta^2(m); a step at sigma^2(m) when |m| = 1.
inline double delta_sq_cdf(double t, double sigma_sq_m, Index n, Index m_size) {
  const double a = static_cast<double>(m_size - 1);
  const double b = static_cast<double>(n - m_size + 1);
  if (m_size < 1 || !(b >= 1.0))
    throw std::invalid_argument("delta_sq_cdf: need |m| >= 1 and n - |m| + 1 >= 1");
  if (m_size == 1) return t >= sigma_sq_m ? 1.0 : 0.0;
  if (t <= sigma_sq_m) return 0.0;
  return f_ratio_cdf((t / sigma_sq_m - 1.0) * b / a, a, b);
}

}  // namespace selpred
