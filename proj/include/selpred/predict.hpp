#pragma once

// Prediction intervals after model selection and one-sided threshold tests,
// both built on the estimated error law N(0, delta_hat^2).

#include <cmath>
#include <stdexcept>
#include <string>

#include "selpred/lsq.hpp"
#include "selpred/oracle.hpp"
#include "selpred/special.hpp"

namespace selpred {

struct PredictionInterval {
  double center = 0.0;
  double halfwidth = 0.0;
  double alpha = 0.05;
  ModelMask mask;
  bool degenerate = false;  // halfwidth == 0 because delta_hat == 0

  double lower() const { return center - halfwidth; }
  double upper() const { return center + halfwidth; }
  bool contains(double y) const { return lower() <= y && y <= upper(); }
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
}

}  // namespace detail

/// The 1 - alpha/2 standard normal quantile.
inline double two_sided_quantile(double alpha) {
  detail::check_alpha(alpha);
  return -normal_quantile(0.5 * alpha);
}

/// N(0, delta_hat^2) with delta_hat^2 = sigma_hat^2 n / (n + 1 - |m|).
inline GaussianLaw estimated_law(const FitResult& fit) {
  return {0.0, std::sqrt(criterion_value(fit, CriterionKind::rho_hat_sq))};
}

/// yhat_f +- q_alpha delta_hat.
inline PredictionInterval prediction_interval(const FitResult& fit, const VectorXd& x_f, double alpha) {
  const double q = two_sided_quantile(alpha);
  const GaussianLaw law = estimated_law(fit);
  PredictionInterval out;
  out.center = predict_point(fit, x_f);
  out.halfwidth = q * law.sd;
  out.alpha = alpha;
  out.mask = fit.mask;
  out.degenerate = law.degenerate();
  return out;
}

/// Infeasible benchmark: yhat_f - nu +- q_alpha delta, using the true law.
inline PredictionInterval infeasible_interval(const OracleQuantities& truth, const FitResult& fit,
                                              const VectorXd& x_f, double alpha) {
  const double q = two_sided_quantile(alpha);
  PredictionInterval out;
  out.center = predict_point(fit, x_f) - truth.nu;
  out.halfwidth = q * std::sqrt(truth.delta_sq);
  out.alpha = alpha;
  out.mask = fit.mask;
  out.degenerate = truth.delta_sq == 0.0;
  return out;
}

enum class ThresholdSide { above, below };

struct ThresholdDecision {
  double p_value = 0.0;
  bool reject = false;
};

/// Plug-in test of whether y_f lies on `side` of threshold c, treating
/// y_f ~ N(yhat_f, delta_hat^2). The p-value is the estimated probability that
/// y_f lies on `side` of c; p < alpha rejects that hypothesis.
inline ThresholdDecision threshold_test(const FitResult& fit, const VectorXd& x_f, double c, double alpha,
                                        ThresholdSide side) {
  detail::check_alpha(alpha);
  const double yhat = predict_point(fit, x_f);
  const double sd = estimated_law(fit).sd;
  const double diff = side == ThresholdSide::above ? yhat - c : c - yhat;
  double p = 0.0;
  if (sd == 0.0)
    p = diff > 0.0 ? 1.0 : (diff < 0.0 ? 0.0 : 0.5);
  else
    p = normal_cdf(diff / sd);
  return {p, p < alpha};
}

}  // namespace selpred
