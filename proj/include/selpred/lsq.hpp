#pragma once

// Restricted least-squares fits of candidate models and the RSS-based
// performance criteria (sigma-hat^2, rho-hat^2, rho-check^2, GCV, Sp).

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpred/dgp.hpp"

namespace selpred {

/// Relative pivot tolerance for declaring a design rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Candidate model: inclusion mask over the p+1 design columns, intercept
/// (column 0) always included.
class ModelMask {
 public:
  ModelMask() = default;

  explicit ModelMask(std::vector<bool> include) : include_(std::move(include)) {
    if (include_.empty() || !include_[0])
      throw std::invalid_argument("ModelMask: the intercept (column 0) must be included");
    for (std::size_t j = 0; j < include_.size(); ++j)
      if (include_[j]) indices_.push_back(static_cast<Index>(j));
  }

  /// `included` lists non-intercept columns (1..width-1); column 0 is added.
  static ModelMask from_indices(Index width, std::span<const Index> included) {
    if (width < 1) throw std::invalid_argument("ModelMask: width must be >= 1");
    std::vector<bool> inc(static_cast<std::size_t>(width), false);
    inc[0] = true;
    for (Index j : included) {
      if (j < 0 || j >= width)
        throw std::invalid_argument("ModelMask: column " + std::to_string(j) + " outside [0, " +
                                    std::to_string(width) + ")");
      inc[static_cast<std::size_t>(j)] = true;
    }
    return ModelMask(std::move(inc));
  }
  static ModelMask from_indices(Index width, std::initializer_list<Index> included) {
    return from_indices(width, std::span<const Index>(included.begin(), included.size()));
  }
  static ModelMask intercept_only(Index width) { return from_indices(width, std::span<const Index>{}); }
  static ModelMask full(Index width) { return ModelMask(std::vector<bool>(static_cast<std::size_t>(width), true)); }
  /// Intercept plus the first k non-intercept columns.
  static ModelMask prefix(Index width, Index k) {
    std::vector<bool> inc(static_cast<std::size_t>(width), false);
    for (Index j = 0; j <= k && j < width; ++j) inc[static_cast<std::size_t>(j)] = true;
    return ModelMask(std::move(inc));
  }

  Index width() const { return static_cast<Index>(include_.size()); }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool includes(Index j) const { return include_.at(static_cast<std::size_t>(j)); }
  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<bool>& include() const { return include_; }

  /// Enforces |m| < n - 1.
  void validate_for(Index n) const {
    if (size() == 0) throw std::invalid_argument("ModelMask: empty mask");
    if (!(size() < n - 1))
      throw std::invalid_argument("ModelMask: |m| = " + std::to_string(size()) +
                                  " violates |m| < n - 1 for n = " + std::to_string(n));
  }

  bool operator==(const ModelMask& other) const { return include_ == other.include_; }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << indices_[i];
    os << '}';
    return os.str();
  }

 private:
  std::vector<bool> include_;
  std::vector<Index> indices_;
};

/// Tie rule for argmin selections: smaller |m| first, then lexicographic
/// order of the included column lists.
inline bool precedes_on_tie(const ModelMask& a, const ModelMask& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.indices().begin(), a.indices().end(), b.indices().begin(),
                                      b.indices().end());
}

struct FitResult {
  ModelMask mask;
  VectorXd beta_hat;  // length p+1, zero outside the mask
  double rss = 0.0;
  Index n = 0;
  double sigma_hat_sq = 0.0;
  bool rank_deficient = false;
  Index rank = 0;

  Index size() const { return mask.size(); }
};

enum class CriterionKind { sigma_hat_sq, rho_hat_sq, rho_check_sq, gcv, sp, delta_check_sq };

inline const char* to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::sigma_hat_sq: return "sigma_hat_sq";
    case CriterionKind::rho_hat_sq: return "rho_hat_sq";
    case CriterionKind::rho_check_sq: return "rho_check_sq";
    case CriterionKind::gcv: return "gcv";
    case CriterionKind::sp: return "sp";
    case CriterionKind::delta_check_sq: return "delta_check_sq";
  }
  return "?";
}

inline CriterionKind criterion_from_string(const std::string& name) {
  for (auto k : {CriterionKind::sigma_hat_sq, CriterionKind::rho_hat_sq, CriterionKind::rho_check_sq,
                 CriterionKind::gcv, CriterionKind::sp, CriterionKind::delta_check_sq})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown criterion '" + name + "'");
}

/// Criterion from RSS, sample size and model size. Requires size < n - 1.
inline double criterion_from_rss(double rss, Index n, Index size, CriterionKind kind) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(size);
  const double sigma_hat_sq = rss / (dn - dm);
  switch (kind) {
    case CriterionKind::sigma_hat_sq: return sigma_hat_sq;
    case CriterionKind::rho_hat_sq: return sigma_hat_sq * dn / (dn + 1.0 - dm);
    case CriterionKind::rho_check_sq:
      return sigma_hat_sq * (dn - 2.0) / (dn - 1.0 - dm) * (1.0 + 1.0 / dn);
    case CriterionKind::gcv: return sigma_hat_sq * dn / (dn - dm);
    case CriterionKind::sp:
    case CriterionKind::delta_check_sq: return sigma_hat_sq * (dn - 2.0) / (dn - 1.0 - dm);
  }
  return sigma_hat_sq;
}

inline double criterion_value(const FitResult& fit, CriterionKind kind) {
  return criterion_from_rss(fit.rss, fit.n, fit.size(), kind);
}

inline MatrixXd select_columns(const MatrixXd& X, std::span<const Index> cols) {
  MatrixXd out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = X.col(cols[k]);
  return out;
}

namespace detail {

inline void check_mask_against(const TrainingSample& sample, const ModelMask& mask) {
  if (mask.width() != sample.X.cols())
    throw std::invalid_argument("mask width " + std::to_string(mask.width()) +
                                " does not match design width " + std::to_string(sample.X.cols()));
  mask.validate_for(sample.n());
}

}  // namespace detail

/// Least-squares coefficients of `target` on the columns of `Z`, minimum norm
/// when Z is rank deficient. Returns the numerical rank through `rank`.
inline VectorXd least_squares(const MatrixXd& Z, const VectorXd& target, Index& rank) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr;
  qr.setThreshold(kRankTolerance);
  qr.compute(Z);
  rank = qr.rank();
  if (rank == Z.cols()) return qr.solve(target);
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(Z);
  return cod.solve(target);
}

/// Restricted least-squares fit of `mask` to `sample` (column-pivoted QR,
/// Moore-Penrose solution on rank deficiency).
inline FitResult fit_model(const TrainingSample& sample, const ModelMask& mask) {
  detail::check_mask_against(sample, mask);
  const MatrixXd Z = select_columns(sample.X, mask.indices());
  FitResult fit;
  fit.mask = mask;
  fit.n = sample.n();
  const VectorXd b = least_squares(Z, sample.Y, fit.rank);
  fit.rank_deficient = fit.rank < Z.cols();
  fit.beta_hat = VectorXd::Zero(sample.X.cols());
  for (std::size_t k = 0; k < mask.indices().size(); ++k)
    fit.beta_hat[mask.indices()[k]] = b[static_cast<Index>(k)];
  fit.rss = (sample.Y - Z * b).squaredNorm();
  fit.sigma_hat_sq = fit.rss / static_cast<double>(fit.n - mask.size());
  return fit;
}

/// RSS of `mask` without back-substitution: squared norm of the trailing
/// part of Q'Y.
inline double fit_rss(const TrainingSample& sample, const ModelMask& mask) {
  detail::check_mask_against(sample, mask);
  const MatrixXd Z = select_columns(sample.X, mask.indices());
  Eigen::ColPivHouseholderQR<MatrixXd> qr;
  qr.setThreshold(kRankTolerance);
  qr.compute(Z);
  const VectorXd qty = qr.householderQ().adjoint() * sample.Y;
  return qty.tail(sample.n() - qr.rank()).squaredNorm();
}

/// Point prediction x_f' beta_hat. `x_f` includes the leading intercept 1.
inline double predict_point(const FitResult& fit, std::span<const double> x_f) {
  if (static_cast<Index>(x_f.size()) != fit.beta_hat.size())
    throw std::invalid_argument("predict_point: x_f has length " + std::to_string(x_f.size()) +
                                ", expected " + std::to_string(fit.beta_hat.size()));
  double acc = 0.0;
  for (Index j : fit.mask.indices()) acc += x_f[static_cast<std::size_t>(j)] * fit.beta_hat[j];
  return acc;
}

inline double predict_point(const FitResult& fit, const VectorXd& x_f) {
  return predict_point(fit, std::span<const double>(x_f.data(), static_cast<std::size_t>(x_f.size())));
}

}  // namespace selpred
