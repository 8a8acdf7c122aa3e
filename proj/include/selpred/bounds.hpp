#pragma once

// Closed-form finite-sample bounds and auxiliary inequalities, grid checks of
// the inequalities, and Monte Carlo checks of the probability bounds.
//
// Exponential bounds are evaluated as logarithms and exponentiated last.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpred/dgp.hpp"
#include "selpred/lsq.hpp"
#include "selpred/modelsel.hpp"
#include "selpred/oracle.hpp"
#include "selpred/parallel.hpp"
#include "selpred/predict.hpp"
#include "selpred/special.hpp"
#include "selpred/stats.hpp"

namespace selpred {

enum class BoundKind {
  generic_union,               // C1 exp[log #M - C2 (n - |M|)]
  rho_hat_relative,            // 6 exp[-(n-|m|)/8 e^2/(e+8)]
  selected_regret,             // 6 exp[log #M - (n-|M|)/16 e^2/(e+16)]
  selected_rho_hat_relative,   // 6 exp[log #M - (n-|M|)/8 e^2/(e+8)]
  tv_single,                   // 7 exp[-(n-|m|)/2 e^2/(e+2)], 0 < e <= log 2
  tv_selected,                 // 7 exp[log #M - (n-|M|)/2 e^2/(e+2)], 0 < e <= log 2
  coverage_selected,           // same as tv_selected
  width_selected,              // 4 exp[log #M - (n-|M|)/2 e^2/(e+2)]
  delta_sq_tail,               // exp[-(n-|m|+1)/2 t^2/(t+1+(|m|-1)/n)]
  delta_sq_tail_coarse,        // exp[-(n-|m|)/2 t^2/(t+2)]
  rho_hat_sq_tail,             // exp[-(n-|m|)/2 t^2/(t+2)]
  rho_sq_lower_tail,           // exp[-(n-|m|)/2 t^2/(t+2)]
  rho_sq_upper_tail,           // 3 exp[-(n-|m|)/4 t^2/(t+4)]
  tv_normal_bound,             // |a|/sqrt(2 pi) + |log s^2|/sqrt(2 pi e)
  chi_sq1_tail,                // sqrt(2/pi) exp[-(t + log t)/2]
  kappa,                       // (1+r) log((1+r+c)/(1+r)) - r log((r+c)/r)
};

inline const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::generic_union: return "generic_union";
    case BoundKind::rho_hat_relative: return "rho_hat_relative";
    case BoundKind::selected_regret: return "selected_regret";
    case BoundKind::selected_rho_hat_relative: return "selected_rho_hat_relative";
    case BoundKind::tv_single: return "tv_single";
    case BoundKind::tv_selected: return "tv_selected";
    case BoundKind::coverage_selected: return "coverage_selected";
    case BoundKind::width_selected: return "width_selected";
    case BoundKind::delta_sq_tail: return "delta_sq_tail";
    case BoundKind::delta_sq_tail_coarse: return "delta_sq_tail_coarse";
    case BoundKind::rho_hat_sq_tail: return "rho_hat_sq_tail";
    case BoundKind::rho_sq_lower_tail: return "rho_sq_lower_tail";
    case BoundKind::rho_sq_upper_tail: return "rho_sq_upper_tail";
    case BoundKind::tv_normal_bound: return "tv_normal_bound";
    case BoundKind::chi_sq1_tail: return "chi_sq1_tail";
    case BoundKind::kappa: return "kappa";
  }
  return "?";
}

struct BoundArgs {
  std::optional<double> n, m_size, M_size, count_M, epsilon, t, r, c, a, s_sq, C1, C2;
};

struct BoundSpec {
  BoundKind kind = BoundKind::rho_hat_relative;
  BoundArgs args;
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, BoundKind kind) {
  if (!v || !std::isfinite(*v))
    throw std::invalid_argument(std::string(to_string(kind)) + ": missing or non-finite argument '" + name + "'");
  return *v;
}

inline void require(bool ok, BoundKind kind, const std::string& condition) {
  if (!ok) throw std::domain_error(std::string(to_string(kind)) + ": requires " + condition);
}

inline double rate(double e, double k) { return e * e / (e + k); }

/// Degrees of freedom n - size, with size < n - 1 enforced.
inline double dof(const BoundArgs& a, BoundKind kind, bool collection) {
  const double n = need(a.n, "n", kind);
  const double m = collection ? need(a.M_size, "M_size", kind) : need(a.m_size, "m_size", kind);
  require(m >= 1.0 && m < n - 1.0, kind, collection ? "1 <= |M| < n - 1" : "1 <= |m| < n - 1");
  return n - m;
}

inline double log_count(const BoundArgs& a, BoundKind kind) {
  const double c = need(a.count_M, "count_M", kind);
  require(c >= 1.0, kind, "#M >= 1");
  return std::log(c);
}

inline double positive_epsilon(const BoundArgs& a, BoundKind kind) {
  const double e = need(a.epsilon, "epsilon", kind);
  require(e > 0.0, kind, "epsilon > 0");
  return e;
}

inline double small_epsilon(const BoundArgs& a, BoundKind kind) {
  const double e = need(a.epsilon, "epsilon", kind);
  require(e > 0.0 && e <= std::numbers::ln2, kind, "0 < epsilon <= log 2");
  return e;
}

inline double nonneg_t(const BoundArgs& a, BoundKind kind) {
  const double t = need(a.t, "t", kind);
  require(t >= 0.0, kind, "t >= 0");
  return t;
}

}  // namespace detail

/// Natural log of an exponential-type bound. Throws std::domain_error when
/// the arguments leave the region where the bound is stated.
inline double log_bound_value(const BoundSpec& spec) {
  using namespace detail;
  const BoundArgs& a = spec.args;
  const BoundKind k = spec.kind;
  switch (k) {
    case BoundKind::generic_union: {
      const double c1 = need(a.C1, "C1", k), c2 = need(a.C2, "C2", k);
      require(c1 > 0.0 && c2 > 0.0, k, "C1 > 0 and C2 > 0");
      return std::log(c1) + log_count(a, k) - c2 * dof(a, k, true);
    }
    case BoundKind::rho_hat_relative:
      return std::log(6.0) - dof(a, k, false) / 8.0 * rate(positive_epsilon(a, k), 8.0);
    case BoundKind::selected_regret:
      return std::log(6.0) + log_count(a, k) - dof(a, k, true) / 16.0 * rate(positive_epsilon(a, k), 16.0);
    case BoundKind::selected_rho_hat_relative:
      return std::log(6.0) + log_count(a, k) - dof(a, k, true) / 8.0 * rate(positive_epsilon(a, k), 8.0);
    case BoundKind::tv_single:
      return std::log(7.0) - dof(a, k, false) / 2.0 * rate(small_epsilon(a, k), 2.0);
    case BoundKind::tv_selected:
    case BoundKind::coverage_selected:
      return std::log(7.0) + log_count(a, k) - dof(a, k, true) / 2.0 * rate(small_epsilon(a, k), 2.0);
    case BoundKind::width_selected:
      return std::log(4.0) + log_count(a, k) - dof(a, k, true) / 2.0 * rate(positive_epsilon(a, k), 2.0);
    case BoundKind::delta_sq_tail: {
      const double t = nonneg_t(a, k);
      const double df = dof(a, k, false);
      const double n = *a.n, m = *a.m_size;
      return -(df + 1.0) / 2.0 * t * t / (t + 1.0 + (m - 1.0) / n);
    }
    case BoundKind::delta_sq_tail_coarse:
    case BoundKind::rho_hat_sq_tail:
    case BoundKind::rho_sq_lower_tail: {
      const double t = nonneg_t(a, k);
      return -dof(a, k, false) / 2.0 * rate(t, 2.0);
    }
    case BoundKind::rho_sq_upper_tail: {
      const double t = nonneg_t(a, k);
      return std::log(3.0) - dof(a, k, false) / 4.0 * rate(t, 4.0);
    }
    case BoundKind::chi_sq1_tail: {
      const double t = need(a.t, "t", k);
      require(t > 0.0, k, "t > 0");
      return 0.5 * std::log(2.0 / std::numbers::pi) - 0.5 * (t + std::log(t));
    }
    case BoundKind::tv_normal_bound:
    case BoundKind::kappa:
      throw std::invalid_argument(std::string(to_string(k)) + " is not an exponential bound");
  }
  throw std::invalid_argument("log_bound_value: unknown kind");
}

inline double tv_normal_bound(double a, double s_sq) {
  return std::fabs(a) / std::sqrt(2.0 * std::numbers::pi) +
         std::fabs(std::log(s_sq)) / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
}

inline double kappa_value(double r, double c) {
  if (!(r > 0.0) || !(c > -r)) throw std::domain_error("kappa: requires r > 0 and c > -r");
  return (1.0 + r) * std::log1p(c / (1.0 + r)) - r * std::log1p(c / r);
}

/// Raw (unclipped) bound value.
inline double bound_value(const BoundSpec& spec) {
  const BoundArgs& a = spec.args;
  switch (spec.kind) {
    case BoundKind::tv_normal_bound: {
      const double av = detail::need(a.a, "a", spec.kind);
      const double s2 = detail::need(a.s_sq, "s_sq", spec.kind);
      detail::require(s2 > 0.0, spec.kind, "s^2 > 0");
      return tv_normal_bound(av, s2);
    }
    case BoundKind::kappa:
      return kappa_value(detail::need(a.r, "r", spec.kind), detail::need(a.c, "c", spec.kind));
    default:
      return std::exp(log_bound_value(spec));
  }
}

// ---------------------------------------------------------------------------
// Inequality grids

enum class InequalityKind {
  chi_sq1_band,         // F(t log t/(t-1)) - F(log t/(t-1)) <= log t / sqrt(2 pi e), t > 1
  chi_sq1_tail,         // 1 - F(t) <= sqrt(2/pi) exp[-(t + log t)/2], t > 0
  log_mix_lower,        // t - s log((e^t+s-1)/s) >= (1-s) t^2/(t+1+s), 0<s<1, t>=0
  log_mix_reflect,      // -t - s log(e^-t+s-1) >= t - s log(e^t+s-1), 0 <= t < -log(1-s)
  exp_quadratic,        // e^t-1-t >= e^-t-1+t >= t^2/(t+2), t >= 0
  tv_dominance,         // TV(N(a,s^2), N(0,1)) <= |a|/sqrt(2 pi) + |log s^2|/sqrt(2 pi e)
  tv_dominance_scaled,  // same with |a/s| in place of |a|
};

inline const char* to_string(InequalityKind kind) {
  switch (kind) {
    case InequalityKind::chi_sq1_band: return "chi_sq1_band";
    case InequalityKind::chi_sq1_tail: return "chi_sq1_tail";
    case InequalityKind::log_mix_lower: return "log_mix_lower";
    case InequalityKind::log_mix_reflect: return "log_mix_reflect";
    case InequalityKind::exp_quadratic: return "exp_quadratic";
    case InequalityKind::tv_dominance: return "tv_dominance";
    case InequalityKind::tv_dominance_scaled: return "tv_dominance_scaled";
  }
  return "?";
}

inline constexpr std::array<InequalityKind, 7> kAllInequalities = {
    InequalityKind::chi_sq1_band,    InequalityKind::chi_sq1_tail,  InequalityKind::log_mix_lower,
    InequalityKind::log_mix_reflect, InequalityKind::exp_quadratic, InequalityKind::tv_dominance,
    InequalityKind::tv_dominance_scaled};

/// Grid point; one-parameter inequalities read only x[0] (t), the others read
/// (s, t) or (a, s^2).
using GridPoint = std::array<double, 2>;

struct GridReport {
  InequalityKind kind{};
  double max_violation = -std::numeric_limits<double>::infinity();
  GridPoint worst{};
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// LHS - RHS of the inequality at `x` (<= 0 when it holds), or nullopt when
/// `x` is outside the stated domain.
inline std::optional<double> inequality_violation(InequalityKind kind, const GridPoint& x) {
  switch (kind) {
    case InequalityKind::chi_sq1_band: {
      const double t = x[0];
      if (!(t > 1.0)) return std::nullopt;
      const double lt = std::log(t);
      const double v = lt / (t - 1.0);
      return chi_sq_cdf(t * v, 1.0) - chi_sq_cdf(v, 1.0) -
             lt / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);
    }
    case InequalityKind::chi_sq1_tail: {
      const double t = x[0];
      if (!(t > 0.0)) return std::nullopt;
      return chi_sq_sf(t, 1.0) - std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * (t + std::log(t)));
    }
    case InequalityKind::log_mix_lower: {
      const double s = x[0], t = x[1];
      if (!(s > 0.0 && s < 1.0 && t >= 0.0)) return std::nullopt;
      // log((e^t + s - 1)/s) = log1p(expm1(t)/s)
      const double lhs = t - s * std::log1p(std::expm1(t) / s);
      return (1.0 - s) * t * t / (t + 1.0 + s) - lhs;
    }
    case InequalityKind::log_mix_reflect: {
      const double s = x[0], t = x[1];
      if (!(s > 0.0 && s < 1.0 && t >= 0.0 && t < -std::log1p(-s))) return std::nullopt;
      const double left = -t - s * std::log(std::expm1(-t) + s);
      const double right = t - s * std::log(std::expm1(t) + s);
      return right - left;
    }
    case InequalityKind::exp_quadratic: {
      const double t = x[0];
      if (!(t >= 0.0)) return std::nullopt;
      const double upper = std::expm1(t) - t;
      const double middle = std::expm1(-t) + t;
      const double lower = t * t / (t + 2.0);
      return std::max(middle - upper, lower - middle);
    }
    case InequalityKind::tv_dominance:
    case InequalityKind::tv_dominance_scaled: {
      const double a = x[0], s2 = x[1];
      if (!(s2 > 0.0) || !std::isfinite(a)) return std::nullopt;
      const double s = std::sqrt(s2);
      const double tv = exact_tv_gaussian({a, s}, {0.0, 1.0});
      const double shift = kind == InequalityKind::tv_dominance ? a : a / s;
      return tv - tv_normal_bound(shift, s2);
    }
  }
  return std::nullopt;
}

/// Default grid with about `points` entries inside the inequality's domain.
inline std::vector<GridPoint> default_grid(InequalityKind kind, std::size_t points = 10000) {
  std::vector<GridPoint> grid;
  grid.reserve(points);
  const auto side = static_cast<std::size_t>(std::max(2.0, std::floor(std::sqrt(static_cast<double>(points)))));
  switch (kind) {
    case InequalityKind::chi_sq1_band:
      // t = 1 + 10^u, u in [-6, 3]
      for (std::size_t i = 0; i < points; ++i)
        grid.push_back({1.0 + std::pow(10.0, -6.0 + 9.0 * static_cast<double>(i) / static_cast<double>(points - 1)), 0.0});
      break;
    case InequalityKind::chi_sq1_tail:
      for (std::size_t i = 0; i < points; ++i)
        grid.push_back({std::pow(10.0, -6.0 + 9.0 * static_cast<double>(i) / static_cast<double>(points - 1)), 0.0});
      break;
    case InequalityKind::exp_quadratic:
      for (std::size_t i = 0; i < points; ++i)
        grid.push_back({30.0 * static_cast<double>(i) / static_cast<double>(points - 1), 0.0});
      break;
    case InequalityKind::log_mix_lower:
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(side);
          const double t = 20.0 * static_cast<double>(j) / static_cast<double>(side - 1);
          grid.push_back({s, t});
        }
      break;
    case InequalityKind::log_mix_reflect:
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(side);
          const double tmax = -std::log1p(-s);
          const double t = tmax * static_cast<double>(j) / static_cast<double>(side);
          grid.push_back({s, t});
        }
      break;
    case InequalityKind::tv_dominance:
    case InequalityKind::tv_dominance_scaled:
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const double a = -5.0 + 10.0 * static_cast<double>(i) / static_cast<double>(side - 1);
          const double log_s2 = -3.0 + 6.0 * static_cast<double>(j) / static_cast<double>(side - 1);
          grid.push_back({a, std::exp(log_s2)});
        }
      break;
  }
  return grid;
}

inline GridReport check_inequality_grid(InequalityKind kind, std::span<const GridPoint> grid) {
  GridReport rep;
  rep.kind = kind;
  for (const auto& x : grid) {
    const auto v = inequality_violation(kind, x);
    if (!v) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    if (*v > rep.max_violation) {
      rep.max_violation = *v;
      rep.worst = x;
    }
  }
  return rep;
}

inline GridReport check_inequality_grid(InequalityKind kind) {
  const auto grid = default_grid(kind);
  return check_inequality_grid(kind, grid);
}

// ---------------------------------------------------------------------------
// Monte Carlo checks

enum class Experiment {
  rho_hat_relative,           // |log rho_hat^2(m)/rho^2(m)| > e
  selected_regret,            // log rho^2(m_hat)/rho^2(m_rho) > e
  selected_rho_hat_relative,  // |log rho_hat^2(m_hat)/rho^2(m_hat)| > e
  tv_single,                  // TV(L_hat(m), L(m)) > 1/sqrt(n) + e
  tv_selected,                // TV(L_hat(m_hat), L(m_hat)) > 1/sqrt(n) + e
  coverage_selected,          // |(1 - alpha) - coverage(I(m_hat))| > 1/sqrt(n) + e
  width_selected,             // |log delta_hat(m_hat)/delta(m_delta)| > e
  delta_sq_tails,             // delta^2 (n-|m|+1)/(n sigma^2) above e^t / below e^-t
  rho_hat_sq_tails,           // same for rho_hat^2
  rho_sq_tails,               // same for rho^2
  nu_mean,                    // mean of nu within 4 SE of zero
};

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::rho_hat_relative: return "rho_hat_relative";
    case Experiment::selected_regret: return "selected_regret";
    case Experiment::selected_rho_hat_relative: return "selected_rho_hat_relative";
    case Experiment::tv_single: return "tv_single";
    case Experiment::tv_selected: return "tv_selected";
    case Experiment::coverage_selected: return "coverage_selected";
    case Experiment::width_selected: return "width_selected";
    case Experiment::delta_sq_tails: return "delta_sq_tails";
    case Experiment::rho_hat_sq_tails: return "rho_hat_sq_tails";
    case Experiment::rho_sq_tails: return "rho_sq_tails";
    case Experiment::nu_mean: return "nu_mean";
  }
  return "?";
}

inline constexpr std::array<Experiment, 11> kAllExperiments = {
    Experiment::rho_hat_relative, Experiment::selected_regret,   Experiment::selected_rho_hat_relative,
    Experiment::tv_single,        Experiment::tv_selected,       Experiment::coverage_selected,
    Experiment::width_selected,   Experiment::delta_sq_tails,    Experiment::rho_hat_sq_tails,
    Experiment::rho_sq_tails,     Experiment::nu_mean};

inline Experiment experiment_from_string(const std::string& name) {
  for (auto e : kAllExperiments)
    if (name == to_string(e)) return e;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

/// Experiments about one fixed model use the first mask of the collection.
inline bool is_single_model(Experiment e) {
  switch (e) {
    case Experiment::rho_hat_relative:
    case Experiment::tv_single:
    case Experiment::delta_sq_tails:
    case Experiment::rho_hat_sq_tails:
    case Experiment::rho_sq_tails:
    case Experiment::nu_mean: return true;
    default: return false;
  }
}

enum class RowStatus { pass, fail, domain_error };

inline const char* to_string(RowStatus s) {
  switch (s) {
    case RowStatus::pass: return "pass";
    case RowStatus::fail: return "fail";
    case RowStatus::domain_error: return "domain_error";
  }
  return "?";
}

struct BoundRow {
  std::string experiment;
  std::string event;
  std::string label;  // DGP or setup label
  double parameter = 0.0;
  double frequency = 0.0;  // exceedance frequency, or the mean for nu_mean
  double bound = 0.0;      // raw bound
  double se = 0.0;
  RowStatus status = RowStatus::pass;
  std::string message;

  double bound_reported() const { return std::min(bound, 1.0); }
};

struct McSetup {
  std::string label;
  Index n = 60;
  ModelCollection collection;
  Index reps = 10000;
  std::vector<double> grid{0.25, 0.5, std::numbers::ln2};
  std::uint64_t seed = 1;
  double alpha = 0.05;
  unsigned threads = 1;
};

/// Per-replication oracle and estimated quantities for every mask.
struct ReplicationDraw {
  std::vector<double> rho_hat_sq, rho_sq, delta_sq, nu, tv, coverage;
  Index selected = 0;   // argmin rho_hat^2
  Index best_rho = 0;   // argmin rho^2
  Index best_delta = 0; // argmin delta^2
};

namespace detail {

inline Index argmin_index(const std::vector<ModelMask>& masks, const std::vector<double>& values) {
  return argmin_with_ties(masks, values).index;
}

inline ReplicationDraw simulate_replication(const Dgp& dgp, const std::vector<ConditionalRegression>& conds,
                                            const McSetup& setup, std::uint64_t rep) {
  Rng rng = make_stream(setup.seed, rep);
  const TrainingSample sample = sample_training(dgp, setup.n, rng);
  const auto& masks = setup.collection.masks;
  const double q = two_sided_quantile(setup.alpha);
  ReplicationDraw d;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const FitResult fit = fit_model(sample, masks[i]);
    const OracleQuantities oq = oracle_quantities(conds[i], sample, masks[i]);
    const double rh = criterion_value(fit, CriterionKind::rho_hat_sq);
    const GaussianLaw truth = oq.law();
    d.rho_hat_sq.push_back(rh);
    d.rho_sq.push_back(oq.rho_sq);
    d.delta_sq.push_back(oq.delta_sq);
    d.nu.push_back(oq.nu);
    d.tv.push_back(exact_tv_gaussian({0.0, std::sqrt(rh)}, truth));
    d.coverage.push_back(conditional_coverage(truth, q * std::sqrt(rh)));
  }
  d.selected = argmin_index(masks, d.rho_hat_sq);
  d.best_rho = argmin_index(masks, d.rho_sq);
  d.best_delta = argmin_index(masks, d.delta_sq);
  return d;
}

// |log(a/b)| with a == 0 read as infinite.
inline double abs_log_ratio(double a, double b) {
  if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
  return std::fabs(std::log(a / b));
}

inline BoundRow tally(const std::vector<ReplicationDraw>& draws, const std::string& experiment,
                      const std::string& event, const std::string& label, double param, const BoundSpec& spec,
                      auto&& exceeds) {
  BoundRow row;
  row.experiment = experiment;
  row.event = event;
  row.label = label;
  row.parameter = param;
  try {
    row.bound = bound_value(spec);
  } catch (const std::domain_error& e) {
    row.status = RowStatus::domain_error;
    row.message = e.what();
    return row;
  }
  std::size_t hits = 0;
  for (const auto& d : draws)
    if (exceeds(d)) ++hits;
  const double reps = static_cast<double>(draws.size());
  row.frequency = static_cast<double>(hits) / reps;
  row.se = std::sqrt(row.frequency * (1.0 - row.frequency) / reps);
  row.status = row.frequency <= row.bound + 4.0 * row.se ? RowStatus::pass : RowStatus::fail;
  return row;
}

}  // namespace detail

/// Simulates `setup.reps` training samples and evaluates every requested
/// experiment on the same draws. Replication i uses RNG stream i of
/// `setup.seed`, so the table does not depend on the thread count.
inline std::vector<BoundRow> mc_bound_check(std::span<const Experiment> experiments, const Dgp& dgp,
                                            const McSetup& setup) {
  if (setup.reps < 1000) throw std::invalid_argument("mc_bound_check: need at least 1000 replications");
  setup.collection.validate_for(setup.n, dgp.p() + 1);
  std::vector<ConditionalRegression> conds;
  for (const auto& mask : setup.collection.masks) conds.push_back(conditional_regression(dgp, mask));

  std::vector<ReplicationDraw> draws(static_cast<std::size_t>(setup.reps));
  parallel_for(setup.reps, setup.threads, [&](long long i) {
    draws[static_cast<std::size_t>(i)] = detail::simulate_replication(dgp, conds, setup, static_cast<std::uint64_t>(i));
  });

  const double n = static_cast<double>(setup.n);
  const auto& c0 = conds.front();
  const double m0 = static_cast<double>(setup.collection.masks.front().size());
  const double scale0 = (n - m0 + 1.0) / (n * c0.sigma_sq_m);
  BoundArgs single;
  single.n = n;
  single.m_size = m0;
  BoundArgs multi;
  multi.n = n;
  multi.M_size = static_cast<double>(setup.collection.max_size());
  multi.count_M = static_cast<double>(setup.collection.count());
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  const double nominal = 1.0 - setup.alpha;

  std::vector<BoundRow> rows;
  for (Experiment ex : experiments) {
    const std::string name = to_string(ex);
    if (ex == Experiment::nu_mean) {
      std::vector<double> nus;
      for (const auto& d : draws) nus.push_back(d.nu[0]);
      const MeanSe ms = mean_and_se(nus);
      BoundRow row;
      row.experiment = name;
      row.event = "mean_nu";
      row.label = setup.label;
      row.frequency = ms.mean;
      row.se = ms.se;
      row.status = std::fabs(ms.mean) <= 4.0 * ms.se ? RowStatus::pass : RowStatus::fail;
      rows.push_back(row);
      continue;
    }
    for (double e : setup.grid) {
      BoundArgs s = single, m = multi;
      s.epsilon = m.epsilon = e;
      s.t = e;
      switch (ex) {
        case Experiment::rho_hat_relative:
          rows.push_back(detail::tally(draws, name, "abs_log_ratio", setup.label, e, {BoundKind::rho_hat_relative, s},
                                       [&](const ReplicationDraw& d) {
                                         return detail::abs_log_ratio(d.rho_hat_sq[0], d.rho_sq[0]) > e;
                                       }));
          break;
        case Experiment::selected_regret:
          rows.push_back(detail::tally(draws, name, "log_regret", setup.label, e, {BoundKind::selected_regret, m},
                                       [&](const ReplicationDraw& d) {
                                         return std::log(d.rho_sq[static_cast<std::size_t>(d.selected)] /
                                                         d.rho_sq[static_cast<std::size_t>(d.best_rho)]) > e;
                                       }));
          break;
        case Experiment::selected_rho_hat_relative:
          rows.push_back(detail::tally(draws, name, "abs_log_ratio", setup.label, e,
                                       {BoundKind::selected_rho_hat_relative, m}, [&](const ReplicationDraw& d) {
                                         const auto k = static_cast<std::size_t>(d.selected);
                                         return detail::abs_log_ratio(d.rho_hat_sq[k], d.rho_sq[k]) > e;
                                       }));
          break;
        case Experiment::tv_single:
          rows.push_back(detail::tally(draws, name, "tv_excess", setup.label, e, {BoundKind::tv_single, s},
                                       [&](const ReplicationDraw& d) { return d.tv[0] > inv_sqrt_n + e; }));
          break;
        case Experiment::tv_selected:
          rows.push_back(detail::tally(draws, name, "tv_excess", setup.label, e, {BoundKind::tv_selected, m},
                                       [&](const ReplicationDraw& d) {
                                         return d.tv[static_cast<std::size_t>(d.selected)] > inv_sqrt_n + e;
                                       }));
          break;
        case Experiment::coverage_selected:
          rows.push_back(detail::tally(draws, name, "coverage_gap", setup.label, e, {BoundKind::coverage_selected, m},
                                       [&](const ReplicationDraw& d) {
                                         return std::fabs(nominal - d.coverage[static_cast<std::size_t>(d.selected)]) >
                                                inv_sqrt_n + e;
                                       }));
          break;
        case Experiment::width_selected:
          rows.push_back(detail::tally(draws, name, "abs_log_width", setup.label, e, {BoundKind::width_selected, m},
                                       [&](const ReplicationDraw& d) {
                                         const double dh = d.rho_hat_sq[static_cast<std::size_t>(d.selected)];
                                         const double dd = d.delta_sq[static_cast<std::size_t>(d.best_delta)];
                                         return 0.5 * detail::abs_log_ratio(dh, dd) > e;
                                       }));
          break;
        case Experiment::delta_sq_tails:
          rows.push_back(detail::tally(draws, name, "upper", setup.label, e, {BoundKind::delta_sq_tail, s},
                                       [&](const ReplicationDraw& d) { return d.delta_sq[0] * scale0 > std::exp(e); }));
          rows.push_back(detail::tally(draws, name, "lower", setup.label, e, {BoundKind::delta_sq_tail, s},
                                       [&](const ReplicationDraw& d) { return d.delta_sq[0] * scale0 < std::exp(-e); }));
          break;
        case Experiment::rho_hat_sq_tails:
          rows.push_back(detail::tally(draws, name, "upper", setup.label, e, {BoundKind::rho_hat_sq_tail, s},
                                       [&](const ReplicationDraw& d) { return d.rho_hat_sq[0] * scale0 > std::exp(e); }));
          rows.push_back(detail::tally(draws, name, "lower", setup.label, e, {BoundKind::rho_hat_sq_tail, s},
                                       [&](const ReplicationDraw& d) { return d.rho_hat_sq[0] * scale0 < std::exp(-e); }));
          break;
        case Experiment::rho_sq_tails:
          rows.push_back(detail::tally(draws, name, "upper", setup.label, e, {BoundKind::rho_sq_upper_tail, s},
                                       [&](const ReplicationDraw& d) { return d.rho_sq[0] * scale0 > std::exp(e); }));
          rows.push_back(detail::tally(draws, name, "lower", setup.label, e, {BoundKind::rho_sq_lower_tail, s},
                                       [&](const ReplicationDraw& d) { return d.rho_sq[0] * scale0 < std::exp(-e); }));
          break;
        case Experiment::nu_mean: break;
      }
    }
  }
  return rows;
}

inline std::vector<BoundRow> mc_bound_check(Experiment experiment, const Dgp& dgp, const McSetup& setup) {
  const Experiment one[] = {experiment};
  return mc_bound_check(one, dgp, setup);
}

}  // namespace selpred
