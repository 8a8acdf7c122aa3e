#pragma once

// Simulation study of greedy block search, verification campaigns for the
// distributional claims and bounds, and the real-data fit/predict entry point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpred/bounds.hpp"
#include "selpred/config.hpp"
#include "selpred/csv.hpp"
#include "selpred/dgp.hpp"
#include "selpred/lsq.hpp"
#include "selpred/modelsel.hpp"
#include "selpred/oracle.hpp"
#include "selpred/parallel.hpp"
#include "selpred/predict.hpp"
#include "selpred/stats.hpp"

namespace selpred {

// ---------------------------------------------------------------------------
// Greedy block study

struct StudyOptions {
  std::string label = "study";
  Index n = 500;
  BlockLayout blocks;
  double alpha = 0.05;
  Index reps = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct PathRow {
  Index step = 0;  // 0 = most complex model
  Index size = 0;
  double rho_hat_sq = 0.0;
  double rho_sq = 0.0;
  double coverage = 0.0;
  bool selected = false;
};

struct ReplicationReport {
  Index rep = 0;
  std::vector<PathRow> rows;
  Index selected = 0;
  double rho_hat_sq_selected = 0.0;
  double rho_sq_selected = 0.0;
  double coverage_selected = 0.0;
  double min_coverage = 0.0;      // over the whole path
  double mean_gap = 0.0;          // mean over the path of rho^2 - rho_hat^2
  bool rss_monotone = true;       // RSS nondecreasing along the path
};

struct StudySummary {
  std::string label;
  Index reps = 0;
  double median_coverage = 0.0;
  double min_coverage = 0.0;
  double median_path_min_coverage = 0.0;
  double min_path_min_coverage = 0.0;
  double mean_gap = 0.0;
  double median_selected_size = 0.0;
  double median_rho_hat_sq_selected = 0.0;
  double median_rho_sq_selected = 0.0;
};

struct StudyResult {
  std::vector<ReplicationReport> reports;
  StudySummary summary;
};

inline void validate_study(const Dgp& dgp, const StudyOptions& opt) {
  if (opt.blocks.count < 1 || opt.blocks.width < 1) throw ConfigError("block count and width must be >= 1");
  if (opt.blocks.count * opt.blocks.width > dgp.p())
    throw ConfigError("blocks cover " + std::to_string(opt.blocks.count * opt.blocks.width) +
                      " regressors but the DGP has p = " + std::to_string(dgp.p()));
  if (!(1 + opt.blocks.count * opt.blocks.width < opt.n - 1))
    throw ConfigError("full model size " + std::to_string(1 + opt.blocks.count * opt.blocks.width) +
                      " violates |M| < n - 1 for n = " + std::to_string(opt.n));
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (opt.reps < 1) throw ConfigError("reps must be >= 1");
}

inline ReplicationReport run_study_replication(const Dgp& dgp, const StudyOptions& opt, const BlockPartition& blocks,
                                               Index rep) {
  Rng rng = make_stream(opt.seed, static_cast<std::uint64_t>(rep));
  const TrainingSample sample = sample_training(dgp, opt.n, rng);
  const GreedyPath path = greedy_block_path(sample, blocks);
  const Selection sel = select_on_path(sample, path);
  const double q = two_sided_quantile(opt.alpha);

  ReplicationReport r;
  r.rep = rep;
  r.selected = sel.index;
  r.min_coverage = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (std::size_t i = 0; i < path.visited.size(); ++i) {
    PathRow row;
    row.step = static_cast<Index>(i);
    row.size = path.visited[i].size();
    row.rho_hat_sq = criterion_from_rss(path.rss_path[i], opt.n, row.size, CriterionKind::rho_hat_sq);
    const GaussianLaw truth = direct_error_law(dgp, path.coefficients[i]);
    row.rho_sq = truth.mean * truth.mean + truth.variance();
    row.coverage = conditional_coverage(truth, q * std::sqrt(row.rho_hat_sq));
    row.selected = static_cast<Index>(i) == sel.index;
    gap += row.rho_sq - row.rho_hat_sq;
    r.min_coverage = std::min(r.min_coverage, row.coverage);
    r.rows.push_back(row);
  }
  r.mean_gap = gap / static_cast<double>(path.visited.size());
  for (std::size_t i = 1; i < path.rss_path.size(); ++i)
    if (path.rss_path[i] < path.rss_path[i - 1] * (1.0 - 1e-12)) r.rss_monotone = false;
  const PathRow& chosen = r.rows[static_cast<std::size_t>(sel.index)];
  r.rho_hat_sq_selected = chosen.rho_hat_sq;
  r.rho_sq_selected = chosen.rho_sq;
  r.coverage_selected = chosen.coverage;
  return r;
}

inline StudySummary summarize_study(const std::string& label, const std::vector<ReplicationReport>& reports) {
  StudySummary s;
  s.label = label;
  s.reps = static_cast<Index>(reports.size());
  std::vector<double> cov, pmin, size, rh, rs;
  double gap = 0.0;
  for (const auto& r : reports) {
    cov.push_back(r.coverage_selected);
    pmin.push_back(r.min_coverage);
    size.push_back(static_cast<double>(r.rows[static_cast<std::size_t>(r.selected)].size));
    rh.push_back(r.rho_hat_sq_selected);
    rs.push_back(r.rho_sq_selected);
    gap += r.mean_gap;
  }
  s.median_coverage = median(cov);
  s.min_coverage = *std::min_element(cov.begin(), cov.end());
  s.median_path_min_coverage = median(pmin);
  s.min_path_min_coverage = *std::min_element(pmin.begin(), pmin.end());
  s.mean_gap = gap / static_cast<double>(reports.size());
  s.median_selected_size = median(size);
  s.median_rho_hat_sq_selected = median(rh);
  s.median_rho_sq_selected = median(rs);
  return s;
}

/// Per replication: draw a training sample, run the greedy block search,
/// select on the path by rho_hat^2, and evaluate the true rho^2 and the
/// conditional coverage of the interval for every visited model.
inline StudyResult run_block_study(const Dgp& dgp, const StudyOptions& opt) {
  validate_study(dgp, opt);
  const BlockPartition blocks = consecutive_blocks(opt.blocks.count, opt.blocks.width);
  StudyResult out;
  out.reports.resize(static_cast<std::size_t>(opt.reps));
  parallel_for(opt.reps, opt.threads, [&](long long i) {
    out.reports[static_cast<std::size_t>(i)] = run_study_replication(dgp, opt, blocks, static_cast<Index>(i));
  });
  out.summary = summarize_study(opt.label, out.reports);
  return out;
}

inline Json to_json(const StudySummary& s) {
  return {{"label", s.label},
          {"reps", s.reps},
          {"median_coverage", s.median_coverage},
          {"min_coverage", s.min_coverage},
          {"median_path_min_coverage", s.median_path_min_coverage},
          {"min_path_min_coverage", s.min_path_min_coverage},
          {"mean_rho_sq_minus_rho_hat_sq", s.mean_gap},
          {"median_selected_size", s.median_selected_size},
          {"median_rho_hat_sq_selected", s.median_rho_hat_sq_selected},
          {"median_rho_sq_selected", s.median_rho_sq_selected}};
}

/// Columns: rep, step, size, rho_hat_sq, rho_sq, coverage, selected.
inline void write_path_csv(const std::string& path, const std::vector<ReplicationReport>& reports) {
  CsvWriter w(path, {"rep", "step", "size", "rho_hat_sq", "rho_sq", "coverage", "selected"});
  for (const auto& r : reports)
    for (const auto& row : r.rows)
      w.write_row({std::to_string(r.rep), std::to_string(row.step), std::to_string(row.size),
                   format_double(row.rho_hat_sq), format_double(row.rho_sq), format_double(row.coverage),
                   row.selected ? "1" : "0"});
}

/// Columns: rep, selected_size, rho_hat_sq, rho_sq, coverage, path_min_coverage, mean_gap.
inline void write_replication_csv(const std::string& path, const std::vector<ReplicationReport>& reports) {
  CsvWriter w(path, {"rep", "selected_size", "rho_hat_sq", "rho_sq", "coverage", "path_min_coverage", "mean_gap"});
  for (const auto& r : reports)
    w.write_row({std::to_string(r.rep), std::to_string(r.rows[static_cast<std::size_t>(r.selected)].size),
                 format_double(r.rho_hat_sq_selected), format_double(r.rho_sq_selected),
                 format_double(r.coverage_selected), format_double(r.min_coverage), format_double(r.mean_gap)});
}

struct StudyCheck {
  std::string label;
  bool median_in_range = true;
  bool min_above_target = true;
  bool underestimates = true;  // mean over path of rho^2 - rho_hat^2 > 0

  bool passed() const { return median_in_range && min_above_target && underestimates; }
};

struct StudyCampaign {
  std::vector<StudyResult> results;
  std::vector<StudyCheck> checks;
  std::vector<double> median_range;
  double min_target = -1.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const StudyCheck& c) { return c.passed(); });
  }
};

/// Reduced scale: n = 500, p = 250, 25 blocks of 10. Full scale: n = 2000,
/// p = 1000, 50 blocks of 20. Both presets, 100 replications.
inline ExperimentConfig study_defaults(bool full_scale) {
  ExperimentConfig c;
  const Index p = full_scale ? 1000 : 250;
  c.n = full_scale ? 2000 : 500;
  c.blocks = full_scale ? BlockLayout{50, 20} : BlockLayout{25, 10};
  c.use_blocks = true;
  c.reps = 100;
  c.seed = 20240601;
  for (Scenario s : {Scenario::sparse, Scenario::nonsparse})
    c.dgps.push_back({s == Scenario::sparse ? "sparse" : "nonsparse", make_scenario_spec(default_scenario(s, p))});
  if (!full_scale) {
    c.coverage_median_range = {0.93, 0.96};
    c.coverage_min_target = 0.90;
  }
  return c;
}

inline StudyCampaign simulate(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.dgps.empty()) throw ConfigError("simulate needs at least one DGP");
  std::vector<StudyOptions> options;
  std::vector<Dgp> dgps;
  for (std::size_t k = 0; k < cfg.dgps.size(); ++k) {
    StudyOptions o;
    o.label = cfg.dgps[k].label;
    o.n = cfg.n;
    o.blocks = cfg.blocks;
    o.alpha = cfg.alpha;
    o.reps = cfg.reps;
    o.seed = derive_seed(cfg.seed, k);
    o.threads = threads;
    dgps.push_back(build_dgp(cfg.dgps[k].spec));
    validate_study(dgps.back(), o);
    options.push_back(o);
  }
  StudyCampaign c;
  c.median_range = cfg.coverage_median_range;
  c.min_target = cfg.coverage_min_target;
  for (std::size_t k = 0; k < dgps.size(); ++k) {
    c.results.push_back(run_block_study(dgps[k], options[k]));
    const StudySummary& s = c.results.back().summary;
    StudyCheck chk;
    chk.label = s.label;
    if (c.median_range.size() == 2)
      chk.median_in_range = s.median_coverage >= c.median_range[0] && s.median_coverage <= c.median_range[1];
    if (c.min_target >= 0.0) chk.min_above_target = s.min_coverage >= c.min_target;
    chk.underestimates = s.mean_gap > 0.0;
    c.checks.push_back(chk);
  }
  return c;
}

inline Json to_json(const StudyCampaign& c) {
  Json j = {{"studies", Json::array()}};
  for (std::size_t k = 0; k < c.results.size(); ++k) {
    Json s = to_json(c.results[k].summary);
    s["median_in_range"] = c.checks[k].median_in_range;
    s["min_above_target"] = c.checks[k].min_above_target;
    s["underestimates"] = c.checks[k].underestimates;
    s["pass"] = c.checks[k].passed();
    j["studies"].push_back(s);
  }
  if (c.median_range.size() == 2) j["median_coverage_target"] = c.median_range;
  if (c.min_target >= 0.0) j["min_coverage_target"] = c.min_target;
  j["pass"] = c.passed();
  return j;
}

// ---------------------------------------------------------------------------
// Distributional checks for a fixed model

struct DistributionReport {
  std::string label;
  Index n = 0;
  Index mask_size = 0;
  Index reps = 0;
  double sigma_sq_m = 0.0;
  double ks_delta_sq = 0.0;     // delta^2 vs sigma^2 (1 + chi2_a/chi2_b)
  double ks_nu_sq = 0.0;        // nu^2 n / delta^2 vs chi2_1
  double ks_sigma_hat_sq = 0.0; // sigma_hat^2 (n-|m|)/sigma^2 vs chi2_{n-|m|}
  bool delta_sq_exact = false;  // |m| == 1: delta^2 == sigma^2 on every replication
  double mean_nu = 0.0;
  double se_nu = 0.0;
  double ks_threshold = 0.015;

  bool passed() const {
    const bool delta_ok = mask_size == 1 ? delta_sq_exact : ks_delta_sq < ks_threshold;
    const bool nu_ok = mask_size == 1 || ks_nu_sq < ks_threshold;
    return delta_ok && nu_ok && ks_sigma_hat_sq < ks_threshold && std::fabs(mean_nu) <= 4.0 * se_nu;
  }
};

struct UnbiasednessReport {
  std::string label;
  Index n = 0;
  Index mask_size = 0;
  Index reps = 0;
  double mean_rho_check_sq = 0.0;
  double se = 0.0;
  double expected = 0.0;

  bool passed() const { return std::fabs(mean_rho_check_sq - expected) <= 4.0 * se; }
};

struct FreshDrawReport {
  std::string label;
  Index instances = 0;
  Index draws = 0;
  double max_abs_z = 0.0;  // max |mc - (nu^2 + delta^2)| / se over instances

  bool passed() const { return max_abs_z <= 4.0; }
};

inline DistributionReport check_distributions(const Dgp& dgp, const std::string& label, Index n, Index mask_size,
                                              Index reps, std::uint64_t seed, unsigned threads, double ks_threshold) {
  if (reps < 2) throw ConfigError("distribution checks need at least 2 replications");
  if (mask_size - 1 > dgp.p()) throw ConfigError("mask size exceeds p + 1");
  const ModelMask mask = ModelMask::prefix(dgp.p() + 1, mask_size - 1);
  mask.validate_for(n);
  const ConditionalRegression cond = conditional_regression(dgp, mask);
  std::vector<double> delta_sq(static_cast<std::size_t>(reps)), nu(delta_sq.size()), sig(delta_sq.size());
  parallel_for(reps, threads, [&](long long i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    const TrainingSample sample = sample_training(dgp, n, rng);
    const OracleQuantities q = oracle_quantities(cond, sample, mask);
    const double rss = fit_rss(sample, mask);
    const auto k = static_cast<std::size_t>(i);
    delta_sq[k] = q.delta_sq;
    nu[k] = q.nu;
    sig[k] = rss / static_cast<double>(n - mask.size());
  });

  DistributionReport r;
  r.label = label;
  r.n = n;
  r.mask_size = mask.size();
  r.reps = reps;
  r.sigma_sq_m = cond.sigma_sq_m;
  r.ks_threshold = ks_threshold;
  const double s2 = cond.sigma_sq_m;
  const double dn = static_cast<double>(n);
  const double df = static_cast<double>(n - mask.size());
  r.delta_sq_exact = std::all_of(delta_sq.begin(), delta_sq.end(),
                                 [&](double d) { return std::fabs(d - s2) <= 1e-12 * s2; });
  r.ks_delta_sq = ks_statistic(delta_sq, [&](double t) { return delta_sq_cdf(t, s2, n, mask.size()); });
  std::vector<double> nu_stat, sig_stat;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    nu_stat.push_back(nu[i] * nu[i] * dn / delta_sq[i]);
    sig_stat.push_back(sig[i] * df / s2);
  }
  r.ks_nu_sq = ks_statistic(nu_stat, [](double x) { return chi_sq_cdf(x, 1.0); });
  r.ks_sigma_hat_sq = ks_statistic(sig_stat, [&](double x) { return chi_sq_cdf(x, df); });
  const MeanSe ms = mean_and_se(nu);
  r.mean_nu = ms.mean;
  r.se_nu = ms.se;
  return r;
}

inline UnbiasednessReport check_unbiasedness(const Dgp& dgp, const std::string& label, Index n, Index mask_size,
                                             Index reps, std::uint64_t seed, unsigned threads) {
  const ModelMask mask = ModelMask::prefix(dgp.p() + 1, mask_size - 1);
  mask.validate_for(n);
  const ConditionalRegression cond = conditional_regression(dgp, mask);
  std::vector<double> values(static_cast<std::size_t>(reps));
  parallel_for(reps, threads, [&](long long i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    const TrainingSample sample = sample_training(dgp, n, rng);
    values[static_cast<std::size_t>(i)] =
        criterion_from_rss(fit_rss(sample, mask), n, mask.size(), CriterionKind::rho_check_sq);
  });
  const MeanSe ms = mean_and_se(values);
  return {label, n, mask.size(), reps, ms.mean, ms.se, expected_rho_sq(cond.sigma_sq_m, n, mask.size())};
}

inline FreshDrawReport check_fresh_draws(const Dgp& dgp, const std::string& label, Index n, Index mask_size,
                                         Index instances, Index draws, std::uint64_t seed, unsigned threads) {
  const ModelMask mask = ModelMask::prefix(dgp.p() + 1, mask_size - 1);
  const ConditionalRegression cond = conditional_regression(dgp, mask);
  std::vector<double> z(static_cast<std::size_t>(instances));
  parallel_for(instances, threads, [&](long long i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    const TrainingSample sample = sample_training(dgp, n, rng);
    const FitResult fit = fit_model(sample, mask);
    const OracleQuantities q = oracle_quantities(cond, sample, mask);
    const McEstimate mc = mc_rho_sq(dgp, fit, draws, rng);
    z[static_cast<std::size_t>(i)] = std::fabs(mc.value - q.rho_sq) / mc.se;
  });
  return {label, instances, draws, *std::max_element(z.begin(), z.end())};
}

inline Json to_json(const DistributionReport& r) {
  return {{"label", r.label},         {"n", r.n},
          {"mask_size", r.mask_size}, {"reps", r.reps},
          {"sigma_sq_m", r.sigma_sq_m}, {"ks_delta_sq", r.ks_delta_sq},
          {"ks_nu_sq", r.ks_nu_sq},   {"ks_sigma_hat_sq", r.ks_sigma_hat_sq},
          {"delta_sq_exact", r.delta_sq_exact}, {"mean_nu", r.mean_nu},
          {"se_nu", r.se_nu},         {"ks_threshold", r.ks_threshold},
          {"pass", r.passed()}};
}

inline Json to_json(const UnbiasednessReport& r) {
  return {{"label", r.label}, {"n", r.n}, {"mask_size", r.mask_size}, {"reps", r.reps},
          {"mean_rho_check_sq", r.mean_rho_check_sq}, {"se", r.se}, {"expected_rho_sq", r.expected},
          {"pass", r.passed()}};
}

inline Json to_json(const FreshDrawReport& r) {
  return {{"label", r.label}, {"instances", r.instances}, {"draws", r.draws}, {"max_abs_z", r.max_abs_z},
          {"pass", r.passed()}};
}

struct FixedModelCampaign {
  std::vector<DistributionReport> distributions;
  std::vector<UnbiasednessReport> unbiasedness;
  std::vector<FreshDrawReport> fresh_draws;

  bool passed() const {
    for (const auto& d : distributions) if (!d.passed()) return false;
    for (const auto& u : unbiasedness) if (!u.passed()) return false;
    for (const auto& f : fresh_draws) if (!f.passed()) return false;
    return true;
  }
};

inline Json to_json(const FixedModelCampaign& c) {
  Json j = {{"distributions", Json::array()}, {"unbiasedness", Json::array()}, {"fresh_draws", Json::array()}};
  for (const auto& d : c.distributions) j["distributions"].push_back(to_json(d));
  for (const auto& u : c.unbiasedness) j["unbiasedness"].push_back(to_json(u));
  for (const auto& f : c.fresh_draws) j["fresh_draws"].push_back(to_json(f));
  j["pass"] = c.passed();
  return j;
}

inline std::vector<DgpEntry> default_verification_dgps() {
  return {{"identity", verification_spec(true, 30)}, {"geometric", verification_spec(false, 30, 0.5)}};
}

/// n = 60, |m| = 15, 2e4 replications; E[rho^2] check at n = 100, |m| = 10.
inline ExperimentConfig fixed_model_defaults() {
  ExperimentConfig c;
  c.n = 60;
  c.mask_size = 15;
  c.reps = 20000;
  c.dgps = default_verification_dgps();
  return c;
}

/// Laws of delta^2, nu^2 n/delta^2 and sigma_hat^2 for a fixed model, the
/// mean of nu, unbiasedness of rho_check^2, and fresh-draw rho^2 agreement.
inline FixedModelCampaign verify_fixed_model_laws(const ExperimentConfig& cfg, unsigned threads) {
  const auto dgps = cfg.dgps.empty() ? default_verification_dgps() : cfg.dgps;
  FixedModelCampaign c;
  std::uint64_t stream = 0;
  for (const auto& entry : dgps) {
    const Dgp dgp = build_dgp(entry.spec);
    const std::uint64_t base = derive_seed(cfg.seed, stream++);
    c.distributions.push_back(
        check_distributions(dgp, entry.label, cfg.n, cfg.mask_size, cfg.reps, base, threads, cfg.ks_threshold));
    c.unbiasedness.push_back(check_unbiasedness(dgp, entry.label, cfg.unbiased_n, cfg.unbiased_mask_size,
                                                cfg.unbiased_reps, derive_seed(base, 1), threads));
    c.fresh_draws.push_back(check_fresh_draws(dgp, entry.label, cfg.unbiased_n, cfg.unbiased_mask_size,
                                              cfg.mc_instances, cfg.mc_draws, derive_seed(base, 2), threads));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Bound campaign

struct BoundsCampaign {
  std::vector<BoundRow> rows;
  std::vector<GridReport> grids;
  double grid_tolerance = 1e-9;

  /// Domain-error rows are reported but do not fail the campaign.
  bool passed() const {
    for (const auto& r : rows) if (r.status == RowStatus::fail) return false;
    for (const auto& g : grids) if (!(g.max_violation <= grid_tolerance)) return false;
    return true;
  }
};

inline Json to_json(const BoundRow& r) {
  return {{"experiment", r.experiment}, {"event", r.event},   {"label", r.label},
          {"parameter", r.parameter},   {"frequency", r.frequency}, {"bound", r.bound},
          {"bound_reported", r.bound_reported()}, {"se", r.se}, {"status", to_string(r.status)},
          {"message", r.message}};
}

inline Json to_json(const GridReport& g) {
  return {{"kind", to_string(g.kind)}, {"max_violation", g.max_violation}, {"worst", {g.worst[0], g.worst[1]}},
          {"evaluated", g.evaluated}, {"skipped", g.skipped}};
}

inline Json to_json(const BoundsCampaign& c) {
  Json j = {{"rows", Json::array()}, {"grids", Json::array()}, {"grid_tolerance", c.grid_tolerance}};
  for (const auto& r : c.rows) j["rows"].push_back(to_json(r));
  for (const auto& g : c.grids) j["grids"].push_back(to_json(g));
  j["pass"] = c.passed();
  return j;
}

inline void write_bounds_csv(const std::string& path, const std::vector<BoundRow>& rows) {
  CsvWriter w(path, {"experiment", "event", "label", "parameter", "frequency", "bound", "bound_reported", "se",
                     "status"});
  for (const auto& r : rows)
    w.write_row({r.experiment, r.event, r.label, format_double(r.parameter), format_double(r.frequency),
                 format_double(r.bound), format_double(r.bound_reported()), format_double(r.se),
                 to_string(r.status)});
}

/// Single model |m| = 15 at n = 60; nested sizes 5..20 at n = 120; 1e4 replications.
inline ExperimentConfig bounds_defaults() {
  ExperimentConfig c;
  c.n = 60;
  c.mask_size = 15;
  c.reps = 10000;
  c.collection_n = 120;
  for (Index k = 5; k <= 20; ++k) c.collection_sizes.push_back(k);
  c.dgps = default_verification_dgps();
  return c;
}

/// Single-model experiments use the first `mask_size` columns at sample size
/// `n`; collection experiments use nested prefix models at `collection_n`.
inline BoundsCampaign verify_bounds(const ExperimentConfig& cfg, unsigned threads) {
  const auto dgps = cfg.dgps.empty() ? default_verification_dgps() : cfg.dgps;
  std::vector<Experiment> single, multi;
  const auto requested = [&](Experiment e) {
    if (cfg.experiments.empty()) return true;
    return std::find(cfg.experiments.begin(), cfg.experiments.end(), to_string(e)) != cfg.experiments.end();
  };
  for (const auto& name : cfg.experiments) experiment_from_string(name);
  for (Experiment e : kAllExperiments) {
    if (!requested(e)) continue;
    (is_single_model(e) ? single : multi).push_back(e);
  }

  BoundsCampaign c;
  std::uint64_t stream = 0;
  for (const auto& entry : dgps) {
    const Dgp dgp = build_dgp(entry.spec);
    const Index width = dgp.p() + 1;
    if (!single.empty()) {
      McSetup s;
      s.label = entry.label;
      s.n = cfg.n;
      s.collection.masks.push_back(ModelMask::prefix(width, cfg.mask_size - 1));
      s.reps = cfg.reps;
      s.grid = cfg.grid;
      s.seed = derive_seed(cfg.seed, stream++);
      s.alpha = cfg.alpha;
      s.threads = threads;
      const auto rows = mc_bound_check(single, dgp, s);
      c.rows.insert(c.rows.end(), rows.begin(), rows.end());
    }
    if (!multi.empty()) {
      McSetup s;
      s.label = entry.label;
      s.n = cfg.collection_n;
      for (Index size : cfg.collection_sizes) {
        if (size - 1 > dgp.p()) throw ConfigError("collection size exceeds p + 1");
        s.collection.masks.push_back(ModelMask::prefix(width, size - 1));
      }
      s.reps = cfg.reps;
      s.grid = cfg.grid;
      s.seed = derive_seed(cfg.seed, stream++);
      s.alpha = cfg.alpha;
      s.threads = threads;
      const auto rows = mc_bound_check(multi, dgp, s);
      c.rows.insert(c.rows.end(), rows.begin(), rows.end());
    }
  }
  for (InequalityKind k : kAllInequalities) c.grids.push_back(check_inequality_grid(k));
  return c;
}

// ---------------------------------------------------------------------------
// Real data

struct IntervalRow {
  std::size_t row = 0;
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct FitPredictReport {
  ModelMask selected;
  double rho_hat_sq = 0.0;
  double delta_hat = 0.0;
  double alpha = 0.05;
  bool degenerate = false;
  std::vector<IntervalRow> intervals;
};

/// First column is the response, remaining columns are regressors; an
/// intercept column is prepended.
inline TrainingSample sample_from_table(const NumericTable& table) {
  if (table.header.size() < 2) throw CsvError("need a response column and at least one regressor", 1, 1);
  const Index n = static_cast<Index>(table.rows.size());
  const Index p = static_cast<Index>(table.header.size()) - 1;
  if (n < 3) throw CsvError("need at least 3 data rows, found " + std::to_string(n), 1, 1);
  TrainingSample s;
  s.X.resize(n, p + 1);
  s.Y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& r = table.rows[static_cast<std::size_t>(i)];
    s.Y[i] = r[0];
    s.X(i, 0) = 1.0;
    for (Index j = 0; j < p; ++j) s.X(i, j + 1) = r[static_cast<std::size_t>(j + 1)];
  }
  return s;
}

inline FitPredictReport fit_and_predict(const TrainingSample& sample, const ExperimentConfig& cfg,
                                        const NumericTable* future) {
  const Index width = sample.X.cols();
  ModelMask selected;
  if (!cfg.candidates.empty()) {
    ModelCollection coll;
    for (const auto& cols : cfg.candidates) {
      for (Index j : cols)
        if (j < 1 || j >= width)
          throw ConfigError("candidate column " + std::to_string(j) + " outside [1, " + std::to_string(width - 1) + "]");
      coll.masks.push_back(ModelMask::from_indices(width, cols));
    }
    for (const auto& m : coll.masks)
      if (!(m.size() < sample.n() - 1))
        throw ConfigError("candidate " + m.to_string() + " violates |m| < n - 1 for n = " + std::to_string(sample.n()));
    selected = select_min(sample, coll).mask;
  } else if (cfg.use_blocks) {
    if (cfg.blocks.count * cfg.blocks.width > width - 1)
      throw ConfigError("blocks cover more regressors than the data file has");
    if (!(1 + cfg.blocks.count * cfg.blocks.width < sample.n() - 1))
      throw ConfigError("full block model violates |M| < n - 1 for n = " + std::to_string(sample.n()));
    const GreedyPath path = greedy_block_path(sample, consecutive_blocks(cfg.blocks.count, cfg.blocks.width));
    selected = select_on_path(sample, path).mask;
  } else {
    selected = ModelMask::full(width);
    if (!(selected.size() < sample.n() - 1))
      throw ConfigError("full model violates |m| < n - 1 for n = " + std::to_string(sample.n()));
  }

  const FitResult fit = fit_model(sample, selected);
  FitPredictReport rep;
  rep.selected = selected;
  rep.rho_hat_sq = criterion_value(fit, CriterionKind::rho_hat_sq);
  rep.delta_hat = std::sqrt(rep.rho_hat_sq);
  rep.alpha = cfg.alpha;
  rep.degenerate = rep.delta_hat == 0.0;
  if (future) {
    if (static_cast<Index>(future->header.size()) != width - 1)
      throw CsvError("future file has " + std::to_string(future->header.size()) + " columns, expected " +
                         std::to_string(width - 1),
                     1, 1);
    for (std::size_t i = 0; i < future->rows.size(); ++i) {
      VectorXd x(width);
      x[0] = 1.0;
      for (Index j = 1; j < width; ++j) x[j] = future->rows[i][static_cast<std::size_t>(j - 1)];
      const PredictionInterval iv = prediction_interval(fit, x, cfg.alpha);
      rep.intervals.push_back({i + 1, iv.center, iv.lower(), iv.upper()});
    }
  }
  return rep;
}

inline Json to_json(const FitPredictReport& r) {
  Json cols = Json::array();
  for (Index j : r.selected.indices()) cols.push_back(j);
  return {{"selected_columns", cols},   {"model_size", r.selected.size()}, {"rho_hat_sq", r.rho_hat_sq},
          {"delta_hat", r.delta_hat},   {"alpha", r.alpha},                {"degenerate", r.degenerate},
          {"future_rows", r.intervals.size()}};
}

inline void write_intervals_csv(const std::string& path, const std::vector<IntervalRow>& rows) {
  CsvWriter w(path, {"row", "center", "lower", "upper"});
  for (const auto& r : rows)
    w.write_row({std::to_string(r.row), format_double(r.center), format_double(r.lower), format_double(r.upper)});
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace selpred
