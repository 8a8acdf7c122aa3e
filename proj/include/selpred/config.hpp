#pragma once

// JSON configuration: DGP specifications (explicit, study presets or the
// verification family) and the experiment settings shared by the CLI verbs.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selpred/dgp.hpp"

namespace selpred {

using Json = nlohmann::json;

/// Malformed or infeasible configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// DgpSpec <-> JSON

inline Json covariance_to_json(const Covariance& cov) {
  if (const auto* g = std::get_if<GeometricCovariance>(&cov)) return {{"family", "geometric"}, {"r", g->r}};
  const MatrixXd& m = std::get<MatrixXd>(cov);
  Json lower = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j <= i; ++j) row.push_back(m(i, j));
    lower.push_back(row);
  }
  return {{"lower", lower}};
}

inline Covariance covariance_from_json(const Json& j, Index p) {
  if (j.contains("family")) {
    if (j.at("family").get<std::string>() != "geometric")
      throw ConfigError("covariance family '" + j.at("family").get<std::string>() + "' is not supported");
    return GeometricCovariance{j.value("r", 0.5)};
  }
  if (!j.contains("lower")) throw ConfigError("covariance needs either 'family' or 'lower'");
  const Json& lower = j.at("lower");
  if (!lower.is_array() || static_cast<Index>(lower.size()) != p)
    throw ConfigError("covariance 'lower' must have " + std::to_string(p) + " rows");
  MatrixXd m(p, p);
  for (Index i = 0; i < p; ++i) {
    const Json& row = lower.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != i + 1)
      throw ConfigError("covariance 'lower' row " + std::to_string(i) + " must have " + std::to_string(i + 1) +
                        " entries");
    for (Index k = 0; k <= i; ++k) m(i, k) = m(k, i) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

inline Json to_json(const DgpSpec& spec) {
  Json beta = Json::array(), gamma = Json::array();
  for (Index j = 0; j < spec.p(); ++j) {
    beta.push_back(spec.beta[j]);
    gamma.push_back(spec.gamma[j]);
  }
  return {{"beta0", spec.beta0},
          {"beta", beta},
          {"gamma", gamma},
          {"sigma_u", spec.sigma_u},
          {"covariance", covariance_to_json(spec.sigma_x)}};
}

inline VectorXd vector_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string("'") + name + "' must be an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

/// Regressor family used by the verification campaigns: coefficients
/// 1/sqrt(j), alternating means, unit error variance. Column j (1-based).
inline DgpSpec verification_spec(bool identity_covariance, Index p, double r = 0.5) {
  DgpSpec spec;
  spec.beta0 = 0.5;
  spec.beta.resize(p);
  spec.gamma.resize(p);
  for (Index j = 0; j < p; ++j) {
    spec.beta[j] = 1.0 / std::sqrt(static_cast<double>(j + 1));
    spec.gamma[j] = (j % 2 == 0 ? 0.5 : -0.25);
  }
  spec.sigma_u = 1.0;
  if (identity_covariance)
    spec.sigma_x = MatrixXd(MatrixXd::Identity(p, p));
  else
    spec.sigma_x = GeometricCovariance{r};
  return spec;
}

struct DgpEntry {
  std::string label;
  DgpSpec spec;
};

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "sparse") return Scenario::sparse;
  if (s == "nonsparse") return Scenario::nonsparse;
  throw ConfigError("unknown preset '" + s + "' (expected sparse or nonsparse)");
}

inline ScenarioParams scenario_from_json(const Json& j) {
  ScenarioParams params = default_scenario(scenario_from_string(j.at("preset").get<std::string>()),
                                           j.value("p", Index{250}));
  params.snr = j.value("snr", params.snr);
  params.mean_target = j.value("mean_target", params.mean_target);
  params.r = j.value("r", params.r);
  params.sigma_u = j.value("sigma_u", params.sigma_u);
  params.beta0 = j.value("beta0", params.beta0);
  params.beta_seed = j.value("beta_seed", params.beta_seed);
  params.gamma_seed = j.value("gamma_seed", params.gamma_seed);
  if (j.contains("arch")) {
    params.arch.omega = j.at("arch").value("omega", params.arch.omega);
    params.arch.alpha = j.at("arch").value("alpha", params.arch.alpha);
  }
  return params;
}

/// Accepts {"preset": ...}, {"verification": "identity"|"geometric"} or an
/// explicit specification with beta, gamma, sigma_u and covariance.
inline DgpEntry dgp_entry_from_json(const Json& j) {
  DgpEntry e;
  if (j.contains("preset")) {
    e.label = j.value("label", j.at("preset").get<std::string>());
    e.spec = make_scenario_spec(scenario_from_json(j));
    return e;
  }
  if (j.contains("verification")) {
    const std::string kind = j.at("verification").get<std::string>();
    if (kind != "identity" && kind != "geometric")
      throw ConfigError("verification DGP must be 'identity' or 'geometric', got '" + kind + "'");
    e.label = j.value("label", kind);
    e.spec = verification_spec(kind == "identity", j.value("p", Index{30}), j.value("r", 0.5));
    return e;
  }
  e.label = j.value("label", std::string("custom"));
  e.spec.beta0 = j.value("beta0", 0.0);
  e.spec.beta = vector_from_json(j.at("beta"), "beta");
  e.spec.gamma = j.contains("gamma") ? vector_from_json(j.at("gamma"), "gamma") : VectorXd::Zero(e.spec.p());
  e.spec.sigma_u = j.value("sigma_u", 1.0);
  e.spec.sigma_x = j.contains("covariance") ? covariance_from_json(j.at("covariance"), e.spec.p())
                                            : Covariance{GeometricCovariance{0.5}};
  return e;
}

struct BlockLayout {
  Index count = 25;
  Index width = 10;
};

struct ExperimentConfig {
  std::vector<DgpEntry> dgps;
  Index n = 500;
  BlockLayout blocks;
  double alpha = 0.05;
  Index reps = 100;
  std::uint64_t seed = 20240601;
  std::vector<double> grid{0.25, 0.5, std::numbers::ln2};
  Index mask_size = 15;              // |m| of the fixed model in single-model checks
  Index unbiased_n = 100;            // sample size of the E[rho^2] check
  Index unbiased_mask_size = 10;
  Index unbiased_reps = 20000;
  Index mc_instances = 20;           // fresh-draw rho^2 cross-checks
  Index mc_draws = 20000;
  double ks_threshold = 0.015;
  Index collection_n = 120;
  std::vector<Index> collection_sizes;  // model sizes |m| of the nested collection
  std::vector<std::string> experiments; // empty means all
  std::vector<double> coverage_median_range;  // optional [lo, hi] target
  double coverage_min_target = -1.0;          // optional, < 0 disables
  std::string out = "out";
  // fit-predict
  std::string data;
  std::string future;
  std::vector<std::vector<Index>> candidates;  // explicit masks (regressor columns 1..p)
  bool use_blocks = false;
};

/// Fields absent from `j` keep their values from `base`.
inline ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {}) {
  ExperimentConfig c = std::move(base);
  try {
    if (j.contains("dgp") || j.contains("dgps")) c.dgps.clear();
    if (j.contains("dgp")) c.dgps.push_back(dgp_entry_from_json(j.at("dgp")));
    if (j.contains("dgps"))
      for (const auto& d : j.at("dgps")) c.dgps.push_back(dgp_entry_from_json(d));
    c.n = j.value("n", c.n);
    if (j.contains("blocks")) {
      c.blocks.count = j.at("blocks").value("count", c.blocks.count);
      c.blocks.width = j.at("blocks").value("width", c.blocks.width);
      c.use_blocks = true;
    }
    c.alpha = j.value("alpha", c.alpha);
    c.reps = j.value("reps", c.reps);
    c.seed = j.value("seed", c.seed);
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    c.mask_size = j.value("mask_size", c.mask_size);
    c.unbiased_n = j.value("unbiased_n", c.unbiased_n);
    c.unbiased_mask_size = j.value("unbiased_mask_size", c.unbiased_mask_size);
    c.unbiased_reps = j.value("unbiased_reps", c.unbiased_reps);
    c.mc_instances = j.value("mc_instances", c.mc_instances);
    c.mc_draws = j.value("mc_draws", c.mc_draws);
    c.ks_threshold = j.value("ks_threshold", c.ks_threshold);
    c.collection_n = j.value("collection_n", c.collection_n);
    if (j.contains("collection_sizes")) c.collection_sizes = j.at("collection_sizes").get<std::vector<Index>>();
    if (j.contains("experiments")) c.experiments = j.at("experiments").get<std::vector<std::string>>();
    if (j.contains("targets")) {
      const Json& t = j.at("targets");
      c.coverage_median_range.clear();
      c.coverage_min_target = -1.0;
      if (t.contains("median_coverage")) c.coverage_median_range = t.at("median_coverage").get<std::vector<double>>();
      c.coverage_min_target = t.value("min_coverage", c.coverage_min_target);
    }
    c.out = j.value("out", c.out);
    c.data = j.value("data", c.data);
    c.future = j.value("future", c.future);
    if (j.contains("candidates")) c.candidates = j.at("candidates").get<std::vector<std::vector<Index>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (c.collection_sizes.empty())
    for (Index k = 5; k <= 20; ++k) c.collection_sizes.push_back(k);
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (c.reps < 1) throw ConfigError("reps must be >= 1");
  if (!c.coverage_median_range.empty() && c.coverage_median_range.size() != 2)
    throw ConfigError("targets.median_coverage must be [lo, hi]");
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

}  // namespace selpred
