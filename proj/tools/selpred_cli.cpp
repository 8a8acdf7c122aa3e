// selpred: simulate | verify-prop21 | verify-bounds | fit-predict
//
// Exit codes: 0 all checks pass, 1 a statistical check failed, 2 usage,
// configuration or input error.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "selpred/harness.hpp"

namespace {

using namespace selpred;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<Index> reps;
  std::optional<std::string> out;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--reps", o.reps, "Replication count")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (default: $SELPRED_THREADS or all cores)");
}

ExperimentConfig resolve(const CommonOptions& o, ExperimentConfig base) {
  ExperimentConfig c = o.config.empty() ? config_from_json(Json::object(), std::move(base))
                                        : load_config(o.config, std::move(base));
  if (o.seed) c.seed = *o.seed;
  if (o.reps) c.reps = *o.reps;
  if (o.out) c.out = *o.out;
  return c;
}

std::filesystem::path prepare_out(const ExperimentConfig& c) {
  std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  return dir;
}

Json run_header(const std::string& verb, const ExperimentConfig& c) {
  return {{"verb", verb}, {"seed", c.seed}, {"reps", c.reps}};
}

int report(const Json& aggregate, const std::filesystem::path& dir, bool pass) {
  write_json((dir / "aggregate.json").string(), aggregate);
  std::cout << (pass ? "PASS" : "FAIL") << "  " << (dir / "aggregate.json").string() << '\n';
  return pass ? 0 : 1;
}

int cmd_simulate(const CommonOptions& o, bool full_scale) {
  const ExperimentConfig c = resolve(o, study_defaults(full_scale));
  const auto dir = prepare_out(c);
  const StudyCampaign campaign = simulate(c, thread_count_from_env(o.threads));
  for (const auto& r : campaign.results) {
    write_path_csv((dir / (r.summary.label + "_path.csv")).string(), r.reports);
    write_replication_csv((dir / (r.summary.label + "_replications.csv")).string(), r.reports);
  }
  Json agg = run_header("simulate", c);
  agg["n"] = c.n;
  agg["blocks"] = {{"count", c.blocks.count}, {"width", c.blocks.width}};
  agg["alpha"] = c.alpha;
  agg["result"] = to_json(campaign);
  for (const auto& s : agg["result"]["studies"])
    std::cout << s["label"].get<std::string>() << ": median coverage " << s["median_coverage"].get<double>()
              << ", min " << s["min_coverage"].get<double>() << ", mean(rho^2 - rho_hat^2) "
              << s["mean_rho_sq_minus_rho_hat_sq"].get<double>() << '\n';
  return report(agg, dir, campaign.passed());
}

int cmd_fixed_model(const CommonOptions& o) {
  const ExperimentConfig c = resolve(o, fixed_model_defaults());
  const auto dir = prepare_out(c);
  const FixedModelCampaign campaign = verify_fixed_model_laws(c, thread_count_from_env(o.threads));
  Json agg = run_header("verify-prop21", c);
  agg["result"] = to_json(campaign);
  for (const auto& d : campaign.distributions)
    std::cout << d.label << ": KS delta^2 " << d.ks_delta_sq << ", nu^2 n/delta^2 " << d.ks_nu_sq
              << ", sigma_hat^2 " << d.ks_sigma_hat_sq << ", mean nu " << d.mean_nu << " (se " << d.se_nu << ")\n";
  return report(agg, dir, campaign.passed());
}

int cmd_bounds(const CommonOptions& o) {
  const ExperimentConfig c = resolve(o, bounds_defaults());
  const auto dir = prepare_out(c);
  const BoundsCampaign campaign = verify_bounds(c, thread_count_from_env(o.threads));
  write_bounds_csv((dir / "bounds.csv").string(), campaign.rows);
  Json agg = run_header("verify-bounds", c);
  agg["result"] = to_json(campaign);
  std::size_t fails = 0, domain = 0;
  for (const auto& r : campaign.rows) {
    fails += r.status == RowStatus::fail;
    domain += r.status == RowStatus::domain_error;
  }
  std::cout << campaign.rows.size() << " rows, " << fails << " failed, " << domain << " domain errors; "
            << campaign.grids.size() << " inequality grids\n";
  return report(agg, dir, campaign.passed());
}

int cmd_fit_predict(const CommonOptions& o, const std::string& data, const std::string& future) {
  ExperimentConfig c = resolve(o, ExperimentConfig{});
  if (!data.empty()) c.data = data;
  if (!future.empty()) c.future = future;
  if (c.data.empty()) throw ConfigError("fit-predict needs --data or a 'data' entry in the config");
  const auto dir = prepare_out(c);
  const TrainingSample sample = sample_from_table(read_numeric_csv(c.data));
  std::optional<NumericTable> fut;
  if (!c.future.empty()) fut = read_numeric_csv(c.future);
  const FitPredictReport rep = fit_and_predict(sample, c, fut ? &*fut : nullptr);
  if (fut) write_intervals_csv((dir / "intervals.csv").string(), rep.intervals);
  Json agg = {{"verb", "fit-predict"}, {"result", to_json(rep)}};
  std::cout << "selected " << rep.selected.to_string() << ", rho_hat^2 " << rep.rho_hat_sq << ", delta_hat "
            << rep.delta_hat << '\n';
  write_json((dir / "aggregate.json").string(), agg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares model selection with prediction intervals"};
  app.require_subcommand(1);

  CommonOptions sim_opts, prop_opts, bound_opts, fit_opts;
  bool full_scale = false;
  std::string data, future;

  auto* sim = app.add_subcommand("simulate", "Greedy block-search coverage study");
  add_common(sim, sim_opts);
  sim->add_flag("--full-scale", full_scale, "n = 2000, p = 1000, 50 blocks of 20");

  auto* prop = app.add_subcommand("verify-prop21", "Distributional checks for a fixed model");
  add_common(prop, prop_opts);

  auto* bnd = app.add_subcommand("verify-bounds", "Monte Carlo bound checks and inequality grids");
  add_common(bnd, bound_opts);

  auto* fit = app.add_subcommand("fit-predict", "Select a model on a CSV file and emit prediction intervals");
  add_common(fit, fit_opts);
  fit->add_option("--data", data, "Training CSV, response in the first column")->check(CLI::ExistingFile);
  fit->add_option("--future", future, "Regressor rows to predict")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_opts, full_scale);
    if (*prop) return cmd_fixed_model(prop_opts);
    if (*bnd) return cmd_bounds(bound_opts);
    if (*fit) return cmd_fit_predict(fit_opts, data, future);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CsvError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
