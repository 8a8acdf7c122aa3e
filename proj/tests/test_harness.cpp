#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "selpred/harness.hpp"
#include "support.hpp"

using namespace selpred;
using Catch::Approx;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("selpred_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

void write_sample_csv(const std::filesystem::path& path, const TrainingSample& s) {
  std::ofstream out(path);
  out << "y";
  for (Index j = 1; j < s.X.cols(); ++j) out << ",x" << j;
  out << '\n';
  for (Index i = 0; i < s.n(); ++i) {
    out << format_double(s.Y[i]);
    for (Index j = 1; j < s.X.cols(); ++j) out << ',' << format_double(s.X(i, j));
    out << '\n';
  }
}

ExperimentConfig small_study() {
  ExperimentConfig c;
  DgpSpec spec = testing_support::random_spec(12, 4, false);
  c.dgps.push_back({"small", spec});
  c.n = 60;
  c.blocks = {4, 3};
  c.reps = 6;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("CSV parsing reports row and column of bad cells") {
  std::istringstream ok("y,x1\n1.5,2\n-3e-2, 4 \n");
  const NumericTable t = parse_numeric_csv(ok);
  CHECK(t.header == std::vector<std::string>{"y", "x1"});
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][0] == -0.03);

  std::istringstream bad("y,x1\n1,2\n3,abc\n");
  try {
    parse_numeric_csv(bad);
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.row() == 3);
    CHECK(e.col() == 2);
  }
  std::istringstream missing("y,x1\n1,\n");
  CHECK_THROWS_AS(parse_numeric_csv(missing), CsvError);
  std::istringstream ragged("y,x1\n1,2,3\n");
  CHECK_THROWS_AS(parse_numeric_csv(ragged), CsvError);
  std::istringstream nan("y,x1\n1,nan\n");
  CHECK_THROWS_AS(parse_numeric_csv(nan), CsvError);
  CHECK(parse_double(format_double(0.1 + 0.2), 1, 1) == 0.1 + 0.2);
}

TEST_CASE("config parsing and validation") {
  const Json j = Json::parse(R"({"dgps": [{"verification": "identity", "p": 20},
                                          {"preset": "sparse", "p": 40},
                                          {"label": "c", "beta": [1, 2], "covariance": {"lower": [[1], [0.5, 2]]}}],
                                "n": 80, "blocks": {"count": 4, "width": 5}, "alpha": 0.1, "seed": 9})");
  const ExperimentConfig c = config_from_json(j);
  REQUIRE(c.dgps.size() == 3);
  CHECK(c.dgps[0].spec.p() == 20);
  CHECK(c.dgps[1].label == "sparse");
  CHECK(std::get<MatrixXd>(c.dgps[2].spec.sigma_x)(0, 1) == 0.5);
  CHECK(c.blocks.count == 4);
  CHECK(c.use_blocks);
  CHECK(c.seed == 9u);
  const ExperimentConfig over = config_from_json(Json::parse(R"({"dgp": {"verification": "geometric"}})"), study_defaults(false));
  REQUIRE(over.dgps.size() == 1);
  CHECK(over.dgps[0].label == "geometric");
  CHECK(over.coverage_min_target == 0.90);
  const ExperimentConfig retarget = config_from_json(Json::parse(R"({"targets": {"median_coverage": [0.9, 1.0]}})"), study_defaults(false));
  CHECK(retarget.dgps.size() == 2);
  CHECK(retarget.coverage_min_target < 0.0);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"alpha": 1.5})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"n": "many"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"dgp": {"preset": "dense"}})")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("infeasible study configurations are rejected before any compute") {
  ExperimentConfig c = small_study();
  c.blocks = {5, 3};
  CHECK_THROWS_AS(simulate(c, 1), ConfigError);
  c = small_study();
  c.n = 13;
  CHECK_THROWS_AS(simulate(c, 1), ConfigError);
}

TEST_CASE("one replication with one block has two model rows") {
  StudyOptions o;
  o.n = 30;
  o.blocks = {1, 3};
  o.reps = 1;
  const StudyResult r = run_block_study(build_dgp(testing_support::random_spec(3, 1, false)), o);
  REQUIRE(r.reports.size() == 1);
  CHECK(r.reports[0].rows.size() == 2);
}

TEST_CASE("study bookkeeping: one selected row, coverage in [0, 1], path minimum") {
  const StudyCampaign c = simulate(small_study(), 1);
  for (const auto& rep : c.results[0].reports) {
    int flagged = 0;
    for (const auto& row : rep.rows) {
      flagged += row.selected;
      CHECK(row.coverage >= 0.0);
      CHECK(row.coverage <= 1.0);
    }
    CHECK(flagged == 1);
    CHECK(rep.coverage_selected >= rep.min_coverage);
  }
}

TEST_CASE("study rho^2 matches the training-error oracle route") {
  const ExperimentConfig c = small_study();
  const Dgp d = build_dgp(c.dgps[0].spec);
  StudyOptions o;
  o.n = c.n;
  o.blocks = c.blocks;
  o.reps = 1;
  o.seed = 5;
  const ReplicationReport rep = run_study_replication(d, o, consecutive_blocks(4, 3), 0);
  Rng rng = make_stream(5, 0);
  const TrainingSample s = sample_training(d, c.n, rng);
  const GreedyPath path = greedy_block_path(s, consecutive_blocks(4, 3));
  for (std::size_t i = 0; i < path.visited.size(); ++i)
    CHECK(rep.rows[i].rho_sq == Approx(oracle_quantities(d, s, path.visited[i]).rho_sq).epsilon(1e-9));
}

TEST_CASE("aggregate JSON does not depend on the thread count") {
  const ExperimentConfig c = small_study();
  CHECK(to_json(simulate(c, 1)).dump() == to_json(simulate(c, 4)).dump());

  ExperimentConfig b = bounds_defaults();
  b.reps = 1000;
  b.experiments = {"rho_hat_relative", "tv_selected"};
  CHECK(to_json(verify_bounds(b, 1)).dump() == to_json(verify_bounds(b, 3)).dump());
}

TEST_CASE("unknown experiment names are configuration errors") {
  ExperimentConfig b = bounds_defaults();
  b.reps = 1000;
  b.experiments = {"thm99"};
  CHECK_THROWS_AS(verify_bounds(b, 1), std::invalid_argument);
}

TEST_CASE("tv_single outside its domain yields a domain-error row and the campaign continues") {
  ExperimentConfig b = bounds_defaults();
  b.reps = 1000;
  b.grid = {0.5, 0.8};
  b.experiments = {"tv_single", "rho_hat_relative"};
  b.dgps.resize(1);
  const BoundsCampaign c = verify_bounds(b, 1);
  int domain = 0;
  for (const auto& r : c.rows) domain += r.status == RowStatus::domain_error;
  CHECK(domain == 1);
  CHECK(c.rows.size() == 4);
  CHECK(c.passed());
}

TEST_CASE("fit-predict from a file matches the in-process selection") {
  const auto dir = temp_dir("fit");
  const Dgp d = build_dgp(testing_support::random_spec(12, 6, false));
  const TrainingSample s = sample_training(d, 80, 3);
  write_sample_csv(dir / "train.csv", s);
  const TrainingSample back = sample_from_table(read_numeric_csv((dir / "train.csv").string()));
  CHECK(back.X == s.X);
  CHECK(back.Y == s.Y);

  ExperimentConfig c;
  c.use_blocks = true;
  c.blocks = {4, 3};
  const FitPredictReport r = fit_and_predict(back, c, nullptr);
  const GreedyPath path = greedy_block_path(s, consecutive_blocks(4, 3));
  CHECK(r.selected == select_on_path(s, path).mask);
  CHECK(r.delta_hat == Approx(std::sqrt(criterion_value(fit_model(s, r.selected), CriterionKind::rho_hat_sq))));

  ExperimentConfig cand;
  cand.candidates = {{1, 2}, {1, 2, 3, 4}, {5}};
  ModelCollection coll;
  for (const auto& cols : cand.candidates) coll.masks.push_back(ModelMask::from_indices(13, cols));
  CHECK(fit_and_predict(s, cand, nullptr).selected == select_min(s, coll).mask);
  cand.candidates = {{13}};
  CHECK_THROWS_AS(fit_and_predict(s, cand, nullptr), ConfigError);
}

TEST_CASE("fit-predict intervals for future rows") {
  TrainingSample s = testing_support::random_sample(10, 2, 2);
  s.Y = s.X * Eigen::Vector3d(0.5, 1.0, 2.0);
  NumericTable fut;
  fut.header = {"x1", "x2"};
  fut.rows = {{s.X(4, 1), s.X(4, 2)}};
  const FitPredictReport r = fit_and_predict(s, ExperimentConfig{}, &fut);
  REQUIRE(r.intervals.size() == 1);
  CHECK(r.intervals[0].center == Approx(s.Y[4]).margin(1e-10));
  CHECK(r.intervals[0].upper - r.intervals[0].lower < 1e-6);
  fut.header = {"x1"};
  fut.rows = {{1.0}};
  CHECK_THROWS_AS(fit_and_predict(s, ExperimentConfig{}, &fut), CsvError);
  const TrainingSample wide = testing_support::random_sample(5, 4, 1);
  CHECK_THROWS_AS(fit_and_predict(wide, ExperimentConfig{}, nullptr), ConfigError);
}

TEST_CASE("study CSV writers emit the documented columns") {
  const auto dir = temp_dir("csv");
  const StudyCampaign c = simulate(small_study(), 1);
  write_path_csv((dir / "path.csv").string(), c.results[0].reports);
  const NumericTable t = read_numeric_csv((dir / "path.csv").string());
  CHECK(t.header == std::vector<std::string>{"rep", "step", "size", "rho_hat_sq", "rho_sq", "coverage", "selected"});
  CHECK(t.rows.size() == 6u * 5u);
}
