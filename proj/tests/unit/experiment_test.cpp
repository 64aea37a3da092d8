#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "noregret/error.hpp"
#include "noregret/experiment.hpp"

using namespace noregret;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("noregret_experiment_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

json baseline_spec(const std::string& out) {
  return {{"mode", "run-baseline"},
          {"scenario", {{"env_kind", "FOL"}, {"d", 3}, {"T", 100}, {"process", "gaussian"}}},
          {"algorithms", {"hedge", "ftl"}},
          {"replicates", 100},
          {"output_dir", out},
          {"seed", 3}};
}

std::string config_error(const json& j) {
  try {
    validate(experiment_spec_from_json(j));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ExperimentSpec, ParsesDefaults) {
  const auto s = experiment_spec_from_json({{"mode", "run-baseline"}, {"algorithms", {"hedge"}}});
  EXPECT_EQ(s.mode, ExperimentMode::kRunBaseline);
  EXPECT_EQ(s.replicates, 100u);
  EXPECT_EQ(s.scenario.horizon, 100);
  EXPECT_EQ(parse_experiment_mode(to_string(ExperimentMode::kVerifyTheory)), ExperimentMode::kVerifyTheory);
}

TEST(ExperimentSpec, ErrorsNameTheField) {
  json j = baseline_spec("x");
  j["replicates"] = 0;
  EXPECT_NE(config_error(j).find("replicates"), std::string::npos);

  j = baseline_spec("x");
  j["eval"] = {{"T", 100}};
  EXPECT_NE(config_error(j).find("eval"), std::string::npos);

  j = baseline_spec("x");
  j["scenario"]["d"] = 1;
  EXPECT_NE(config_error(j).find("scenario.d"), std::string::npos);

  j = baseline_spec("x");
  j["algorithms"] = {"transformer"};
  EXPECT_NE(config_error(j).find("algorithms"), std::string::npos);

  j = baseline_spec("x");
  j["colour"] = "blue";
  EXPECT_NE(config_error(j).find("colour"), std::string::npos);

  EXPECT_NE(config_error({{"mode", "eval-model"}}).find("checkpoint"), std::string::npos);
  EXPECT_NE(config_error({{"algorithms", {"hedge"}}}).find("mode"), std::string::npos);
  EXPECT_NE(config_error({{"mode", "fly"}}).find("mode"), std::string::npos);
}

TEST(Experiment, ReplicateCountZeroIsAConfigError) {
  json j = baseline_spec(scratch("zero").string());
  j["replicates"] = 0;
  EXPECT_THROW(validate(experiment_spec_from_json(j)), ConfigError);
}

TEST(Experiment, HedgeBaselineIsSublinear) {
  const auto dir = scratch("hedge");
  const auto spec = experiment_spec_from_json(baseline_spec(dir.string()));
  ASSERT_EQ(run_experiment(spec), 0);
  const json s = read_json(dir / "summary.json");
  bool found = false;
  for (const auto& r : s.at("runs")) {
    if (r.at("algorithm") == "hedge") {
      found = true;
      EXPECT_LT(r.at("beta_hat").get<double>(), 1.0);
      EXPECT_EQ(r.at("replicates").get<int>(), 100);
    }
  }
  EXPECT_TRUE(found);
  fs::remove_all(dir);
}

TEST(Experiment, CsvIsDeterministicAndSummaryRoundTrips) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  json j = baseline_spec("");
  j["replicates"] = 20;
  j["scenario"]["T"] = 30;
  j["scenario"]["processes"] = {"uniform", "alternating"};
  j["scenario"].erase("process");
  auto spec = experiment_spec_from_json(j);
  RunOptions o1, o2;
  o1.output_dir = a.string();
  o2.output_dir = b.string();
  o2.workers = 3;
  ASSERT_EQ(run_experiment(spec, o1), 0);
  ASSERT_EQ(run_experiment(spec, o2), 0);
  const std::string csv = slurp(a / "curves.csv");
  EXPECT_EQ(csv, slurp(b / "curves.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "run_id,algorithm,process,replicate,t,regret");

  const json s = read_json(a / "summary.json");
  const auto finals = read_final_regrets((a / "curves.csv").string());
  std::map<std::string, std::vector<double>> by_id(finals.begin(), finals.end());
  ASSERT_EQ(s.at("runs").size(), 4u);
  for (const auto& r : s.at("runs")) {
    const auto& f = by_id.at(r.at("run_id").get<std::string>());
    ASSERT_EQ(f.size(), 20u);
    double mx = f.front(), sum = 0;
    for (double v : f) {
      mx = std::max(mx, v);
      sum += v;
    }
    EXPECT_EQ(r.at("max_LR").get<double>(), mx);
    EXPECT_NEAR(r.at("avg_LR").get<double>(), sum / 20, 1e-12 * (1 + std::abs(sum)));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, SeedOverrideChangesCurves) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  json j = baseline_spec("");
  j["replicates"] = 3;
  j["scenario"]["T"] = 10;
  auto spec = experiment_spec_from_json(j);
  RunOptions o1, o2;
  o1.output_dir = a.string();
  o2.output_dir = b.string();
  o2.seed = 99;
  run_experiment(spec, o1);
  run_experiment(spec, o2);
  EXPECT_NE(slurp(a / "curves.csv"), slurp(b / "curves.csv"));
  EXPECT_EQ(read_json(b / "summary.json").at("seed").get<std::uint64_t>(), 99u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, TrainThenEvaluateAtLongerHorizon) {
  const auto dir = scratch("train");
  const json train_spec = {{"mode", "train-transformer"},
                           {"train", {{"iterations", 2}, {"M", 4}, {"L", 3}, {"T", 25}, {"batch_size", 50}}},
                           {"replicates", 5},
                           {"output_dir", (dir / "train").string()}};
  ASSERT_EQ(run_experiment(experiment_spec_from_json(train_spec)), 0);
  EXPECT_TRUE(fs::exists(dir / "train" / "model.json"));
  EXPECT_TRUE(fs::exists(dir / "train" / "train_log.jsonl"));
  const json ts = read_json(dir / "train" / "summary.json");
  EXPECT_TRUE(ts.contains("final_diagnostics"));
  EXPECT_TRUE(ts.contains("ftrl_equivalence_gap"));

  const json eval_spec = {{"mode", "eval-model"},
                          {"checkpoint", (dir / "train" / "model.json").string()},
                          {"scenario", {{"T", 25}, {"processes", {"gaussian", "adaptive"}}}},
                          {"eval", {{"T", 100}}},
                          {"replicates", 4},
                          {"output_dir", (dir / "eval").string()}};
  ASSERT_EQ(run_experiment(experiment_spec_from_json(eval_spec)), 0);
  std::ifstream in(dir / "eval" / "curves.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, int> max_t;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    max_t[cols[0] + "#" + cols[3]] = std::max(max_t[cols[0] + "#" + cols[3]], std::stoi(cols[4]));
  }
  EXPECT_EQ(max_t.size(), 8u);
  for (const auto& [k, t] : max_t) EXPECT_EQ(t, 100) << k;

  RunOptions cmp;
  cmp.compare_dir = (dir / "eval").string();
  cmp.output_dir = (dir / "eval2").string();
  ASSERT_EQ(run_experiment(experiment_spec_from_json(eval_spec), cmp), 0);
  for (const auto& r : read_json(dir / "eval2" / "summary.json").at("runs")) {
    EXPECT_EQ(r.at("ks_D").get<double>(), 0.0);
    EXPECT_EQ(r.at("ks_p").get<double>(), 1.0);
  }
  fs::remove_all(dir);
}

TEST(Experiment, BanditSummaryHasExplorationSeries) {
  const auto dir = scratch("bandit");
  const json j = {{"mode", "run-baseline"},
                  {"scenario", {{"env_kind", "MAB"}, {"d", 3}, {"T", 50}, {"process", "gaussian"}}},
                  {"algorithms", {"ucb", "greedy"}},
                  {"replicates", 10},
                  {"output_dir", dir.string()}};
  ASSERT_EQ(run_experiment(experiment_spec_from_json(j)), 0);
  for (const auto& r : read_json(dir / "summary.json").at("runs")) {
    EXPECT_EQ(r.at("suff_fail_freq").size(), 50u);
    EXPECT_EQ(r.at("min_frac").size(), 50u);
    EXPECT_EQ(r.at("suff_fail_freq_at_0.98T").get<double>(), r.at("suff_fail_freq")[48].get<double>());
  }
  fs::remove_all(dir);
}

TEST(Experiment, FormatIsNineSignificantDigits) {
  EXPECT_EQ(format_value(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_value(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(round_value(1.0 / 3.0), 0.333333333);
}
