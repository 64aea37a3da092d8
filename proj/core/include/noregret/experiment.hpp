#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noregret/env.hpp"
#include "noregret/metrics.hpp"
#include "noregret/trainer.hpp"

namespace noregret {

enum class ExperimentMode { kRunBaseline, kTrainTransformer, kEvalModel, kVerifyTheory };

std::string_view to_string(ExperimentMode m);
ExperimentMode parse_experiment_mode(std::string_view s);

struct ScenarioTemplate {
  EnvKind env_kind = EnvKind::kFOL;
  std::size_t d = 3;
  int horizon = 100;
  PolicySpace policy_space = PolicySpace::simplex();
  std::vector<ProcessKind> processes{ProcessKind::kGaussian};
};

struct EvalOverrides {
  std::optional<int> horizon;
  std::optional<std::vector<ProcessKind>> processes;
};

struct TheorySettings {
  std::size_t d = 3;
  int horizon = 25;
  double radius = 1.0;
  std::size_t norm_samples = 1000000;
  std::size_t isotropy_samples = 1000000;
  std::size_t optimal_c_samples = 100000;
  std::size_t delta_samples = 100000;
  std::size_t delta_d = 2;
  int delta_horizon = 3;
};

struct ExperimentSpec {
  ExperimentMode mode = ExperimentMode::kRunBaseline;
  ScenarioTemplate scenario;
  std::vector<std::string> algorithms;  // "transformer" names the loaded or trained model
  std::size_t replicates = 100;
  EvalOverrides eval;
  std::string checkpoint;     // eval-model
  TrainConfig train;          // train-transformer
  TheorySettings theory;      // verify-theory
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::optional<std::string> compare_algorithm;  // KS baseline inside --compare run
};

// Throws ConfigError naming the offending field.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);
void validate(const ExperimentSpec& spec);

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::string> compare_dir;
};

// One (algorithm, process) group of replicates.
struct RunResult {
  std::string run_id;
  std::string algorithm;
  ProcessKind process = ProcessKind::kGaussian;
  std::vector<std::vector<double>> curves;  // one per replicate, rounded as written to CSV
  ActionRuns actions;                        // bandit modes
  ActionRuns best_arms;
};

nlohmann::json summarize(const RunResult& r, EnvKind env, std::size_t d);

// Runs every (process, algorithm) group of the template on `replicates`
// scenarios. Scenario seeds depend on the process and replicate only, so
// algorithms are compared on identical reward streams.
std::vector<RunResult> run_groups(const ScenarioTemplate& tpl, const std::vector<std::string>& algorithms,
                                  std::size_t replicates, std::uint64_t seed, std::size_t workers,
                                  const std::optional<std::pair<ModelParams, Operator>>& model = {});

// Formats with 9 significant digits; the same text is written to CSV.
std::string format_value(double v);
double round_value(double v);

void write_curves_csv(const std::string& path, const std::vector<RunResult>& runs);

// Executes the experiment and writes its artifacts. Returns the process exit
// status: 0 on success, 1 when any growth fit lacked data.
int run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

// Reads curves.csv into final regrets per run_id.
std::vector<std::pair<std::string, std::vector<double>>> read_final_regrets(const std::string& csv_path);

}  // namespace noregret
