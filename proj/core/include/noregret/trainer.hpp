#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noregret/adam.hpp"
#include "noregret/attn_model.hpp"
#include "noregret/env.hpp"
#include "noregret/simulate.hpp"

namespace noregret {

enum class RolloutRegret { kExpected, kRealized };

struct TrainConfig {
  int iterations = 1000;
  std::size_t scenarios = 100;  // M
  std::size_t rollouts = 10;    // L
  std::size_t top_k = 1;        // k
  std::optional<double> sigma;  // defaults: 1.0 in FOL, 0.1 under bandit feedback
  AdamConfig adam;
  std::size_t batch_size = 1000;
  int epochs = 1;

  EnvKind env_kind = EnvKind::kFOL;
  std::size_t d = 3;
  int horizon = 25;
  std::vector<ProcessKind> processes{ProcessKind::kGaussian};  // cycled over scenarios
  Operator op = Operator::softmax();

  bool fixed_pool = false;
  RolloutRegret regret = RolloutRegret::kExpected;
  LossTarget loss_target = LossTarget::kOperatorOutput;
  double init_std = 0.1;

  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::string checkpoint_dir;
  std::string log_path;      // JSON lines; empty disables
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  double sigma_value() const;
  // Throws ConfigError naming the offending field.
  void validate() const;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& c);

struct TrajectoryRecord {
  Trajectory trajectory;
  double regret = 0.0;
};

// Regret used to rank rollouts: final FOL regret, or expected (or realized)
// dynamic regret against the recorded means under bandit feedback.
double rollout_regret(const Scenario& scenario, const Trajectory& tr, RolloutRegret mode);

// One perturbed pass: pi_t = Op(score + eps_t), eps_t ~ N(0, sigma^2 I) from
// `noise_rng`; bandit actions come from `action_rng`.
TrajectoryRecord rollout(const Scenario& scenario, const ModelParams& params, const Operator& op,
                         double sigma, Rng& noise_rng, Rng& action_rng,
                         RolloutRegret mode = RolloutRegret::kExpected);

// Indices of the k smallest regrets, ties to the lowest index, in rank order.
std::vector<std::size_t> select_topk(std::span<const double> regrets, std::size_t k);

// (prefix statistics of inputs before round t, pi_t) for every round.
void append_imitation_items(const Trajectory& tr, std::size_t d, std::vector<GradItem>& out);

// Shuffled mini-batch Adam passes minimizing the mean per-item squared error.
// Returns the mean item loss of the last epoch.
double sft_update(ModelParams& params, Adam& opt, std::span<const GradItem> items,
                  std::size_t batch_size, int epochs, const Operator& op, Rng& shuffle_rng,
                  LossTarget target = LossTarget::kOperatorOutput);

struct TrainLogEntry {
  int iteration = 0;  // 1-based
  double loss = 0.0;
  Diagnostics diag;
  double mean_selected_regret = 0.0;
  double mean_rollout_regret = 0.0;
  std::string checkpoint;
};

nlohmann::json log_entry_to_json(const TrainLogEntry& e);

struct TrainResult {
  ModelParams initial;
  ModelParams params;
  Diagnostics initial_diag;
  std::vector<TrainLogEntry> log;
};

using TrainCallback = std::function<void(const TrainLogEntry&, const ModelParams&)>;

TrainResult train(const TrainConfig& config, const TrainCallback& on_iteration = {});

// The scenario used at (iteration, index) of a training run.
Scenario training_scenario(const TrainConfig& config, int iteration, std::size_t index);

}  // namespace noregret
