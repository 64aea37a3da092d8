#pragma once

#include <cstddef>
#include <vector>

#include "noregret/baselines.hpp"
#include "noregret/env.hpp"
#include "noregret/rng.hpp"

namespace noregret {

// One pass of a learner over a scenario.
struct Trajectory {
  std::vector<Policy> policies;        // pi_t
  std::vector<RewardVector> rewards;   // full sampled R_t
  std::vector<RewardVector> inputs;    // what the learner observed: R_t or the masked R_t
  std::vector<std::size_t> actions;    // a_t ~ pi_t (bandit environments only)
  std::vector<Vec> means;              // r_t (bandit environments only)

  std::size_t rounds() const { return policies.size(); }
};

// Samples a ~ pi with the lowest index absorbing rounding slack.
std::size_t sample_action(const Policy& pi, Rng& rng);

// Plays `learner` for scenario.horizon rounds. Bandit actions are drawn from
// `action_rng`; reward noise comes from the scenario's own stream.
Trajectory play(const Scenario& scenario, Learner& learner, Rng& action_rng,
                MeanMode mean_mode = MeanMode::kAnalyticUnclipped);

}  // namespace noregret
