#include "noregret/simulate.hpp"

#include <boost/random/uniform_real_distribution.hpp>

#include "noregret/error.hpp"

namespace noregret {

std::size_t sample_action(const Policy& pi, Rng& rng) {
  boost::random::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng) * pi.sum();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    acc += pi[a];
    if (x < acc) return static_cast<std::size_t>(a);
  }
  // Rounding left x at or above the total mass: fall back to the last arm with mass.
  for (Eigen::Index a = pi.size() - 1; a >= 0; --a) {
    if (pi[a] > 0.0) return static_cast<std::size_t>(a);
  }
  throw ArgumentError("cannot sample from a policy with no mass");
}

Trajectory play(const Scenario& scenario, Learner& learner, Rng& action_rng, MeanMode mean_mode) {
  validate(scenario);
  RewardStream stream(scenario);
  const bool bandit = scenario.env_kind != EnvKind::kFOL;
  const bool adaptive = process_kind(scenario.process) == ProcessKind::kAdaptive;
  const auto T = static_cast<std::size_t>(scenario.horizon);

  Trajectory tr;
  tr.policies.reserve(T);
  tr.rewards.reserve(T);
  tr.inputs.reserve(T);
  for (int t = 1; t <= scenario.horizon; ++t) {
    Policy pi = learner.act(t);
    if (bandit) {
      tr.means.push_back(stream.mean(mean_mode));
      const std::size_t a = sample_action(pi, action_rng);
      RewardVector r = stream.next();
      BanditFeedback fb = bandit_feedback(r, a);
      learner.observe(t, a, fb.masked);
      tr.actions.push_back(a);
      tr.inputs.push_back(std::move(fb.masked));
      tr.rewards.push_back(std::move(r));
    } else {
      RewardVector r = stream.next(adaptive ? &pi : nullptr);
      learner.observe(t, 0, r);
      tr.inputs.push_back(r);
      tr.rewards.push_back(std::move(r));
    }
    tr.policies.push_back(std::move(pi));
  }
  return tr;
}

}  // namespace noregret
