#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noregret/env.hpp"
#include "noregret/policy_ops.hpp"
#include "noregret/rng.hpp"
#include "noregret/types.hpp"

namespace noregret {

// ---- Single-step rules ---------------------------------------------------

// argmax over the policy space of <S, pi>: the best vertex on the simplex,
// radius * S / ||S|| on the ball (origin when S = 0).
Policy ftl_step(const Vec& cumulative, const PolicySpace& space);

// argmax_pi <S, pi> - ||pi||^2 / (2 eta) over the ball, i.e. Proj(eta S).
Policy ftrl_l2_step(const Vec& cumulative, double eta, double radius);

// FTRL with entropy regularization: pi(a) ~ exp(eta * S(a)).
Policy hedge_step(const Vec& cumulative, double eta);

// sqrt(2 log d / t)
double hedge_eta(std::size_t d, int t);

struct ArmStats {
  std::vector<int> counts;
  Vec means;

  explicit ArmStats(std::size_t d = 0)
      : counts(d, 0), means(Vec::Zero(static_cast<Eigen::Index>(d))) {}
  std::size_t d() const { return counts.size(); }
  int total() const;
  void update(std::size_t arm, double reward);
};

// argmax_a mean(a) + scale * sqrt(2 log t / N(a)); unvisited arms score +inf.
std::size_t ucb_step(const ArmStats& stats, int t, double scale = 1.0);
// Round-robin over the first d rounds, then argmax of empirical means.
std::size_t greedy_step(const ArmStats& stats, int t);

struct Exp3Params {
  double eta = 0.0;
  double gamma = 1.0;

  // eta = sqrt(2 log K / (K T)), gamma = min(1, eta K / 2).
  static Exp3Params standard(std::size_t arms, int horizon);
};

// EXP3 weights in log space. Rewards passed to update() must be in [0, 1].
class Exp3 {
 public:
  Exp3(std::size_t arms, double eta, double gamma);

  // p(a) = (1 - gamma) w(a) / sum w + gamma / K
  Vec distribution() const;
  std::size_t sample(Rng& rng) const;
  // w(a_t) *= exp(eta * r / p(a_t)); unchosen arms are untouched.
  void update(std::size_t action, double reward01);
  void reset();

  std::size_t arms() const { return static_cast<std::size_t>(log_w_.size()); }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  Vec weights() const;

 private:
  Vec log_w_;
  double eta_;
  double gamma_;
};

struct Rexp3Params {
  int batch = 1;       // Delta_T
  double gamma = 1.0;  // exploration; also the update exponent scale gamma / K

  // Delta_T = ceil((K log K / V_T)^(1/3) T^(2/3)), at least 1.
  static Rexp3Params standard(std::size_t arms, int horizon, double variation_budget);
};

// ---- Learners ------------------------------------------------------------

// Common interface for every online algorithm. act() returns the policy for
// round t; bandit learners return the sampling distribution over arms.
// observe() receives the full reward vector in full-information settings and
// the masked vector (only the chosen entry nonzero) under bandit feedback.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string_view id() const = 0;
  virtual Policy act(int t) = 0;
  virtual void observe(int t, std::size_t action, const RewardVector& revealed) = 0;
};

struct AlgorithmSpec {
  std::string id;                       // ftl, ftrl_l2, hedge, ucb, exp3, rexp3, greedy, uniform
  std::optional<double> eta;            // fixed step size (ftrl_l2, hedge)
  std::optional<int> eta_horizon;       // fixed step sqrt(2 log d / T_eta)
  double ucb_scale = 1.0;
  double reward_scale = 10.0;           // EXP3/Rexp3 divide rewards by this
  std::optional<double> variation_budget;  // Rexp3; defaults to sqrt(T)

  // Display label, e.g. "hedge" or "hedge_eta25".
  std::string label() const;
};

AlgorithmSpec parse_algorithm(std::string_view id);
std::unique_ptr<Learner> make_learner(const AlgorithmSpec& spec, const Scenario& scenario);

}  // namespace noregret
