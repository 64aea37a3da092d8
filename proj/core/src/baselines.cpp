#include "noregret/baselines.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/discrete_distribution.hpp>

#include "noregret/error.hpp"

namespace noregret {
namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

Policy ftl_step(const Vec& cumulative, const PolicySpace& space) {
  const auto d = static_cast<std::size_t>(cumulative.size());
  if (space.kind == PolicySpaceKind::kSimplex) return vertex(d, argmax_lowest(cumulative));
  const double n = cumulative.norm();
  if (n == 0.0) return Vec::Zero(cumulative.size());
  return cumulative * (space.radius / n);
}

Policy ftrl_l2_step(const Vec& cumulative, double eta, double radius) {
  if (!(eta > 0.0)) throw ConfigError("ftrl_l2: step size must be positive");
  return project_l2_ball(eta * cumulative, radius);
}

Policy hedge_step(const Vec& cumulative, double eta) { return softmax(eta * cumulative); }

double hedge_eta(std::size_t d, int t) {
  return std::sqrt(2.0 * std::log(static_cast<double>(d)) / static_cast<double>(t));
}

int ArmStats::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

void ArmStats::update(std::size_t arm, double reward) {
  if (arm >= counts.size()) throw ArgumentError("arm index out of range");
  const int n = ++counts[arm];
  means[idx(arm)] += (reward - means[idx(arm)]) / n;
}

std::size_t ucb_step(const ArmStats& stats, int t, double scale) {
  if (t < 1) throw ArgumentError("ucb: rounds are 1-based");
  const double log_t = std::log(static_cast<double>(t));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < stats.d(); ++a) {
    const double score =
        stats.counts[a] == 0
            ? std::numeric_limits<double>::infinity()
            : stats.means[idx(a)] + scale * std::sqrt(2.0 * log_t / stats.counts[a]);
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

std::size_t greedy_step(const ArmStats& stats, int t) {
  if (t >= 1 && static_cast<std::size_t>(t) <= stats.d()) return static_cast<std::size_t>(t - 1);
  for (std::size_t a = 0; a < stats.d(); ++a) {
    if (stats.counts[a] == 0) return a;
  }
  return argmax_lowest(stats.means);
}

Exp3Params Exp3Params::standard(std::size_t arms, int horizon) {
  if (arms < 2) throw ConfigError("exp3: need at least two arms");
  if (horizon < 1) throw ConfigError("exp3: horizon must be at least 1");
  const double k = static_cast<double>(arms);
  Exp3Params p;
  p.eta = std::sqrt(2.0 * std::log(k) / (k * horizon));
  p.gamma = std::min(1.0, p.eta * k / 2.0);
  return p;
}

Exp3::Exp3(std::size_t arms, double eta, double gamma)
    : log_w_(Vec::Zero(idx(arms))), eta_(eta), gamma_(gamma) {
  if (arms < 2) throw ConfigError("exp3: need at least two arms");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("exp3: gamma must lie in (0, 1]");
  if (!(eta > 0.0)) throw ConfigError("exp3: eta must be positive");
}

Vec Exp3::distribution() const {
  const double k = static_cast<double>(arms());
  return ((1.0 - gamma_) * softmax(log_w_)).array() + gamma_ / k;
}

std::size_t Exp3::sample(Rng& rng) const {
  const Vec p = distribution();
  boost::random::discrete_distribution<std::size_t> pick(p.data(), p.data() + p.size());
  return pick(rng);
}

void Exp3::update(std::size_t action, double reward01) {
  if (action >= arms()) throw ArgumentError("exp3: action out of range");
  const double p = distribution()[idx(action)];
  log_w_[idx(action)] += eta_ * reward01 / p;
}

void Exp3::reset() { log_w_.setZero(); }

Vec Exp3::weights() const { return log_w_.array().exp(); }

Rexp3Params Rexp3Params::standard(std::size_t arms, int horizon, double variation_budget) {
  if (!(variation_budget > 0.0)) throw ConfigError("rexp3: variation budget must be positive");
  if (arms < 2) throw ConfigError("rexp3: need at least two arms");
  if (horizon < 1) throw ConfigError("rexp3: horizon must be at least 1");
  const double k = static_cast<double>(arms);
  const double klogk = k * std::log(k);
  Rexp3Params p;
  const double raw =
      std::cbrt(klogk / variation_budget) * std::pow(static_cast<double>(horizon), 2.0 / 3.0);
  p.batch = std::max(1, static_cast<int>(std::ceil(raw)));
  p.gamma = std::min(1.0, std::sqrt(klogk / ((std::exp(1.0) - 1.0) * p.batch)));
  return p;
}

std::string AlgorithmSpec::label() const {
  std::string s = id;
  if (eta_horizon) s += "_eta" + std::to_string(*eta_horizon);
  return s;
}

AlgorithmSpec parse_algorithm(std::string_view id) {
  AlgorithmSpec spec;
  const auto pos = id.find("_eta");
  if (pos != std::string_view::npos) {
    const std::string_view base = id.substr(0, pos);
    const std::string_view num = id.substr(pos + 4);
    int h = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), h);
    if (ec != std::errc{} || ptr != num.data() + num.size() || h < 1 ||
        (base != "hedge" && base != "ftrl_l2")) {
      throw ConfigError("unknown algorithm '" + std::string(id) + "'");
    }
    spec.id = std::string(base);
    spec.eta_horizon = h;
    return spec;
  }
  static constexpr std::string_view kKnown[] = {"ftl",   "ftrl_l2", "hedge",  "ucb",
                                                "exp3", "rexp3",   "greedy", "uniform"};
  for (std::string_view k : kKnown) {
    if (k == id) {
      spec.id = std::string(id);
      return spec;
    }
  }
  throw ConfigError("unknown algorithm '" + std::string(id) + "'");
}

namespace {

class FtlLearner final : public Learner {
 public:
  FtlLearner(std::size_t d, PolicySpace space) : s_(Vec::Zero(idx(d))), space_(space) {}
  std::string_view id() const override { return "ftl"; }
  Policy act(int) override { return ftl_step(s_, space_); }
  void observe(int, std::size_t, const RewardVector& r) override { s_ += r; }

 private:
  Vec s_;
  PolicySpace space_;
};

// Step size: fixed eta, or sqrt(2 log d / T_eta), or the anytime sqrt(2 log d / t).
double step_size(const AlgorithmSpec& spec, std::size_t d, int t) {
  if (spec.eta) return *spec.eta;
  if (spec.eta_horizon) return hedge_eta(d, *spec.eta_horizon);
  return hedge_eta(d, t);
}

class FtrlL2Learner final : public Learner {
 public:
  FtrlL2Learner(std::size_t d, double radius, AlgorithmSpec spec)
      : s_(Vec::Zero(idx(d))), radius_(radius), spec_(std::move(spec)) {}
  std::string_view id() const override { return "ftrl_l2"; }
  Policy act(int t) override {
    return ftrl_l2_step(s_, step_size(spec_, static_cast<std::size_t>(s_.size()), t), radius_);
  }
  void observe(int, std::size_t, const RewardVector& r) override { s_ += r; }

 private:
  Vec s_;
  double radius_;
  AlgorithmSpec spec_;
};

class HedgeLearner final : public Learner {
 public:
  HedgeLearner(std::size_t d, AlgorithmSpec spec) : s_(Vec::Zero(idx(d))), spec_(std::move(spec)) {}
  std::string_view id() const override { return "hedge"; }
  Policy act(int t) override {
    return hedge_step(s_, step_size(spec_, static_cast<std::size_t>(s_.size()), t));
  }
  void observe(int, std::size_t, const RewardVector& r) override { s_ += r; }

 private:
  Vec s_;
  AlgorithmSpec spec_;
};

class UcbLearner final : public Learner {
 public:
  UcbLearner(std::size_t d, double scale) : stats_(d), scale_(scale) {}
  std::string_view id() const override { return "ucb"; }
  Policy act(int t) override { return vertex(stats_.d(), ucb_step(stats_, t, scale_)); }
  void observe(int, std::size_t a, const RewardVector& r) override { stats_.update(a, r[idx(a)]); }

 private:
  ArmStats stats_;
  double scale_;
};

class GreedyLearner final : public Learner {
 public:
  explicit GreedyLearner(std::size_t d) : stats_(d) {}
  std::string_view id() const override { return "greedy"; }
  Policy act(int t) override { return vertex(stats_.d(), greedy_step(stats_, t)); }
  void observe(int, std::size_t a, const RewardVector& r) override { stats_.update(a, r[idx(a)]); }

 private:
  ArmStats stats_;
};

class Exp3Learner final : public Learner {
 public:
  Exp3Learner(std::size_t d, int horizon, double reward_scale)
      : exp3_(d, Exp3Params::standard(d, horizon).eta, Exp3Params::standard(d, horizon).gamma),
        scale_(reward_scale) {}
  std::string_view id() const override { return "exp3"; }
  Policy act(int) override { return exp3_.distribution(); }
  void observe(int, std::size_t a, const RewardVector& r) override {
    exp3_.update(a, r[idx(a)] / scale_);
  }

 private:
  Exp3 exp3_;
  double scale_;
};

// EXP3 restarted every Delta_T rounds, with update exponent gamma / K.
class Rexp3Learner final : public Learner {
 public:
  Rexp3Learner(std::size_t d, Rexp3Params p, double reward_scale)
      : params_(p), exp3_(d, p.gamma / static_cast<double>(d), p.gamma), scale_(reward_scale) {}
  std::string_view id() const override { return "rexp3"; }
  Policy act(int t) override {
    if (t > 1 && (t - 1) % params_.batch == 0) exp3_.reset();
    return exp3_.distribution();
  }
  void observe(int, std::size_t a, const RewardVector& r) override {
    exp3_.update(a, r[idx(a)] / scale_);
  }

 private:
  Rexp3Params params_;
  Exp3 exp3_;
  double scale_;
};

class UniformLearner final : public Learner {
 public:
  explicit UniformLearner(std::size_t d) : d_(d) {}
  std::string_view id() const override { return "uniform"; }
  Policy act(int) override { return uniform_policy(d_); }
  void observe(int, std::size_t, const RewardVector&) override {}

 private:
  std::size_t d_;
};

bool is_bandit_only(std::string_view id) {
  return id == "ucb" || id == "exp3" || id == "rexp3" || id == "greedy";
}

}  // namespace

std::unique_ptr<Learner> make_learner(const AlgorithmSpec& spec, const Scenario& scenario) {
  const std::size_t d = scenario.d();
  const bool simplex = scenario.policy_space.kind == PolicySpaceKind::kSimplex;
  if (is_bandit_only(spec.id) && scenario.env_kind == EnvKind::kFOL) {
    throw ConfigError("algorithm '" + spec.id + "' needs bandit feedback");
  }
  if (spec.id == "ftl") return std::make_unique<FtlLearner>(d, scenario.policy_space);
  if (spec.id == "ftrl_l2") {
    if (simplex) throw ConfigError("ftrl_l2 needs the l2-ball policy space");
    return std::make_unique<FtrlL2Learner>(d, scenario.policy_space.radius, spec);
  }
  if (spec.id == "hedge") {
    if (!simplex) throw ConfigError("hedge needs the simplex policy space");
    return std::make_unique<HedgeLearner>(d, spec);
  }
  if (spec.id == "ucb") return std::make_unique<UcbLearner>(d, spec.ucb_scale);
  if (spec.id == "greedy") return std::make_unique<GreedyLearner>(d);
  if (spec.id == "exp3") return std::make_unique<Exp3Learner>(d, scenario.horizon, spec.reward_scale);
  if (spec.id == "rexp3") {
    const double v = spec.variation_budget.value_or(std::sqrt(static_cast<double>(scenario.horizon)));
    return std::make_unique<Rexp3Learner>(d, Rexp3Params::standard(d, scenario.horizon, v),
                                          spec.reward_scale);
  }
  if (spec.id == "uniform") {
    if (!simplex) throw ConfigError("uniform needs the simplex policy space");
    return std::make_unique<UniformLearner>(d);
  }
  throw ConfigError("unknown algorithm '" + spec.id + "'");
}

}  // namespace noregret
