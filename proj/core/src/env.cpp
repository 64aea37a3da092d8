#include "noregret/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "noregret/error.hpp"

namespace noregret {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<double, 3> kMixtureVariances = {1.0, 3.0, 10.0};

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double clip(double v) { return std::clamp(v, kRewardMin, kRewardMax); }

Vec uniform_vec(std::size_t d, double lo, double hi, Rng& rng) {
  boost::random::uniform_real_distribution<double> u(lo, hi);
  Vec v(idx(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  return v;
}

// Open-interval draw on (0, hi); the gamma shape must be strictly positive.
double positive_uniform(double hi, Rng& rng) {
  boost::random::uniform_real_distribution<double> u(0.0, hi);
  double v = 0.0;
  while (v <= 0.0) v = u(rng);
  return v;
}

// One draw from the equal-weight mixture of N(center, s I), clipped.
Vec gaussian_mixture_sample(const Vec& center, Rng& rng) {
  boost::random::uniform_int_distribution<int> pick(0, 2);
  const double sd = std::sqrt(kMixtureVariances[static_cast<std::size_t>(pick(rng))]);
  boost::random::normal_distribution<double> n(0.0, 1.0);
  Vec r(center.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = clip(center[i] + sd * n(rng));
  return r;
}

std::size_t hot_index(int t, std::size_t shift, std::size_t d) {
  return (static_cast<std::size_t>(t) + shift) % d;
}

void require_dim(std::size_t d) {
  if (d < 2) throw ArgumentError("action count d must be at least 2, got " + std::to_string(d));
}

}  // namespace

ProcessKind process_kind(const ProcessParams& p) {
  return std::visit(
      overloaded{
          [](const UniformParams&) { return ProcessKind::kUniform; },
          [](const GaussianParams&) { return ProcessKind::kGaussian; },
          [](const GammaParams&) { return ProcessKind::kGamma; },
          [](const BernoulliParams&) { return ProcessKind::kBernoulli; },
          [](const SineTrendParams&) { return ProcessKind::kSineTrend; },
          [](const AlternatingParams&) { return ProcessKind::kAlternating; },
          [](const NoisyAlternatingParams&) { return ProcessKind::kNoisyAlternating; },
          [](const AdaptiveParams&) { return ProcessKind::kAdaptive; },
          [](const GradualVariationParams&) { return ProcessKind::kGradualVariation; },
      },
      p);
}

std::size_t process_dim(const ProcessParams& p) {
  return std::visit(
      overloaded{
          [](const UniformParams& q) { return static_cast<std::size_t>(q.x.size()); },
          [](const GaussianParams& q) { return static_cast<std::size_t>(q.mu.size()); },
          [](const GammaParams& q) { return static_cast<std::size_t>(q.shape.size()); },
          [](const BernoulliParams& q) { return static_cast<std::size_t>(q.success_prob.size()); },
          [](const SineTrendParams& q) { return static_cast<std::size_t>(q.freq.size()); },
          [](const AlternatingParams& q) { return q.d; },
          [](const NoisyAlternatingParams& q) { return q.d; },
          [](const AdaptiveParams& q) { return q.d; },
          [](const GradualVariationParams& q) { return static_cast<std::size_t>(q.mean.size()); },
      },
      p);
}

bool is_stationary_stochastic(ProcessKind k) {
  return k == ProcessKind::kUniform || k == ProcessKind::kGaussian ||
         k == ProcessKind::kGamma || k == ProcessKind::kBernoulli;
}

bool is_clipped(ProcessKind k) {
  return k == ProcessKind::kGaussian || k == ProcessKind::kGamma ||
         k == ProcessKind::kGradualVariation;
}

std::string_view to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::kUniform: return "uniform";
    case ProcessKind::kGaussian: return "gaussian";
    case ProcessKind::kGamma: return "gamma";
    case ProcessKind::kBernoulli: return "bernoulli";
    case ProcessKind::kSineTrend: return "sine_trend";
    case ProcessKind::kAlternating: return "alternating";
    case ProcessKind::kNoisyAlternating: return "noisy_alternating";
    case ProcessKind::kAdaptive: return "adaptive";
    case ProcessKind::kGradualVariation: return "gradual_variation";
  }
  return "unknown";
}

std::string_view to_string(EnvKind k) {
  switch (k) {
    case EnvKind::kFOL: return "FOL";
    case EnvKind::kMAB: return "MAB";
    case EnvKind::kNSMAB: return "NSMAB";
  }
  return "unknown";
}

std::string_view to_string(PolicySpaceKind k) {
  return k == PolicySpaceKind::kSimplex ? "simplex" : "l2_ball";
}

ProcessKind parse_process_kind(std::string_view s) {
  constexpr std::array kinds = {
      ProcessKind::kUniform,     ProcessKind::kGaussian,         ProcessKind::kGamma,
      ProcessKind::kBernoulli,   ProcessKind::kSineTrend,        ProcessKind::kAlternating,
      ProcessKind::kNoisyAlternating, ProcessKind::kAdaptive,    ProcessKind::kGradualVariation};
  for (ProcessKind k : kinds) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown reward process kind '" + std::string(s) + "'");
}

EnvKind parse_env_kind(std::string_view s) {
  if (s == "FOL" || s == "fol") return EnvKind::kFOL;
  if (s == "MAB" || s == "mab") return EnvKind::kMAB;
  if (s == "NSMAB" || s == "nsmab" || s == "NS-MAB") return EnvKind::kNSMAB;
  throw ConfigError("unknown environment kind '" + std::string(s) + "'");
}

PolicySpaceKind parse_policy_space_kind(std::string_view s) {
  if (s == "simplex") return PolicySpaceKind::kSimplex;
  if (s == "l2_ball") return PolicySpaceKind::kL2Ball;
  throw ConfigError("unknown policy space kind '" + std::string(s) + "'");
}

ProcessParams sample_process_params(ProcessKind kind, std::size_t d, Rng& rng) {
  require_dim(d);
  switch (kind) {
    case ProcessKind::kUniform:
      return UniformParams{uniform_vec(d, 0.0, 10.0, rng), uniform_vec(d, 0.0, 10.0, rng)};
    case ProcessKind::kGaussian: {
      boost::random::normal_distribution<double> n(5.0, 1.0);
      Vec mu(idx(d));
      for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = n(rng);
      return GaussianParams{mu};
    }
    case ProcessKind::kGamma: {
      Vec shape(idx(d)), scale(idx(d));
      for (Eigen::Index i = 0; i < shape.size(); ++i) {
        shape[i] = positive_uniform(10.0, rng);
        scale[i] = positive_uniform(2.0, rng);
      }
      return GammaParams{shape, scale};
    }
    case ProcessKind::kBernoulli: {
      boost::random::uniform_real_distribution<double> u(0.0, 10.0);
      BernoulliParams p;
      p.x = u(rng);
      p.y = u(rng);
      p.success_prob = uniform_vec(d, 0.0, 1.0, rng);
      return p;
    }
    case ProcessKind::kSineTrend:
      return SineTrendParams{uniform_vec(d, 0.0, 10.0, rng), uniform_vec(d, 0.0, 10.0, rng)};
    case ProcessKind::kAlternating: {
      boost::random::uniform_int_distribution<std::size_t> s(0, d - 1);
      return AlternatingParams{d, s(rng)};
    }
    case ProcessKind::kNoisyAlternating: {
      boost::random::uniform_int_distribution<std::size_t> s(0, d - 1);
      return NoisyAlternatingParams{d, s(rng)};
    }
    case ProcessKind::kAdaptive:
      return AdaptiveParams{d};
    case ProcessKind::kGradualVariation:
      return GradualVariationParams{uniform_vec(d, 0.0, 10.0, rng), 1};
  }
  throw ConfigError("unknown reward process kind");
}

RewardVector next_reward(ProcessParams& params, int t, const Policy* policy, Rng& rng) {
  if (t < 1) throw ArgumentError("rounds are 1-based, got t=" + std::to_string(t));
  const bool adaptive = process_kind(params) == ProcessKind::kAdaptive;
  if (adaptive && policy == nullptr) {
    throw ArgumentError("adaptive reward requires the current policy");
  }
  if (!adaptive && policy != nullptr) {
    throw ArgumentError("a policy is only accepted by the adaptive reward");
  }

  return std::visit(
      overloaded{
          [&](const UniformParams& p) {
            Vec r(p.x.size());
            for (Eigen::Index i = 0; i < r.size(); ++i) {
              boost::random::uniform_real_distribution<double> u(std::min(p.x[i], p.y[i]),
                                                                 std::max(p.x[i], p.y[i]));
              r[i] = p.x[i] == p.y[i] ? p.x[i] : u(rng);
            }
            return r;
          },
          [&](const GaussianParams& p) { return gaussian_mixture_sample(p.mu, rng); },
          [&](const GammaParams& p) {
            Vec r(p.shape.size());
            for (Eigen::Index i = 0; i < r.size(); ++i) {
              boost::random::gamma_distribution<double> g(p.shape[i], p.scale[i]);
              r[i] = clip(g(rng));
            }
            return r;
          },
          [&](const BernoulliParams& p) {
            boost::random::uniform_real_distribution<double> u(0.0, 1.0);
            Vec r(p.success_prob.size());
            for (Eigen::Index i = 0; i < r.size(); ++i) {
              r[i] = u(rng) < p.success_prob[i] ? std::max(p.x, p.y) : std::min(p.x, p.y);
            }
            return r;
          },
          [&](const SineTrendParams& p) {
            const double tt = static_cast<double>(t);
            Vec r(p.freq.size());
            for (Eigen::Index i = 0; i < r.size(); ++i) {
              r[i] = 5.0 * (1.0 + std::sin(p.freq[i] * tt + p.phase[i]));
            }
            return r;
          },
          [&](const AlternatingParams& p) {
            Vec r = Vec::Zero(idx(p.d));
            r[idx(hot_index(t, p.shift, p.d))] = 10.0;
            return r;
          },
          [&](const NoisyAlternatingParams& p) {
            boost::random::uniform_real_distribution<double> u(9.0, 10.0);
            Vec r(idx(p.d));
            for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = u(rng);
            r[idx(hot_index(t, p.shift, p.d))] = std::min(25.0 / (t + 1.0), 10.0);
            return r;
          },
          [&](const AdaptiveParams& p) {
            if (static_cast<std::size_t>(policy->size()) != p.d) {
              throw ArgumentError("adaptive reward: policy dimension mismatch");
            }
            Vec r = Vec::Constant(idx(p.d), 10.0);
            r[idx(argmax_lowest(*policy))] = 0.0;
            return r;
          },
          [&](GradualVariationParams& p) {
            if (t != p.round) {
              throw ArgumentError("gradual variation is at round " + std::to_string(p.round) +
                                  ", asked for t=" + std::to_string(t));
            }
            Vec r = gaussian_mixture_sample(p.mean, rng);
            const double w = 1.0 / std::sqrt(static_cast<double>(t));
            p.mean += uniform_vec(static_cast<std::size_t>(p.mean.size()), -w, w, rng);
            ++p.round;
            return r;
          },
      },
      params);
}

Vec mean_reward(const ProcessParams& params, int t, MeanMode mode,
                const MonteCarloMeanOptions& mc) {
  const ProcessKind kind = process_kind(params);
  if (!is_stationary_stochastic(kind) && kind != ProcessKind::kGradualVariation) {
    throw UnsupportedError("mean reward is undefined for the " +
                           std::string(to_string(kind)) + " process");
  }
  if (const auto* gv = std::get_if<GradualVariationParams>(&params); gv && gv->round != t) {
    throw ArgumentError("gradual variation mean is only known at its current round");
  }

  if (mode == MeanMode::kMonteCarloClipped) {
    if (mc.samples == 0) throw ArgumentError("Monte Carlo mean needs at least one sample");
    Rng rng = make_rng(derive_seed(mc.seed, Stream::kMonteCarlo));
    Vec acc = Vec::Zero(static_cast<Eigen::Index>(process_dim(params)));
    for (std::size_t i = 0; i < mc.samples; ++i) {
      ProcessParams copy = params;  // gradual variation must not advance
      acc += next_reward(copy, t, nullptr, rng);
    }
    return acc / static_cast<double>(mc.samples);
  }

  return std::visit(
      overloaded{
          [](const UniformParams& p) -> Vec { return 0.5 * (p.x + p.y); },
          [](const GaussianParams& p) -> Vec { return p.mu; },
          [](const GammaParams& p) -> Vec { return p.shape.cwiseProduct(p.scale); },
          [](const BernoulliParams& p) -> Vec {
            const double hi = std::max(p.x, p.y), lo = std::min(p.x, p.y);
            return (p.success_prob * hi).array() + (1.0 - p.success_prob.array()) * lo;
          },
          [](const GradualVariationParams& p) -> Vec { return p.mean; },
          [](const auto&) -> Vec { throw UnsupportedError("mean reward is undefined"); },
      },
      params);
}

BanditFeedback bandit_feedback(const RewardVector& reward, std::size_t action) {
  if (action >= static_cast<std::size_t>(reward.size())) {
    throw ArgumentError("action " + std::to_string(action) + " out of range for d=" +
                        std::to_string(reward.size()));
  }
  BanditFeedback fb;
  fb.reward = reward[idx(action)];
  fb.masked = Vec::Zero(reward.size());
  fb.masked[idx(action)] = fb.reward;
  return fb;
}

double variation_budget(std::span<const Vec> means) {
  if (means.size() < 2) throw ArgumentError("variation budget needs at least two rounds");
  double v = 0.0;
  for (std::size_t t = 1; t < means.size(); ++t) {
    v += (means[t] - means[t - 1]).lpNorm<Eigen::Infinity>();
  }
  return v;
}

Scenario make_scenario(EnvKind env, std::size_t d, int horizon, PolicySpace space,
                       ProcessKind process, std::uint64_t seed) {
  require_dim(d);
  Rng rng = make_rng(derive_seed(seed, Stream::kProcessParams));
  Scenario s{env, ActionSpace{d}, space, horizon, sample_process_params(process, d, rng), seed};
  validate(s);
  return s;
}

void validate(const Scenario& s) {
  if (s.actions.d < 2) throw ConfigError("scenario: d must be at least 2");
  if (s.horizon < 1) throw ConfigError("scenario: horizon T must be at least 1");
  if (process_dim(s.process) != s.actions.d) {
    throw ConfigError("scenario: process dimension does not match d");
  }
  if (s.policy_space.kind == PolicySpaceKind::kL2Ball && !(s.policy_space.radius > 0.0)) {
    throw ConfigError("scenario: l2-ball radius must be positive");
  }
  const ProcessKind k = process_kind(s.process);
  switch (s.env_kind) {
    case EnvKind::kFOL:
      break;
    case EnvKind::kMAB:
      if (s.policy_space.kind != PolicySpaceKind::kSimplex) {
        throw ConfigError("scenario: MAB requires the simplex policy space");
      }
      if (!is_stationary_stochastic(k)) {
        throw ConfigError("scenario: MAB requires a stationary stochastic process, got " +
                          std::string(to_string(k)));
      }
      break;
    case EnvKind::kNSMAB:
      if (s.policy_space.kind != PolicySpaceKind::kSimplex) {
        throw ConfigError("scenario: NS-MAB requires the simplex policy space");
      }
      if (k != ProcessKind::kGradualVariation) {
        throw ConfigError("scenario: NS-MAB requires the gradual variation process");
      }
      break;
  }
}

RewardStream::RewardStream(const Scenario& s)
    : params_(s.process), rng_(make_rng(derive_seed(s.seed, Stream::kRewardNoise))) {}

RewardVector RewardStream::next(const Policy* policy) {
  RewardVector r = next_reward(params_, t_, policy, rng_);
  ++t_;
  return r;
}

Vec RewardStream::mean(MeanMode mode) const { return mean_reward(params_, t_, mode); }

}  // namespace noregret
