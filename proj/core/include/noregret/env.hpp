#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "noregret/policy_ops.hpp"
#include "noregret/rng.hpp"
#include "noregret/types.hpp"

namespace noregret {

enum class EnvKind { kFOL, kMAB, kNSMAB };

enum class ProcessKind {
  kUniform,
  kGaussian,
  kGamma,
  kBernoulli,
  kSineTrend,
  kAlternating,
  kNoisyAlternating,
  kAdaptive,
  kGradualVariation,
};

inline constexpr double kRewardMin = 0.0;
inline constexpr double kRewardMax = 10.0;

struct ActionSpace {
  std::size_t d = 2;
};

// I. R_t(a) ~ Unif[min(x_a, y_a), max(x_a, y_a)].
struct UniformParams {
  Vec x, y;
};
// II. Equal-weight mixture of N(mu, s I) for s in {1, 3, 10}, clipped.
struct GaussianParams {
  Vec mu;
};
// III. R_t(a) ~ Gamma(shape_a, scale_a), clipped.
struct GammaParams {
  Vec shape, scale;
};
// IV. R_t(a) = max(x, y) w.p. p_a, otherwise min(x, y).
struct BernoulliParams {
  double x = 0.0, y = 0.0;
  Vec success_prob;
};
// V. R_t = 5 (1 + sin(freq * t + phase)), elementwise.
struct SineTrendParams {
  Vec freq, phase;
};
// VI. Hot index (t + shift) mod d pays 10, everything else 0.
struct AlternatingParams {
  std::size_t d = 2;
  std::size_t shift = 0;
};
// VII. Hot index pays min(25 / (t + 1), 10), everything else Unif[9, 10].
struct NoisyAlternatingParams {
  std::size_t d = 2;
  std::size_t shift = 0;
};
// VIII. The argmax of the current policy pays 0, everything else 10.
struct AdaptiveParams {
  std::size_t d = 2;
};
// IX. Drifting mean: r_{t+1} = r_t + Unif[-1/sqrt(t), 1/sqrt(t)]^d; samples
// as in II around r_t. `mean` is r_round.
struct GradualVariationParams {
  Vec mean;
  int round = 1;
};

using ProcessParams =
    std::variant<UniformParams, GaussianParams, GammaParams, BernoulliParams,
                 SineTrendParams, AlternatingParams, NoisyAlternatingParams,
                 AdaptiveParams, GradualVariationParams>;

ProcessKind process_kind(const ProcessParams& p);
std::size_t process_dim(const ProcessParams& p);

bool is_stationary_stochastic(ProcessKind k);
// Processes whose samples are clipped to [0, 10].
bool is_clipped(ProcessKind k);

std::string_view to_string(ProcessKind k);
std::string_view to_string(EnvKind k);
std::string_view to_string(PolicySpaceKind k);
ProcessKind parse_process_kind(std::string_view s);
EnvKind parse_env_kind(std::string_view s);
PolicySpaceKind parse_policy_space_kind(std::string_view s);

ProcessParams sample_process_params(ProcessKind kind, std::size_t d, Rng& rng);

// Draws R_t. `policy` must be non-null exactly when the process is Adaptive.
// Gradual variation requires t to equal the stored round and advances it.
RewardVector next_reward(ProcessParams& params, int t, const Policy* policy, Rng& rng);

enum class MeanMode { kAnalyticUnclipped, kMonteCarloClipped };

struct MonteCarloMeanOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0x5eedf00dULL;
};

Vec mean_reward(const ProcessParams& params, int t, MeanMode mode,
                const MonteCarloMeanOptions& mc = {});

struct BanditFeedback {
  double reward = 0.0;
  RewardVector masked;
};

BanditFeedback bandit_feedback(const RewardVector& reward, std::size_t action);

// sum_{t>=2} ||r_t - r_{t-1}||_inf
double variation_budget(std::span<const Vec> means);

struct Scenario {
  EnvKind env_kind = EnvKind::kFOL;
  ActionSpace actions;
  PolicySpace policy_space;
  int horizon = 1;
  ProcessParams process;
  std::uint64_t seed = 0;

  std::size_t d() const { return actions.d; }
};

// Samples process parameters from the scenario's parameter sub-stream.
Scenario make_scenario(EnvKind env, std::size_t d, int horizon, PolicySpace space,
                       ProcessKind process, std::uint64_t seed);

// Throws ConfigError when the scenario violates its invariants.
void validate(const Scenario& s);

// Online reward generator for one pass over a scenario. Reward noise comes
// from the scenario's reward sub-stream, so every pass over the same scenario
// sees the same noise.
class RewardStream {
 public:
  explicit RewardStream(const Scenario& s);

  // R_t for t = round(); advances to the next round.
  RewardVector next(const Policy* policy = nullptr);

  int round() const { return t_; }
  // Mean of the reward about to be drawn.
  Vec mean(MeanMode mode = MeanMode::kAnalyticUnclipped) const;
  const ProcessParams& params() const { return params_; }

 private:
  ProcessParams params_;
  Rng rng_;
  int t_ = 1;
};

}  // namespace noregret
