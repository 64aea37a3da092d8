#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "noregret/env.hpp"
#include "noregret/policy_ops.hpp"
#include "noregret/types.hpp"

namespace noregret {

// kPrefix compares against the best fixed decision for each prefix of the
// stream; kFinal uses the best decision for the whole stream at every t.
enum class ComparatorMode { kPrefix, kFinal };

struct RegretCurve {
  std::vector<double> values;  // cumulative regret at t = 1..T
  EnvKind env_kind = EnvKind::kFOL;
  ComparatorMode comparator = ComparatorMode::kPrefix;

  std::size_t size() const { return values.size(); }
  double final() const { return values.empty() ? 0.0 : values.back(); }
};

// max over the policy space of <pi, S>.
double best_fixed_value(const Vec& cumulative, const PolicySpace& space);

RegretCurve fol_regret(std::span<const RewardVector> rewards, std::span<const Policy> policies,
                       const PolicySpace& space, ComparatorMode mode = ComparatorMode::kPrefix);

// t max_a r(a) - sum_{tau <= t} <pi_tau, r>
RegretCurve mab_expected_regret(const Vec& means, std::span<const Policy> policies);

// t max_a r(a) - sum_{tau <= t} R_tau(a_tau)
RegretCurve mab_realized_regret(const Vec& means, std::span<const std::size_t> actions,
                                std::span<const double> sampled_rewards);

// sum_{tau <= t} (max_a r_tau(a) - <pi_tau, r_tau>)
RegretCurve dynamic_regret(std::span<const Vec> means, std::span<const Policy> policies);

struct GrowthFit {
  double beta_hat = 0.0;
  double alpha_hat = 0.0;
  double p_reg = 1.0;  // two-sided p-value of the slope
  std::size_t points_used = 0;
};

inline constexpr double kPositiveRegretFloor = 1e-6;

// OLS of log Regret(t) on log t, t = 1-based index. Values <= eps are dropped.
GrowthFit fit_regret_growth(std::span<const double> curve, double eps = kPositiveRegretFloor);
inline GrowthFit fit_regret_growth(const RegretCurve& c, double eps = kPositiveRegretFloor) {
  return fit_regret_growth(std::span<const double>(c.values), eps);
}

// Pointwise mean over replicate curves of equal length.
std::vector<double> mean_curve(std::span<const std::vector<double>> curves);

using ActionRuns = std::vector<std::vector<std::size_t>>;

// Fraction of replicates that never pick their best arm during rounds t..T.
// best_arms[i] is either one arm per round for replicate i or, when it has a
// single entry, a fixed best arm.
double suff_fail_freq(const ActionRuns& runs, const ActionRuns& best_arms, int t);
double suff_fail_freq(const ActionRuns& runs, std::size_t best_arm, int t);
// Values for t = 1..T.
std::vector<double> suff_fail_freq_series(const ActionRuns& runs, const ActionRuns& best_arms);

// d times the replicate mean of min_a (pulls of a in rounds 1..t) / t.
double min_frac(const ActionRuns& runs, int t, std::size_t d);
std::vector<double> min_frac_series(const ActionRuns& runs, std::size_t d);

struct ExplorationReport {
  std::vector<double> suff_fail_freq;
  std::vector<double> min_frac_scaled;
};

ExplorationReport exploration_report(const ActionRuns& runs, const ActionRuns& best_arms,
                                     std::size_t d);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sided two-sample test of whether sample_a is stochastically smaller
// than sample_b: D = sup_x (F_a(x) - F_b(x)), p = exp(-2 D^2 mn / (m + n)).
KsResult ks_one_sided(std::span<const double> sample_a, std::span<const double> sample_b);

// Exact permutation p-value P(D >= D_obs) over all splits of the pooled
// sample. Limited to m + n <= 20.
double ks_one_sided_exact_p(std::span<const double> sample_a, std::span<const double> sample_b);

}  // namespace noregret
