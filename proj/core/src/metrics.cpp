#include "noregret/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "noregret/error.hpp"

namespace noregret {

namespace {

constexpr double kPolicyCheckTol = 1e-6;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                        " vs " + std::to_string(b) + ")");
  }
}

void require_dim(const Vec& v, Eigen::Index d, const char* what) {
  if (v.size() != d) throw ArgumentError(std::string(what) + ": dimension mismatch");
}

}  // namespace

double best_fixed_value(const Vec& cumulative, const PolicySpace& space) {
  if (space.kind == PolicySpaceKind::kSimplex) return cumulative.maxCoeff();
  return space.radius * cumulative.norm();
}

RegretCurve fol_regret(std::span<const RewardVector> rewards, std::span<const Policy> policies,
                       const PolicySpace& space, ComparatorMode mode) {
  require_same_length(rewards.size(), policies.size(), "fol_regret");
  RegretCurve out;
  out.env_kind = EnvKind::kFOL;
  out.comparator = mode;
  if (rewards.empty()) return out;
  const Eigen::Index d = rewards.front().size();

  Policy final_best;
  if (mode == ComparatorMode::kFinal) {
    Vec total = Vec::Zero(d);
    for (const auto& r : rewards) {
      require_dim(r, d, "fol_regret");
      total += r;
    }
    if (space.kind == PolicySpaceKind::kSimplex) {
      final_best = vertex(static_cast<std::size_t>(d), argmax_lowest(total));
    } else {
      const double n = total.norm();
      final_best = n > 0.0 ? Vec(space.radius * total / n) : Vec(Vec::Zero(d));
    }
  }

  Vec S = Vec::Zero(d);
  double earned = 0.0;
  double comparator_sum = 0.0;
  out.values.reserve(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    require_dim(rewards[t], d, "fol_regret");
    require_dim(policies[t], d, "fol_regret");
    if (!is_valid_policy(policies[t], space, kPolicyCheckTol)) {
      throw ArgumentError("fol_regret: policy at round " + std::to_string(t + 1) +
                          " is outside the policy space");
    }
    S += rewards[t];
    earned += policies[t].dot(rewards[t]);
    if (mode == ComparatorMode::kPrefix) {
      out.values.push_back(best_fixed_value(S, space) - earned);
    } else {
      comparator_sum += final_best.dot(rewards[t]);
      out.values.push_back(comparator_sum - earned);
    }
  }
  return out;
}

RegretCurve mab_expected_regret(const Vec& means, std::span<const Policy> policies) {
  RegretCurve out;
  out.env_kind = EnvKind::kMAB;
  const double best = means.maxCoeff();
  double acc = 0.0;
  out.values.reserve(policies.size());
  for (const auto& pi : policies) {
    require_dim(pi, means.size(), "mab_expected_regret");
    acc += best - pi.dot(means);
    out.values.push_back(acc);
  }
  return out;
}

RegretCurve mab_realized_regret(const Vec& means, std::span<const std::size_t> actions,
                                std::span<const double> sampled_rewards) {
  require_same_length(actions.size(), sampled_rewards.size(), "mab_realized_regret");
  RegretCurve out;
  out.env_kind = EnvKind::kMAB;
  const double best = means.maxCoeff();
  double acc = 0.0;
  out.values.reserve(actions.size());
  for (std::size_t t = 0; t < actions.size(); ++t) {
    if (actions[t] >= static_cast<std::size_t>(means.size())) {
      throw ArgumentError("mab_realized_regret: action out of range");
    }
    acc += best - sampled_rewards[t];
    out.values.push_back(acc);
  }
  return out;
}

RegretCurve dynamic_regret(std::span<const Vec> means, std::span<const Policy> policies) {
  require_same_length(means.size(), policies.size(), "dynamic_regret");
  RegretCurve out;
  out.env_kind = EnvKind::kNSMAB;
  double acc = 0.0;
  out.values.reserve(means.size());
  for (std::size_t t = 0; t < means.size(); ++t) {
    require_dim(policies[t], means[t].size(), "dynamic_regret");
    acc += means[t].maxCoeff() - policies[t].dot(means[t]);
    out.values.push_back(acc);
  }
  return out;
}

GrowthFit fit_regret_growth(std::span<const double> curve, double eps) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] > eps && std::isfinite(curve[i])) {
      xs.push_back(std::log(static_cast<double>(i + 1)));
      ys.push_back(std::log(curve[i]));
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    throw InsufficientDataError("fit_regret_growth: need at least 3 rounds with positive regret, got " +
                                std::to_string(n));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw InsufficientDataError("fit_regret_growth: degenerate design");

  GrowthFit fit;
  fit.points_used = n;
  fit.beta_hat = sxy / sxx;
  fit.alpha_hat = my - fit.beta_hat * mx;

  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (fit.alpha_hat + fit.beta_hat * xs[i]);
    sse += e * e;
  }
  const double dof = static_cast<double>(n - 2);
  const double se = std::sqrt(sse / dof / sxx);
  // Relative floor so that an exact power law counts as a perfect fit.
  const double scale = std::max(1.0, std::abs(fit.beta_hat));
  if (se <= 1e-12 * scale) {
    fit.p_reg = std::abs(fit.beta_hat) <= 1e-12 ? 1.0 : 0.0;
  } else {
    boost::math::students_t dist(dof);
    const double tstat = std::abs(fit.beta_hat / se);
    fit.p_reg = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, tstat)), 0.0, 1.0);
  }
  return fit;
}

std::vector<double> mean_curve(std::span<const std::vector<double>> curves) {
  if (curves.empty()) throw ArgumentError("mean_curve: no curves");
  std::vector<double> out(curves.front().size(), 0.0);
  for (const auto& c : curves) {
    require_same_length(c.size(), out.size(), "mean_curve");
    for (std::size_t t = 0; t < c.size(); ++t) out[t] += c[t];
  }
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

namespace {

std::size_t best_at(const std::vector<std::size_t>& best, std::size_t t) {
  return best.size() == 1 ? best.front() : best[t];
}

// Last 1-based round in which run i picked its best arm, 0 if never.
std::vector<std::size_t> last_best_rounds(const ActionRuns& runs, const ActionRuns& best_arms) {
  require_same_length(runs.size(), best_arms.size(), "suff_fail_freq");
  std::vector<std::size_t> last(runs.size(), 0);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& best = best_arms[i];
    if (best.empty()) throw ArgumentError("suff_fail_freq: empty best-arm sequence");
    if (best.size() != 1) require_same_length(best.size(), runs[i].size(), "suff_fail_freq");
    for (std::size_t t = 0; t < runs[i].size(); ++t) {
      if (runs[i][t] == best_at(best, t)) last[i] = t + 1;
    }
  }
  return last;
}

std::size_t common_horizon(const ActionRuns& runs) {
  if (runs.empty()) throw ArgumentError("no replicate runs");
  const std::size_t T = runs.front().size();
  for (const auto& r : runs) require_same_length(r.size(), T, "replicate runs");
  return T;
}

}  // namespace

double suff_fail_freq(const ActionRuns& runs, const ActionRuns& best_arms, int t) {
  const std::size_t T = common_horizon(runs);
  if (t < 1 || static_cast<std::size_t>(t) > T) {
    throw ArgumentError("suff_fail_freq: t must lie in [1, T]");
  }
  const auto last = last_best_rounds(runs, best_arms);
  std::size_t fails = 0;
  for (std::size_t l : last) fails += l < static_cast<std::size_t>(t) ? 1 : 0;
  return static_cast<double>(fails) / static_cast<double>(runs.size());
}

double suff_fail_freq(const ActionRuns& runs, std::size_t best_arm, int t) {
  return suff_fail_freq(runs, ActionRuns(runs.size(), {best_arm}), t);
}

std::vector<double> suff_fail_freq_series(const ActionRuns& runs, const ActionRuns& best_arms) {
  const std::size_t T = common_horizon(runs);
  const auto last = last_best_rounds(runs, best_arms);
  std::vector<double> out(T, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    std::size_t fails = 0;
    for (std::size_t l : last) fails += l < t ? 1 : 0;
    out[t - 1] = static_cast<double>(fails) / static_cast<double>(runs.size());
  }
  return out;
}

std::vector<double> min_frac_series(const ActionRuns& runs, std::size_t d) {
  const std::size_t T = common_horizon(runs);
  if (d == 0) throw ArgumentError("min_frac: d must be positive");
  std::vector<double> out(T, 0.0);
  std::vector<std::size_t> counts(d);
  for (const auto& run : runs) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t t = 0; t < T; ++t) {
      if (run[t] >= d) throw ArgumentError("min_frac: action out of range");
      ++counts[run[t]];
      const auto mn = *std::min_element(counts.begin(), counts.end());
      out[t] += static_cast<double>(mn) / static_cast<double>(t + 1);
    }
  }
  for (double& v : out) v *= static_cast<double>(d) / static_cast<double>(runs.size());
  return out;
}

double min_frac(const ActionRuns& runs, int t, std::size_t d) {
  const std::size_t T = common_horizon(runs);
  if (t < 1 || static_cast<std::size_t>(t) > T) throw ArgumentError("min_frac: t must lie in [1, T]");
  return min_frac_series(runs, d)[static_cast<std::size_t>(t - 1)];
}

ExplorationReport exploration_report(const ActionRuns& runs, const ActionRuns& best_arms,
                                     std::size_t d) {
  return {suff_fail_freq_series(runs, best_arms), min_frac_series(runs, d)};
}

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Walk the pooled support; both ECDFs jump at each distinct value.
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, static_cast<double>(i) / m - static_cast<double>(j) / n);
  }
  return d;
}

void require_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_one_sided: empty sample");
}

}  // namespace

KsResult ks_one_sided(std::span<const double> sample_a, std::span<const double> sample_b) {
  require_nonempty(sample_a, sample_b);
  KsResult r;
  r.statistic = ks_statistic({sample_a.begin(), sample_a.end()}, {sample_b.begin(), sample_b.end()});
  const double m = static_cast<double>(sample_a.size());
  const double n = static_cast<double>(sample_b.size());
  r.p_value = std::clamp(std::exp(-2.0 * r.statistic * r.statistic * m * n / (m + n)), 0.0, 1.0);
  return r;
}

double ks_one_sided_exact_p(std::span<const double> sample_a, std::span<const double> sample_b) {
  require_nonempty(sample_a, sample_b);
  const std::size_t m = sample_a.size();
  const std::size_t N = m + sample_b.size();
  if (N > 20) throw ArgumentError("ks_one_sided_exact_p: pooled size must be at most 20");
  std::vector<double> pooled(sample_a.begin(), sample_a.end());
  pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
  const double observed = ks_statistic({sample_a.begin(), sample_a.end()},
                                       {sample_b.begin(), sample_b.end()});

  std::size_t hits = 0, total = 0;
  std::vector<double> a, b;
  for (std::uint32_t mask = 0; mask < (1U << N); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != m) continue;
    a.clear();
    b.clear();
    for (std::size_t k = 0; k < N; ++k) ((mask >> k) & 1U ? a : b).push_back(pooled[k]);
    ++total;
    if (ks_statistic(a, b) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace noregret
