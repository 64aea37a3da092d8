#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "noregret/env.hpp"
#include "noregret/error.hpp"
#include "noregret/scenario_io.hpp"

using namespace noregret;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

const ProcessKind kAllKinds[] = {
    ProcessKind::kUniform,     ProcessKind::kGaussian,         ProcessKind::kGamma,
    ProcessKind::kBernoulli,   ProcessKind::kSineTrend,        ProcessKind::kAlternating,
    ProcessKind::kNoisyAlternating, ProcessKind::kAdaptive,   ProcessKind::kGradualVariation,
};

}  // namespace

TEST(Env, AlternatingFirstRound) {
  ProcessParams p = AlternatingParams{3, 0};
  Rng rng = make_rng(0);
  EXPECT_EQ(next_reward(p, 1, nullptr, rng), v3(0, 10, 0));
}

TEST(Env, AlternatingCyclesWithPeriodD) {
  for (std::size_t d : {2u, 3u, 5u}) {
    for (std::size_t shift = 0; shift < d; ++shift) {
      ProcessParams p = AlternatingParams{d, shift};
      Rng rng = make_rng(1);
      std::vector<std::size_t> hot;
      for (int t = 1; t <= 20; ++t) {
        const Vec r = next_reward(p, t, nullptr, rng);
        EXPECT_EQ((r.array() == 10.0).count(), 1);
        EXPECT_EQ((r.array() == 0.0).count(), static_cast<Eigen::Index>(d) - 1);
        hot.push_back(argmax_lowest(r));
      }
      for (std::size_t t = d; t < hot.size(); ++t) EXPECT_EQ(hot[t], hot[t - d]);
      EXPECT_EQ(hot[0], (1 + shift) % d);
    }
  }
}

TEST(Env, AdaptivePunishesArgmax) {
  ProcessParams p = AdaptiveParams{3};
  Rng rng = make_rng(0);
  const Vec pi = v3(0.5, 0.3, 0.2);
  EXPECT_EQ(next_reward(p, 1, &pi, rng), v3(0, 10, 10));
  const Vec tie = v3(0.4, 0.4, 0.2);
  EXPECT_EQ(next_reward(p, 2, &tie, rng), v3(0, 10, 10));
  const Vec last = v3(0.1, 0.2, 0.7);
  EXPECT_EQ(next_reward(p, 3, &last, rng), v3(10, 10, 0));
  EXPECT_THROW(next_reward(p, 4, nullptr, rng), ArgumentError);
}

TEST(Env, PolicyOnlyForAdaptive) {
  ProcessParams p = AlternatingParams{3, 0};
  Rng rng = make_rng(0);
  const Vec pi = v3(1, 0, 0);
  EXPECT_THROW(next_reward(p, 1, &pi, rng), ArgumentError);
  EXPECT_THROW(next_reward(p, 0, nullptr, rng), ArgumentError);
}

TEST(Env, SineTrendZeroFrequency) {
  ProcessParams p = SineTrendParams{Vec::Zero(3), Vec::Zero(3)};
  Rng rng = make_rng(0);
  for (int t : {1, 7, 100}) EXPECT_EQ(next_reward(p, t, nullptr, rng), v3(5, 5, 5));
}

TEST(Env, NoisyAlternatingHotValue) {
  ProcessParams p = NoisyAlternatingParams{3, 0};
  Rng rng = make_rng(2);
  const Vec r1 = next_reward(p, 1, nullptr, rng);
  EXPECT_DOUBLE_EQ(r1[1], 10.0);
  const Vec r4 = next_reward(p, 4, nullptr, rng);
  EXPECT_DOUBLE_EQ(r4[(4 + 0) % 3], 5.0);
  for (Eigen::Index i : {0, 2}) {
    EXPECT_GE(r1[i], 9.0);
    EXPECT_LE(r1[i], 10.0);
  }
}

TEST(Env, ClippedProcessesStayInRange) {
  for (ProcessKind k : kAllKinds) {
    if (k == ProcessKind::kAdaptive) continue;
    Rng prng = make_rng(3);
    ProcessParams p = sample_process_params(k, 4, prng);
    Rng rng = make_rng(4);
    for (int t = 1; t <= 500; ++t) {
      const Vec r = next_reward(p, t, nullptr, rng);
      ASSERT_TRUE(r.allFinite());
      ASSERT_GE(r.minCoeff(), kRewardMin) << to_string(k);
      ASSERT_LE(r.maxCoeff(), kRewardMax) << to_string(k);
    }
  }
}

TEST(Env, SampledParametersInRange) {
  Rng rng = make_rng(5);
  for (int k = 0; k < 100; ++k) {
    auto u = std::get<UniformParams>(sample_process_params(ProcessKind::kUniform, 3, rng));
    EXPECT_GE(std::min(u.x.minCoeff(), u.y.minCoeff()), 0.0);
    EXPECT_LE(std::max(u.x.maxCoeff(), u.y.maxCoeff()), 10.0);
    auto g = std::get<GammaParams>(sample_process_params(ProcessKind::kGamma, 3, rng));
    EXPECT_GT(g.shape.minCoeff(), 0.0);
    EXPECT_LE(g.shape.maxCoeff(), 10.0);
    EXPECT_GT(g.scale.minCoeff(), 0.0);
    EXPECT_LE(g.scale.maxCoeff(), 2.0);
    auto b = std::get<BernoulliParams>(sample_process_params(ProcessKind::kBernoulli, 3, rng));
    EXPECT_GE(std::min(b.x, b.y), 0.0);
    EXPECT_LE(std::max(b.x, b.y), 10.0);
    EXPECT_GE(b.success_prob.minCoeff(), 0.0);
    EXPECT_LE(b.success_prob.maxCoeff(), 1.0);
    auto s = std::get<SineTrendParams>(sample_process_params(ProcessKind::kSineTrend, 3, rng));
    EXPECT_GE(std::min(s.freq.minCoeff(), s.phase.minCoeff()), 0.0);
    EXPECT_LE(std::max(s.freq.maxCoeff(), s.phase.maxCoeff()), 10.0);
    auto a = std::get<AlternatingParams>(sample_process_params(ProcessKind::kAlternating, 3, rng));
    EXPECT_LT(a.shift, 3u);
    auto gv = std::get<GradualVariationParams>(
        sample_process_params(ProcessKind::kGradualVariation, 3, rng));
    EXPECT_GE(gv.mean.minCoeff(), 0.0);
    EXPECT_LE(gv.mean.maxCoeff(), 10.0);
    EXPECT_EQ(gv.round, 1);
  }
}

TEST(Env, DimensionBelowTwoRejected) {
  Rng rng = make_rng(0);
  EXPECT_THROW(sample_process_params(ProcessKind::kAlternating, 1, rng), ArgumentError);
}

TEST(Env, SameSeedSameParams) {
  Rng a = make_rng(77), b = make_rng(77);
  const auto pa = std::get<GaussianParams>(sample_process_params(ProcessKind::kGaussian, 3, a));
  const auto pb = std::get<GaussianParams>(sample_process_params(ProcessKind::kGaussian, 3, b));
  EXPECT_EQ(pa.mu, pb.mu);
}

TEST(Env, SameSeedSameStream) {
  for (ProcessKind k : kAllKinds) {
    if (k == ProcessKind::kAdaptive) continue;
    const Scenario s = make_scenario(EnvKind::kFOL, 3, 30, PolicySpace::simplex(), k, 99);
    RewardStream x(s), y(s);
    for (int t = 1; t <= 30; ++t) {
      const Vec rx = x.next(), ry = y.next();
      ASSERT_EQ(0, std::memcmp(rx.data(), ry.data(), sizeof(double) * 3)) << to_string(k);
    }
  }
}

TEST(Env, GradualVariationDrift) {
  Rng prng = make_rng(6);
  ProcessParams p = sample_process_params(ProcessKind::kGradualVariation, 3, prng);
  Rng rng = make_rng(7);
  EXPECT_THROW(next_reward(p, 2, nullptr, rng), ArgumentError);
  for (int t = 1; t <= 200; ++t) {
    const Vec before = std::get<GradualVariationParams>(p).mean;
    EXPECT_EQ(mean_reward(p, t, MeanMode::kAnalyticUnclipped), before);
    next_reward(p, t, nullptr, rng);
    const Vec after = std::get<GradualVariationParams>(p).mean;
    EXPECT_LE((after - before).lpNorm<Eigen::Infinity>(), 1.0 / std::sqrt(t) + 1e-15);
  }
}

TEST(Env, GradualVariationFirstMeanIsInitial) {
  Rng prng = make_rng(8);
  ProcessParams p = sample_process_params(ProcessKind::kGradualVariation, 3, prng);
  const Vec r1 = std::get<GradualVariationParams>(p).mean;
  EXPECT_EQ(mean_reward(p, 1, MeanMode::kAnalyticUnclipped), r1);
  EXPECT_GE(r1.minCoeff(), 0.0);
  EXPECT_LE(r1.maxCoeff(), 10.0);
}

TEST(Env, AnalyticMeans) {
  BernoulliParams b;
  b.x = 2;
  b.y = 8;
  b.success_prob = Vec::Constant(2, 0.5);
  EXPECT_NEAR(mean_reward(b, 1, MeanMode::kAnalyticUnclipped)[0], 5.0, 1e-12);
  GammaParams g{Vec::Constant(2, 2.0), Vec::Constant(2, 1.5)};
  EXPECT_NEAR(mean_reward(g, 1, MeanMode::kAnalyticUnclipped)[1], 3.0, 1e-12);
  UniformParams u{v3(0, 4, 10), v3(2, 4, 0)};
  EXPECT_EQ(mean_reward(u, 1, MeanMode::kAnalyticUnclipped), v3(1, 4, 5));
}

TEST(Env, MeanUndefinedForNonStochastic) {
  EXPECT_THROW(mean_reward(AlternatingParams{3, 0}, 1, MeanMode::kAnalyticUnclipped),
               UnsupportedError);
  EXPECT_THROW(mean_reward(AdaptiveParams{3}, 1, MeanMode::kAnalyticUnclipped), UnsupportedError);
  EXPECT_THROW(mean_reward(SineTrendParams{Vec::Zero(3), Vec::Zero(3)}, 1,
                           MeanMode::kAnalyticUnclipped),
               UnsupportedError);
}

TEST(Env, ClippedMeanNearAnalyticInInterior) {
  ProcessParams g = GaussianParams{Vec::Constant(3, 5.0)};
  const Vec a = mean_reward(g, 1, MeanMode::kAnalyticUnclipped);
  const Vec m = mean_reward(g, 1, MeanMode::kMonteCarloClipped, {100000, 3});
  EXPECT_LT((a - m).lpNorm<Eigen::Infinity>(), 0.2);
}

TEST(Env, BanditFeedback) {
  const Vec r = v3(3, 7, 1);
  const auto fb = bandit_feedback(r, 1);
  EXPECT_EQ(fb.reward, 7.0);
  EXPECT_EQ(fb.masked, v3(0, 7, 0));
  EXPECT_THROW(bandit_feedback(r, 3), ArgumentError);
  const auto z = bandit_feedback(Vec::Zero(3), 0);
  EXPECT_EQ(z.reward, 0.0);
  EXPECT_EQ(z.masked, Vec::Zero(3));
}

TEST(Env, VariationBudget) {
  std::vector<Vec> flat(5, v3(1, 2, 3));
  EXPECT_EQ(variation_budget(flat), 0.0);
  Vec a(2), b(2);
  a << 0, 0;
  b << 1, 3;
  std::vector<Vec> two{a, b};
  EXPECT_EQ(variation_budget(two), 3.0);
  EXPECT_THROW(variation_budget(std::span<const Vec>(two.data(), 1)), ArgumentError);
}

TEST(Env, GradualVariationBudgetGrowsLikeSqrtT) {
  const int T = 100;
  double total = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const Scenario sc = make_scenario(EnvKind::kNSMAB, 3, T, PolicySpace::simplex(),
                                      ProcessKind::kGradualVariation, static_cast<std::uint64_t>(s));
    RewardStream stream(sc);
    std::vector<Vec> means;
    for (int t = 1; t <= T; ++t) {
      means.push_back(stream.mean());
      stream.next();
    }
    total += variation_budget(means);
  }
  const double v = total / seeds;
  const double ref = 2.0 * std::sqrt(static_cast<double>(T));
  EXPECT_GT(v, ref / 3.0);
  EXPECT_LT(v, ref * 3.0);
}

TEST(Env, ScenarioValidation) {
  EXPECT_THROW(make_scenario(EnvKind::kMAB, 3, 10, PolicySpace::l2_ball(1.0), ProcessKind::kGaussian, 0),
               ConfigError);
  EXPECT_THROW(make_scenario(EnvKind::kMAB, 3, 10, PolicySpace::simplex(), ProcessKind::kAlternating, 0),
               ConfigError);
  EXPECT_THROW(make_scenario(EnvKind::kNSMAB, 3, 10, PolicySpace::simplex(), ProcessKind::kGaussian, 0),
               ConfigError);
  EXPECT_THROW(make_scenario(EnvKind::kFOL, 3, 0, PolicySpace::simplex(), ProcessKind::kGaussian, 0),
               ConfigError);
  EXPECT_NO_THROW(make_scenario(EnvKind::kMAB, 3, 10, PolicySpace::simplex(), ProcessKind::kGamma, 0));
}

TEST(Env, ScenarioJsonRoundTrip) {
  for (ProcessKind k : kAllKinds) {
    const Scenario s = make_scenario(EnvKind::kFOL, 3, 17, PolicySpace::l2_ball(2.5), k, 1234);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(s)) << to_string(k);
    if (k == ProcessKind::kAdaptive) continue;
    RewardStream a(s), b(back);
    for (int t = 1; t <= 5; ++t) EXPECT_EQ(a.next(), b.next());
  }
}

TEST(Env, ParseNames) {
  EXPECT_EQ(parse_process_kind(to_string(ProcessKind::kNoisyAlternating)),
            ProcessKind::kNoisyAlternating);
  EXPECT_EQ(parse_env_kind(to_string(EnvKind::kNSMAB)), EnvKind::kNSMAB);
  EXPECT_THROW(parse_process_kind("brownian"), ConfigError);
}
