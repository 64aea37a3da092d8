#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "grad_check.hpp"
#include "noregret/attn_model.hpp"
#include "noregret/error.hpp"

using namespace noregret;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ModelParams identity_params(std::size_t d) {
  ModelParams p = ModelParams::zeros(d);
  const auto n = static_cast<Eigen::Index>(d);
  p.V = p.K = p.Q = Mat::Identity(n, n);
  return p;
}

std::vector<RewardVector> random_history(std::size_t d, int T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<RewardVector> h;
  for (int t = 0; t < T; ++t) {
    Vec r(static_cast<Eigen::Index>(d));
    for (auto& x : r) x = u(rng);
    h.push_back(r);
  }
  return h;
}

// K = 0 removes the quadratic term and leaves C = kappa V, dvec = kappa v_c.
ModelParams ftrl_form(std::size_t d, double c, double v_shift) {
  ModelParams p = ModelParams::zeros(d);
  const auto n = static_cast<Eigen::Index>(d);
  p.V = Mat::Identity(n, n);
  p.q_c[0] = 1.0;
  p.k_c[0] = c;
  p.v_c = Vec::Constant(n, v_shift);
  return p;
}

}  // namespace

TEST(AttnModel, EmptyHistoryIsUniform) {
  std::mt19937_64 rng(1);
  const ModelParams p = init_params(3, rng);
  const std::vector<RewardVector> none;
  EXPECT_TRUE(forward(none, p, Operator::softmax()).isApprox(Vec::Constant(3, 1.0 / 3)));
}

TEST(AttnModel, IdentityForwardExample) {
  const std::vector<RewardVector> h{vec({1, 0, 0})};
  const ModelParams p = identity_params(3);
  EXPECT_EQ(score(h, p), vec({1, 0, 0}));
  const Vec pi = forward(h, p, Operator::softmax());
  const double e = std::exp(1.0);
  EXPECT_NEAR(pi[0], e / (e + 2), 1e-15);
  EXPECT_NEAR(pi[1], 1 / (e + 2), 1e-15);
  EXPECT_NEAR(pi[2], 1 / (e + 2), 1e-15);
}

TEST(AttnModel, ZeroParamsGiveOrigin) {
  std::mt19937_64 rng(2);
  const auto h = random_history(3, 5, rng);
  EXPECT_EQ(forward(h, ModelParams::zeros(3), Operator::l2_ball(1.0)), Vec::Zero(3));
}

TEST(AttnModel, DimensionMismatch) {
  const std::vector<RewardVector> h{vec({1, 0})};
  EXPECT_THROW(forward(h, identity_params(3), Operator::softmax()), ArgumentError);
}

TEST(AttnModel, ScoreMatchesDirectSum) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const ModelParams p = init_params(3, rng, 1.0);
    const auto h = random_history(3, 6, rng);
    const Vec q = p.Q * Vec::Ones(3) + p.q_c;
    Vec want = Vec::Zero(3);
    for (const auto& r : h) want += (p.V * r + p.v_c) * (p.K * r + p.k_c).dot(q);
    EXPECT_LT((score(h, p) - want).norm(), 1e-10 * (1 + want.norm()));
  }
}

TEST(Reparam, IdentityParams) {
  const Reparam r = reparam(identity_params(3));
  EXPECT_EQ(r.A, Mat::Identity(3, 3));
  EXPECT_EQ(r.b, Vec::Ones(3));
  EXPECT_EQ(r.C, Mat::Zero(3, 3));
  EXPECT_EQ(r.dvec, Vec::Zero(3));
}

TEST(Reparam, RewriteIdentity) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(0, 10), dim(2, 5);
  for (int k = 0; k < 1000; ++k) {
    const auto d = static_cast<std::size_t>(dim(rng));
    const ModelParams p = init_params(d, rng, 1.0);
    const auto h = random_history(d, k < 100 ? 5 : len(rng), rng);
    const Vec a = score(h, p);
    const Vec b = reparam_score(h, reparam(p));
    ASSERT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, a.lpNorm<Eigen::Infinity>()));
  }
}

TEST(Reparam, ZeroValueBiasZeroesDvec) {
  std::mt19937_64 rng(5);
  ModelParams p = init_params(4, rng, 1.0);
  p.v_c.setZero();
  EXPECT_EQ(reparam(p).dvec, Vec::Zero(4));
}

TEST(Diagnostics, Examples) {
  const auto z = diagnostics(ModelParams::zeros(3), OperatorKind::kSoftmax);
  EXPECT_EQ(z.a_b_norm, 0.0);
  EXPECT_EQ(z.c_dev, 0.0);
  EXPECT_EQ(z.d_dev, 0.0);

  Reparam r{Mat::Identity(3, 3), Vec::Ones(3), 2.0 * Mat::Identity(3, 3), Vec::Zero(3)};
  auto g = diagnostics(r, OperatorKind::kSoftmax);
  EXPECT_NEAR(g.a_b_norm, 3.0, 1e-15);
  EXPECT_EQ(g.c_dev, 0.0);

  r.dvec = Vec::Constant(3, 4.0);
  EXPECT_NEAR(diagnostics(r, OperatorKind::kSoftmax).d_dev, 0.0, 1e-15);
  EXPECT_NEAR(diagnostics(r, OperatorKind::kProjL2Ball).d_dev, std::sqrt(48.0), 1e-12);
  r.C(0, 1) = 3.0;
  EXPECT_NEAR(diagnostics(r, OperatorKind::kSoftmax).c_dev, 3.0, 1e-15);
}

TEST(Gradient, TargetAtOutputIsZero) {
  std::mt19937_64 rng(6);
  for (OperatorKind kind : {OperatorKind::kSoftmax, OperatorKind::kProjL2Ball}) {
    const ModelParams p = init_params(3, rng, 0.5);
    const Operator op = kind == OperatorKind::kSoftmax ? Operator::softmax() : Operator::l2_ball(1.0);
    const auto h = random_history(3, 4, rng);
    const std::vector<HistoryTarget> batch{{h, forward(h, p, op)}};
    const auto g = gradient(p, batch, op);
    EXPECT_EQ(g.loss, 0.0);
    EXPECT_EQ(g.grad.flatten().norm(), 0.0);
  }
}

TEST(Gradient, DuplicatedItemDoubles) {
  std::mt19937_64 rng(7);
  const ModelParams p = init_params(3, rng, 0.5);
  const auto h = random_history(3, 4, rng);
  const HistoryTarget item{h, vec({0.2, 0.3, 0.5})};
  const std::vector<HistoryTarget> one{item}, two{item, item};
  const Vec g1 = gradient(p, one, Operator::softmax()).grad.flatten();
  const Vec g2 = gradient(p, two, Operator::softmax()).grad.flatten();
  EXPECT_EQ(g2, 2.0 * g1);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  bool saw_boundary = false;
  for (int k = 0; k < 100; ++k) {
    for (OperatorKind kind : {OperatorKind::kSoftmax, OperatorKind::kProjL2Ball}) {
      const bool interior = k % 2 == 0;
      const auto in = gradcheck::make_instance(rng, kind, interior);
      const auto res = gradcheck::check(in, LossTarget::kOperatorOutput);
      EXPECT_LT(res.max_rel_error, 1e-5) << "instance " << k;
      if (kind == OperatorKind::kProjL2Ball && !interior) saw_boundary |= res.boundary_hit;
    }
  }
  EXPECT_TRUE(saw_boundary);
}

TEST(Gradient, RawScoreTarget) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto in = gradcheck::make_instance(rng, OperatorKind::kSoftmax, true);
    EXPECT_LT(gradcheck::check(in, LossTarget::kRawScore).max_rel_error, 1e-5);
  }
}

TEST(Params, FlattenRoundTripAndSize) {
  std::mt19937_64 rng(10);
  const ModelParams p = init_params(4, rng);
  EXPECT_EQ(p.size(), 3u * 16 + 3 * 4);
  const ModelParams q = ModelParams::unflatten(4, p.flatten());
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(p.flatten()[1], p.V(1, 0));
}

TEST(Params, JsonRoundTrip) {
  std::mt19937_64 rng(11);
  const ModelParams p = init_params(3, rng);
  const auto j = params_to_json(p, Operator::l2_ball(2.0));
  Operator op;
  const ModelParams q = params_from_json(j, &op);
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(op.kind, OperatorKind::kProjL2Ball);
  EXPECT_EQ(op.radius, 2.0);
  auto broken = j;
  broken.erase("K");
  EXPECT_THROW(params_from_json(broken), ConfigError);
  broken = j;
  broken["d"] = 4;
  EXPECT_THROW(params_from_json(broken), ConfigError);
}

TEST(EquivalenceGap, ExactFtrlForm) {
  const auto probes = sample_probe_histories(ProcessKind::kGaussian, 3, 25, 20, 1);
  const auto g = ftrl_equivalence_gap(ftrl_form(3, 0.05, 0.7), Operator::softmax(), probes);
  EXPECT_LT(g.gap, 1e-9);
  EXPECT_NEAR(g.c_prime, 0.05, 1e-12);
  const auto b = ftrl_equivalence_gap(ftrl_form(3, 0.01, 0.0), Operator::l2_ball(1.0), probes);
  EXPECT_LT(b.gap, 1e-9);
  const auto diag = diagnostics(ftrl_form(3, 0.05, 0.7), OperatorKind::kSoftmax);
  EXPECT_LT(diag.a_b_norm + diag.c_dev + diag.d_dev, 1e-12);
}

TEST(EquivalenceGap, ZeroParams) {
  const auto probes = sample_probe_histories(ProcessKind::kGaussian, 3, 25, 5, 2);
  const auto g = ftrl_equivalence_gap(ModelParams::zeros(3), Operator::softmax(), probes);
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_EQ(g.c_prime, 0.0);
}

TEST(EquivalenceGap, RandomInitIsFar) {
  const auto probes = sample_probe_histories(ProcessKind::kGaussian, 3, 25, 100, 3);
  std::mt19937_64 rng(12);
  for (int k = 0; k < 10; ++k) {
    EXPECT_GT(ftrl_equivalence_gap(init_params(3, rng), Operator::softmax(), probes).gap, 0.01);
  }
}

TEST(EquivalenceGap, SmallDiagnosticsGiveSmallGap) {
  const auto probes = sample_probe_histories(ProcessKind::kUniform, 3, 25, 50, 4);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1e-10);
  for (int k = 0; k < 20; ++k) {
    ModelParams p = ftrl_form(3, 0.02 * (k + 1), 0.3);
    p.K = p.K.unaryExpr([&](double) { return n(rng); });
    p.V += p.V.unaryExpr([&](double) { return n(rng); });
    const auto diag = diagnostics(p, OperatorKind::kSoftmax);
    ASSERT_LT(std::max({diag.a_b_norm, diag.c_dev, diag.d_dev}), 1e-8);
    EXPECT_LT(ftrl_equivalence_gap(p, Operator::softmax(), probes).gap, 1e-6);
  }
}

TEST(EquivalenceGap, EmptyProbesRejected) {
  const std::vector<std::vector<RewardVector>> none;
  EXPECT_THROW(ftrl_equivalence_gap(ModelParams::zeros(3), Operator::softmax(), none), ArgumentError);
  EXPECT_THROW(sample_probe_histories(ProcessKind::kAdaptive, 3, 5, 1, 0), UnsupportedError);
}

TEST(ModelLearner, NoiselessMatchesForward) {
  std::mt19937_64 rng(14);
  const ModelParams p = init_params(3, rng);
  ModelLearner learner(p, Operator::softmax());
  const auto h = random_history(3, 8, rng);
  std::vector<RewardVector> seen;
  for (int t = 1; t <= 8; ++t) {
    EXPECT_TRUE(learner.act(t).isApprox(forward(seen, p, Operator::softmax()), 1e-14));
    learner.observe(t, 0, h[static_cast<std::size_t>(t - 1)]);
    seen.push_back(h[static_cast<std::size_t>(t - 1)]);
  }
}
