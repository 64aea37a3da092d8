#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noregret/baselines.hpp"
#include "noregret/env.hpp"
#include "noregret/rng.hpp"
#include "noregret/types.hpp"

namespace noregret {

enum class OperatorKind { kSoftmax, kProjL2Ball };

struct Operator {
  OperatorKind kind = OperatorKind::kSoftmax;
  double radius = 1.0;

  static Operator softmax() { return {OperatorKind::kSoftmax, 1.0}; }
  static Operator l2_ball(double r) { return {OperatorKind::kProjL2Ball, r}; }
  static Operator for_space(const PolicySpace& space);

  Vec apply(const Vec& z) const;
  Vec vjp(const Vec& z, const Vec& g) const;
  PolicySpace space() const;
};

std::string_view to_string(OperatorKind k);
OperatorKind parse_operator_kind(std::string_view s);

// score = sum_tau (V R_tau + v_c) ((K R_tau + k_c)^T (Q 1 + q_c))
struct ModelParams {
  Mat V, K, Q;
  Vec v_c, k_c, q_c;

  static ModelParams zeros(std::size_t d);
  std::size_t d() const { return static_cast<std::size_t>(v_c.size()); }
  // 3 d^2 + 3 d
  std::size_t size() const;

  // Order: V, K, Q (column-major), then v_c, k_c, q_c.
  Vec flatten() const;
  static ModelParams unflatten(std::size_t d, const Vec& flat);

  bool all_finite() const;
  ModelParams& operator+=(const ModelParams& o);
  ModelParams& operator*=(double s);
};

// Entries i.i.d. N(0, stddev^2).
ModelParams init_params(std::size_t d, Rng& rng, double stddev = 0.1);

// Sufficient statistics of a history: count, sum of R and sum of R R^T.
struct PrefixStats {
  double n = 0.0;
  Vec S;
  Mat M;

  explicit PrefixStats(std::size_t d = 0);
  static PrefixStats of(std::span<const RewardVector> history, std::size_t d);
  void add(const RewardVector& r);
};

Vec score(const PrefixStats& stats, const ModelParams& p);
Vec score(std::span<const RewardVector> history, const ModelParams& p);
Policy forward(std::span<const RewardVector> history, const ModelParams& p, const Operator& op);

struct Reparam {
  Mat A;
  Vec b;
  Mat C;
  Vec dvec;
};

// A = V, b = K^T q, C = (k_c . q) V + v_c b^T, dvec = (k_c . q) v_c with q = Q 1 + q_c.
Reparam reparam(const ModelParams& p);
// sum_tau (A R R^T b + C R + dvec)
Vec reparam_score(std::span<const RewardVector> history, const Reparam& r);

struct Diagnostics {
  double a_b_norm = 0.0;
  double c_dev = 0.0;
  double d_dev = 0.0;
};

// mean(C) is the mean of the diagonal. d_dev is ||dvec|| for the ball and
// ||dvec - mean(dvec) 1|| for the softmax operator.
Diagnostics diagnostics(const ModelParams& p, OperatorKind op);
Diagnostics diagnostics(const Reparam& r, OperatorKind op);

enum class LossTarget { kOperatorOutput, kRawScore };

struct GradItem {
  PrefixStats stats;
  Vec target;
};

struct LossGrad {
  double loss = 0.0;
  ModelParams grad;
};

// Exact gradient of sum_i ||Op(score_i) - target_i||^2 (or of the raw score
// residual) with respect to all six blocks.
LossGrad gradient(const ModelParams& p, std::span<const GradItem> batch, const Operator& op,
                  LossTarget target = LossTarget::kOperatorOutput);

struct HistoryTarget {
  std::vector<RewardVector> history;
  Vec target;
};
LossGrad gradient(const ModelParams& p, std::span<const HistoryTarget> batch, const Operator& op,
                  LossTarget target = LossTarget::kOperatorOutput);

double loss(const ModelParams& p, std::span<const GradItem> batch, const Operator& op,
            LossTarget target = LossTarget::kOperatorOutput);

struct EquivalenceGap {
  double gap = 0.0;
  double c_prime = 0.0;
};

// Fits c' by least squares of score ~ c' S (after removing the all-ones
// direction for softmax) and returns max_h ||forward(h) - Op(c' S(h))||.
EquivalenceGap ftrl_equivalence_gap(const ModelParams& p, const Operator& op,
                                    std::span<const std::vector<RewardVector>> probes);

// `count` reward histories of `length` rounds, each from a fresh scenario.
std::vector<std::vector<RewardVector>> sample_probe_histories(ProcessKind process, std::size_t d,
                                                              int length, std::size_t count,
                                                              std::uint64_t seed);

nlohmann::json params_to_json(const ModelParams& p, const Operator& op);
ModelParams params_from_json(const nlohmann::json& j, Operator* op = nullptr);

// Wraps the model as an online learner. With sigma > 0 each policy is
// Op(score + eps), eps ~ N(0, sigma^2 I), drawn from `noise_rng`.
class ModelLearner : public Learner {
 public:
  ModelLearner(ModelParams params, Operator op, double sigma = 0.0, Rng* noise_rng = nullptr);

  std::string_view id() const override { return "transformer"; }
  Policy act(int t) override;
  void observe(int t, std::size_t action, const RewardVector& revealed) override;

  const PrefixStats& stats() const { return stats_; }

 private:
  ModelParams params_;
  Operator op_;
  double sigma_;
  Rng* noise_rng_;
  PrefixStats stats_;
};

}  // namespace noregret
