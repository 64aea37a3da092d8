#include "noregret/attn_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "noregret/error.hpp"
#include "noregret/scenario_io.hpp"

namespace noregret {

Operator Operator::for_space(const PolicySpace& space) {
  return space.kind == PolicySpaceKind::kSimplex ? softmax() : l2_ball(space.radius);
}

Vec Operator::apply(const Vec& z) const {
  return kind == OperatorKind::kSoftmax ? noregret::softmax(z) : project_l2_ball(z, radius);
}

Vec Operator::vjp(const Vec& z, const Vec& g) const {
  return kind == OperatorKind::kSoftmax ? softmax_vjp(z, g) : project_l2_ball_vjp(z, radius, g);
}

PolicySpace Operator::space() const {
  return kind == OperatorKind::kSoftmax ? PolicySpace::simplex() : PolicySpace::l2_ball(radius);
}

std::string_view to_string(OperatorKind k) {
  return k == OperatorKind::kSoftmax ? "softmax" : "proj_l2_ball";
}

OperatorKind parse_operator_kind(std::string_view s) {
  if (s == "softmax") return OperatorKind::kSoftmax;
  if (s == "proj_l2_ball" || s == "l2_ball") return OperatorKind::kProjL2Ball;
  throw ConfigError("unknown operator_kind '" + std::string(s) + "'");
}

ModelParams ModelParams::zeros(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return {Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
}

std::size_t ModelParams::size() const { return 3 * d() * d() + 3 * d(); }

Vec ModelParams::flatten() const {
  const Eigen::Index d2 = V.size();
  const Eigen::Index d1 = v_c.size();
  Vec out(3 * d2 + 3 * d1);
  out.segment(0, d2) = V.reshaped();
  out.segment(d2, d2) = K.reshaped();
  out.segment(2 * d2, d2) = Q.reshaped();
  out.segment(3 * d2, d1) = v_c;
  out.segment(3 * d2 + d1, d1) = k_c;
  out.segment(3 * d2 + 2 * d1, d1) = q_c;
  return out;
}

ModelParams ModelParams::unflatten(std::size_t d, const Vec& flat) {
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::Index d2 = n * n;
  if (flat.size() != 3 * d2 + 3 * n) throw ArgumentError("unflatten: wrong parameter count");
  ModelParams p;
  p.V = flat.segment(0, d2).reshaped(n, n);
  p.K = flat.segment(d2, d2).reshaped(n, n);
  p.Q = flat.segment(2 * d2, d2).reshaped(n, n);
  p.v_c = flat.segment(3 * d2, n);
  p.k_c = flat.segment(3 * d2 + n, n);
  p.q_c = flat.segment(3 * d2 + 2 * n, n);
  return p;
}

bool ModelParams::all_finite() const {
  return V.allFinite() && K.allFinite() && Q.allFinite() && v_c.allFinite() && k_c.allFinite() &&
         q_c.allFinite();
}

ModelParams& ModelParams::operator+=(const ModelParams& o) {
  V += o.V;
  K += o.K;
  Q += o.Q;
  v_c += o.v_c;
  k_c += o.k_c;
  q_c += o.q_c;
  return *this;
}

ModelParams& ModelParams::operator*=(double s) {
  V *= s;
  K *= s;
  Q *= s;
  v_c *= s;
  k_c *= s;
  q_c *= s;
  return *this;
}

ModelParams init_params(std::size_t d, Rng& rng, double stddev) {
  if (d == 0) throw ArgumentError("init_params: d must be positive");
  boost::random::normal_distribution<double> n01(0.0, stddev);
  ModelParams p = ModelParams::zeros(d);
  Vec flat = p.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = n01(rng);
  return ModelParams::unflatten(d, flat);
}

PrefixStats::PrefixStats(std::size_t d)
    : S(Vec::Zero(static_cast<Eigen::Index>(d))),
      M(Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))) {}

PrefixStats PrefixStats::of(std::span<const RewardVector> history, std::size_t d) {
  PrefixStats s(d);
  for (const auto& r : history) s.add(r);
  return s;
}

void PrefixStats::add(const RewardVector& r) {
  if (r.size() != S.size()) throw ArgumentError("history entry has the wrong dimension");
  n += 1.0;
  S += r;
  M.noalias() += r * r.transpose();
}

namespace {

void check_params(const ModelParams& p, Eigen::Index d) {
  if (p.v_c.size() != d || p.V.rows() != d || p.V.cols() != d) {
    throw ArgumentError("model dimension does not match the history");
  }
}

struct Intermediates {
  Vec q;      // Q 1 + q_c
  Vec b;      // K^T q
  double kappa;  // k_c . q
  Vec W;      // M b + kappa S
  double sigma;  // S . b + kappa n
};

Intermediates intermediates(const PrefixStats& st, const ModelParams& p) {
  Intermediates it;
  it.q = p.Q.rowwise().sum() + p.q_c;
  it.b = p.K.transpose() * it.q;
  it.kappa = p.k_c.dot(it.q);
  it.W = st.M * it.b + it.kappa * st.S;
  it.sigma = st.S.dot(it.b) + it.kappa * st.n;
  return it;
}

}  // namespace

Vec score(const PrefixStats& stats, const ModelParams& p) {
  check_params(p, stats.S.size());
  const Intermediates it = intermediates(stats, p);
  return p.V * it.W + p.v_c * it.sigma;
}

Vec score(std::span<const RewardVector> history, const ModelParams& p) {
  return score(PrefixStats::of(history, p.d()), p);
}

Policy forward(std::span<const RewardVector> history, const ModelParams& p, const Operator& op) {
  return op.apply(score(history, p));
}

Reparam reparam(const ModelParams& p) {
  const Vec q = p.Q.rowwise().sum() + p.q_c;
  const double kappa = p.k_c.dot(q);
  Reparam r;
  r.A = p.V;
  r.b = p.K.transpose() * q;
  r.C = kappa * p.V + p.v_c * r.b.transpose();
  r.dvec = kappa * p.v_c;
  return r;
}

Vec reparam_score(std::span<const RewardVector> history, const Reparam& r) {
  Vec s = Vec::Zero(r.b.size());
  for (const auto& R : history) {
    if (R.size() != s.size()) throw ArgumentError("history entry has the wrong dimension");
    s += r.A * (R * R.dot(r.b)) + r.C * R + r.dvec;
  }
  return s;
}

Diagnostics diagnostics(const Reparam& r, OperatorKind op) {
  const auto d = r.b.size();
  Diagnostics out;
  out.a_b_norm = r.A.norm() * r.b.norm();
  const double c_mean = d > 0 ? r.C.trace() / static_cast<double>(d) : 0.0;
  out.c_dev = (r.C - c_mean * Mat::Identity(d, d)).norm();
  if (op == OperatorKind::kProjL2Ball) {
    out.d_dev = r.dvec.norm();
  } else {
    out.d_dev = (r.dvec.array() - r.dvec.mean()).matrix().norm();
  }
  return out;
}

Diagnostics diagnostics(const ModelParams& p, OperatorKind op) { return diagnostics(reparam(p), op); }

LossGrad gradient(const ModelParams& p, std::span<const GradItem> batch, const Operator& op,
                  LossTarget target) {
  const auto d = static_cast<Eigen::Index>(p.d());
  LossGrad out;
  out.grad = ModelParams::zeros(p.d());
  // Parameter-only quantities are shared across the batch.
  const Vec q = p.Q.rowwise().sum() + p.q_c;
  const Vec b = p.K.transpose() * q;
  const double kappa = p.k_c.dot(q);

  Vec db_total = Vec::Zero(d);
  double dkappa_total = 0.0;
  for (const auto& item : batch) {
    if (item.stats.S.size() != d || item.target.size() != d) {
      throw ArgumentError("gradient: batch item has the wrong dimension");
    }
    const Vec W = item.stats.M * b + kappa * item.stats.S;
    const double sigma = item.stats.S.dot(b) + kappa * item.stats.n;
    const Vec z = p.V * W + p.v_c * sigma;

    Vec g;
    if (target == LossTarget::kRawScore) {
      const Vec res = z - item.target;
      out.loss += res.squaredNorm();
      g = 2.0 * res;
    } else {
      const Vec res = op.apply(z) - item.target;
      out.loss += res.squaredNorm();
      g = op.vjp(z, 2.0 * res);
    }

    out.grad.V.noalias() += g * W.transpose();
    out.grad.v_c += sigma * g;
    const Vec dW = p.V.transpose() * g;
    const double dsigma = g.dot(p.v_c);
    db_total.noalias() += item.stats.M * dW + dsigma * item.stats.S;
    dkappa_total += dW.dot(item.stats.S) + dsigma * item.stats.n;
  }

  out.grad.K = q * db_total.transpose();
  out.grad.k_c = dkappa_total * q;
  const Vec dq = p.K * db_total + dkappa_total * p.k_c;
  out.grad.Q = dq * Vec::Ones(d).transpose();
  out.grad.q_c = dq;
  return out;
}

LossGrad gradient(const ModelParams& p, std::span<const HistoryTarget> batch, const Operator& op,
                  LossTarget target) {
  std::vector<GradItem> items;
  items.reserve(batch.size());
  for (const auto& ht : batch) items.push_back({PrefixStats::of(ht.history, p.d()), ht.target});
  return gradient(p, std::span<const GradItem>(items), op, target);
}

double loss(const ModelParams& p, std::span<const GradItem> batch, const Operator& op,
            LossTarget target) {
  double total = 0.0;
  for (const auto& item : batch) {
    const Vec z = score(item.stats, p);
    const Vec out = target == LossTarget::kRawScore ? z : op.apply(z);
    total += (out - item.target).squaredNorm();
  }
  return total;
}

EquivalenceGap ftrl_equivalence_gap(const ModelParams& p, const Operator& op,
                                    std::span<const std::vector<RewardVector>> probes) {
  if (probes.empty()) throw ArgumentError("ftrl_equivalence_gap: empty probe set");
  const bool center = op.kind == OperatorKind::kSoftmax;
  std::vector<Vec> scores, sums;
  scores.reserve(probes.size());
  sums.reserve(probes.size());
  double num = 0.0, den = 0.0;
  for (const auto& h : probes) {
    const PrefixStats st = PrefixStats::of(h, p.d());
    Vec z = score(st, p);
    Vec s = st.S;
    Vec zc = z, sc = s;
    if (center) {
      zc.array() -= zc.mean();
      sc.array() -= sc.mean();
    }
    num += zc.dot(sc);
    den += sc.squaredNorm();
    scores.push_back(std::move(z));
    sums.push_back(std::move(s));
  }
  EquivalenceGap out;
  out.c_prime = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.gap = std::max(out.gap, (op.apply(scores[i]) - op.apply(out.c_prime * sums[i])).norm());
  }
  return out;
}

std::vector<std::vector<RewardVector>> sample_probe_histories(ProcessKind process, std::size_t d,
                                                              int length, std::size_t count,
                                                              std::uint64_t seed) {
  if (length < 0) throw ArgumentError("sample_probe_histories: negative length");
  if (process == ProcessKind::kAdaptive) {
    throw UnsupportedError("probe histories need a policy-independent process");
  }
  std::vector<std::vector<RewardVector>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Scenario sc = make_scenario(EnvKind::kFOL, d, std::max(length, 1), PolicySpace::simplex(),
                                      process, derive_seed(seed, Stream::kProbe, {i}));
    RewardStream stream(sc);
    out[i].reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) out[i].push_back(stream.next());
  }
  return out;
}

nlohmann::json params_to_json(const ModelParams& p, const Operator& op) {
  return {{"d", p.d()},
          {"operator_kind", to_string(op.kind)},
          {"radius", op.radius},
          {"V", mat_to_json(p.V)},
          {"K", mat_to_json(p.K)},
          {"Q", mat_to_json(p.Q)},
          {"v_c", vec_to_json(p.v_c)},
          {"k_c", vec_to_json(p.k_c)},
          {"q_c", vec_to_json(p.q_c)}};
}

ModelParams params_from_json(const nlohmann::json& j, Operator* op) {
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) throw ConfigError(std::string("checkpoint: missing field '") + name + "'");
    return j.at(name);
  };
  const auto& dj = field("d");
  if (!dj.is_number_unsigned() || dj.get<std::size_t>() == 0) {
    throw ConfigError("checkpoint: field 'd' must be a positive integer");
  }
  const auto d = static_cast<Eigen::Index>(dj.get<std::size_t>());
  ModelParams p;
  p.V = mat_from_json(field("V"));
  p.K = mat_from_json(field("K"));
  p.Q = mat_from_json(field("Q"));
  p.v_c = vec_from_json(field("v_c"));
  p.k_c = vec_from_json(field("k_c"));
  p.q_c = vec_from_json(field("q_c"));
  for (const Mat* m : {&p.V, &p.K, &p.Q}) {
    if (m->rows() != d || m->cols() != d) throw ConfigError("checkpoint: matrix shape does not match 'd'");
  }
  for (const Vec* v : {&p.v_c, &p.k_c, &p.q_c}) {
    if (v->size() != d) throw ConfigError("checkpoint: vector length does not match 'd'");
  }
  if (!p.all_finite()) throw ConfigError("checkpoint: non-finite parameter");
  if (op != nullptr) {
    const auto& ok = field("operator_kind");
    if (!ok.is_string()) throw ConfigError("checkpoint: field 'operator_kind' must be a string");
    op->kind = parse_operator_kind(ok.get<std::string>());
    op->radius = j.value("radius", 1.0);
  }
  return p;
}

ModelLearner::ModelLearner(ModelParams params, Operator op, double sigma, Rng* noise_rng)
    : params_(std::move(params)), op_(op), sigma_(sigma), noise_rng_(noise_rng), stats_(params_.d()) {
  if (sigma_ < 0.0) throw ConfigError("perturbation sigma must be nonnegative");
  if (sigma_ > 0.0 && noise_rng_ == nullptr) throw ArgumentError("ModelLearner: sigma > 0 needs an rng");
}

Policy ModelLearner::act(int) {
  Vec z = score(stats_, params_);
  if (sigma_ > 0.0) {
    boost::random::normal_distribution<double> eps(0.0, sigma_);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += eps(*noise_rng_);
  }
  return op_.apply(z);
}

void ModelLearner::observe(int, std::size_t, const RewardVector& revealed) { stats_.add(revealed); }

}  // namespace noregret
