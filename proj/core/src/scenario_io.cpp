#include "noregret/scenario_io.hpp"

#include <string>

#include "noregret/error.hpp"

namespace noregret {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw ConfigError(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

template <class T>
T get_as(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Vec first = vec_from_json(j[0]);
  Mat m(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = vec_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != m.cols()) throw ConfigError("ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

json process_params_to_json(const ProcessParams& p) {
  json j = json::object();
  if (const auto* q = std::get_if<UniformParams>(&p)) {
    j["x"] = vec_to_json(q->x);
    j["y"] = vec_to_json(q->y);
  } else if (const auto* q = std::get_if<GaussianParams>(&p)) {
    j["mu"] = vec_to_json(q->mu);
  } else if (const auto* q = std::get_if<GammaParams>(&p)) {
    j["shape"] = vec_to_json(q->shape);
    j["scale"] = vec_to_json(q->scale);
  } else if (const auto* q = std::get_if<BernoulliParams>(&p)) {
    j["x"] = q->x;
    j["y"] = q->y;
    j["success_prob"] = vec_to_json(q->success_prob);
  } else if (const auto* q = std::get_if<SineTrendParams>(&p)) {
    j["freq"] = vec_to_json(q->freq);
    j["phase"] = vec_to_json(q->phase);
  } else if (const auto* q = std::get_if<AlternatingParams>(&p)) {
    j["d"] = q->d;
    j["shift"] = q->shift;
  } else if (const auto* q = std::get_if<NoisyAlternatingParams>(&p)) {
    j["d"] = q->d;
    j["shift"] = q->shift;
  } else if (const auto* q = std::get_if<AdaptiveParams>(&p)) {
    j["d"] = q->d;
  } else if (const auto* q = std::get_if<GradualVariationParams>(&p)) {
    j["mean"] = vec_to_json(q->mean);
    j["round"] = q->round;
  }
  return j;
}

ProcessParams process_params_from_json(ProcessKind kind, const json& j) {
  switch (kind) {
    case ProcessKind::kUniform:
      return UniformParams{vec_from_json(field(j, "x")), vec_from_json(field(j, "y"))};
    case ProcessKind::kGaussian:
      return GaussianParams{vec_from_json(field(j, "mu"))};
    case ProcessKind::kGamma:
      return GammaParams{vec_from_json(field(j, "shape")), vec_from_json(field(j, "scale"))};
    case ProcessKind::kBernoulli:
      return BernoulliParams{get_as<double>(j, "x"), get_as<double>(j, "y"),
                             vec_from_json(field(j, "success_prob"))};
    case ProcessKind::kSineTrend:
      return SineTrendParams{vec_from_json(field(j, "freq")), vec_from_json(field(j, "phase"))};
    case ProcessKind::kAlternating:
      return AlternatingParams{get_as<std::size_t>(j, "d"), get_as<std::size_t>(j, "shift")};
    case ProcessKind::kNoisyAlternating:
      return NoisyAlternatingParams{get_as<std::size_t>(j, "d"), get_as<std::size_t>(j, "shift")};
    case ProcessKind::kAdaptive:
      return AdaptiveParams{get_as<std::size_t>(j, "d")};
    case ProcessKind::kGradualVariation:
      return GradualVariationParams{vec_from_json(field(j, "mean")), get_as<int>(j, "round")};
  }
  throw ConfigError("unknown process kind");
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["env_kind"] = std::string(to_string(s.env_kind));
  j["d"] = s.actions.d;
  j["T"] = s.horizon;
  j["policy_space"] = {{"kind", std::string(to_string(s.policy_space.kind))},
                       {"radius", s.policy_space.radius}};
  j["process_kind"] = std::string(to_string(process_kind(s.process)));
  j["process_params"] = process_params_to_json(s.process);
  j["seed"] = s.seed;
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.env_kind = parse_env_kind(get_as<std::string>(j, "env_kind"));
  s.actions.d = get_as<std::size_t>(j, "d");
  s.horizon = get_as<int>(j, "T");
  const json& ps = field(j, "policy_space");
  s.policy_space.kind = parse_policy_space_kind(get_as<std::string>(ps, "kind"));
  if (ps.contains("radius")) s.policy_space.radius = get_as<double>(ps, "radius");
  const ProcessKind kind = parse_process_kind(get_as<std::string>(j, "process_kind"));
  s.process = process_params_from_json(kind, field(j, "process_params"));
  s.seed = get_as<std::uint64_t>(j, "seed");
  validate(s);
  return s;
}

}  // namespace noregret
