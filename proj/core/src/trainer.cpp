#include "noregret/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

#include "noregret/error.hpp"
#include "noregret/metrics.hpp"
#include "noregret/parallel.hpp"

namespace noregret {

double TrainConfig::sigma_value() const {
  if (sigma) return *sigma;
  return env_kind == EnvKind::kFOL ? 1.0 : 0.1;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("train config: field '" + field + "' " + why);
  };
  if (iterations < 0) fail("iterations", "must be nonnegative");
  if (scenarios < 1) fail("M", "must be at least 1");
  if (rollouts < 1) fail("L", "must be at least 1");
  if (top_k < 1 || top_k > rollouts) fail("k", "must satisfy 1 <= k <= L");
  if (sigma && !(*sigma >= 0.0)) fail("sigma", "must be nonnegative");
  if (batch_size < 1) fail("batch_size", "must be at least 1");
  if (epochs < 1) fail("epochs", "must be at least 1");
  if (d < 2) fail("d", "must be at least 2");
  if (horizon < 1) fail("T", "must be at least 1");
  if (processes.empty()) fail("processes", "must not be empty");
  if (!(init_std >= 0.0)) fail("init_std", "must be nonnegative");
  if (checkpoint_every < 0) fail("checkpoint_every", "must be nonnegative");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) fail("checkpoint_dir", "is required with checkpoint_every");
  if (op.kind == OperatorKind::kProjL2Ball && !(op.radius > 0.0)) fail("radius", "must be positive");
  if (env_kind != EnvKind::kFOL && op.kind != OperatorKind::kSoftmax) {
    fail("operator_kind", "must be softmax under bandit feedback");
  }
  for (ProcessKind p : processes) {
    Scenario s;
    s.env_kind = env_kind;
    s.actions.d = d;
    s.policy_space = op.space();
    s.horizon = horizon;
    Rng probe_rng = make_rng(0);
    try {
      s.process = sample_process_params(p, d, probe_rng);
      noregret::validate(s);
    } catch (const ConfigError& e) {
      fail("processes", std::string("contains an invalid process: ") + e.what());
    }
  }
  try {
    Adam probe(1, adam);
  } catch (const ConfigError& e) {
    fail("lr/beta1/beta2/eps", e.what());
  }
}

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("train config: field '") + name + "' has the wrong type");
  }
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::vector<std::string> known = {
      "iterations", "M", "L", "k", "sigma", "lr", "beta1", "beta2", "eps", "batch_size", "epochs",
      "env_kind", "d", "T", "process", "processes", "operator_kind", "radius", "fixed_pool",
      "regret", "loss_target", "init_std", "checkpoint_every", "checkpoint_dir", "log_path",
      "workers", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("train config: unknown field '" + key + "'");
    }
  }
  TrainConfig c;
  if (j.contains("iterations")) c.iterations = get_field<int>(j, "iterations");
  if (j.contains("M")) c.scenarios = get_field<std::size_t>(j, "M");
  if (j.contains("L")) c.rollouts = get_field<std::size_t>(j, "L");
  if (j.contains("k")) c.top_k = get_field<std::size_t>(j, "k");
  if (j.contains("sigma")) c.sigma = get_field<double>(j, "sigma");
  if (j.contains("lr")) c.adam.lr = get_field<double>(j, "lr");
  if (j.contains("beta1")) c.adam.beta1 = get_field<double>(j, "beta1");
  if (j.contains("beta2")) c.adam.beta2 = get_field<double>(j, "beta2");
  if (j.contains("eps")) c.adam.eps = get_field<double>(j, "eps");
  if (j.contains("batch_size")) c.batch_size = get_field<std::size_t>(j, "batch_size");
  if (j.contains("epochs")) c.epochs = get_field<int>(j, "epochs");
  if (j.contains("env_kind")) c.env_kind = parse_env_kind(get_field<std::string>(j, "env_kind"));
  if (j.contains("d")) c.d = get_field<std::size_t>(j, "d");
  if (j.contains("T")) c.horizon = get_field<int>(j, "T");
  if (j.contains("process") && j.contains("processes")) {
    throw ConfigError("train config: give either 'process' or 'processes', not both");
  }
  if (j.contains("process")) c.processes = {parse_process_kind(get_field<std::string>(j, "process"))};
  if (j.contains("processes")) {
    c.processes.clear();
    for (const auto& s : get_field<std::vector<std::string>>(j, "processes")) {
      c.processes.push_back(parse_process_kind(s));
    }
  }
  if (j.contains("operator_kind")) {
    c.op.kind = parse_operator_kind(get_field<std::string>(j, "operator_kind"));
  } else if (c.env_kind != EnvKind::kFOL) {
    c.op = Operator::softmax();
  }
  if (j.contains("radius")) c.op.radius = get_field<double>(j, "radius");
  if (j.contains("fixed_pool")) c.fixed_pool = get_field<bool>(j, "fixed_pool");
  if (j.contains("regret")) {
    const auto r = get_field<std::string>(j, "regret");
    if (r == "expected") {
      c.regret = RolloutRegret::kExpected;
    } else if (r == "realized") {
      c.regret = RolloutRegret::kRealized;
    } else {
      throw ConfigError("train config: field 'regret' must be 'expected' or 'realized'");
    }
  }
  if (j.contains("loss_target")) {
    const auto r = get_field<std::string>(j, "loss_target");
    if (r == "operator") {
      c.loss_target = LossTarget::kOperatorOutput;
    } else if (r == "raw_score") {
      c.loss_target = LossTarget::kRawScore;
    } else {
      throw ConfigError("train config: field 'loss_target' must be 'operator' or 'raw_score'");
    }
  }
  if (j.contains("init_std")) c.init_std = get_field<double>(j, "init_std");
  if (j.contains("checkpoint_every")) c.checkpoint_every = get_field<int>(j, "checkpoint_every");
  if (j.contains("checkpoint_dir")) c.checkpoint_dir = get_field<std::string>(j, "checkpoint_dir");
  if (j.contains("log_path")) c.log_path = get_field<std::string>(j, "log_path");
  if (j.contains("workers")) c.workers = get_field<std::size_t>(j, "workers");
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
  c.validate();
  return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  nlohmann::json procs = nlohmann::json::array();
  for (ProcessKind p : c.processes) procs.push_back(to_string(p));
  nlohmann::json j = {{"iterations", c.iterations},
                      {"M", c.scenarios},
                      {"L", c.rollouts},
                      {"k", c.top_k},
                      {"sigma", c.sigma_value()},
                      {"lr", c.adam.lr},
                      {"beta1", c.adam.beta1},
                      {"beta2", c.adam.beta2},
                      {"eps", c.adam.eps},
                      {"batch_size", c.batch_size},
                      {"epochs", c.epochs},
                      {"env_kind", to_string(c.env_kind)},
                      {"d", c.d},
                      {"T", c.horizon},
                      {"processes", procs},
                      {"operator_kind", to_string(c.op.kind)},
                      {"radius", c.op.radius},
                      {"fixed_pool", c.fixed_pool},
                      {"regret", c.regret == RolloutRegret::kExpected ? "expected" : "realized"},
                      {"loss_target", c.loss_target == LossTarget::kRawScore ? "raw_score" : "operator"},
                      {"init_std", c.init_std},
                      {"checkpoint_every", c.checkpoint_every},
                      {"workers", c.workers},
                      {"seed", c.seed}};
  if (!c.checkpoint_dir.empty()) j["checkpoint_dir"] = c.checkpoint_dir;
  if (!c.log_path.empty()) j["log_path"] = c.log_path;
  return j;
}

double rollout_regret(const Scenario& scenario, const Trajectory& tr, RolloutRegret mode) {
  if (scenario.env_kind == EnvKind::kFOL) {
    return fol_regret(tr.rewards, tr.policies, scenario.policy_space).final();
  }
  if (mode == RolloutRegret::kExpected) return dynamic_regret(tr.means, tr.policies).final();
  double acc = 0.0;
  for (std::size_t t = 0; t < tr.rounds(); ++t) {
    acc += tr.means[t].maxCoeff() - tr.rewards[t][static_cast<Eigen::Index>(tr.actions[t])];
  }
  return acc;
}

TrajectoryRecord rollout(const Scenario& scenario, const ModelParams& params, const Operator& op,
                         double sigma, Rng& noise_rng, Rng& action_rng, RolloutRegret mode) {
  if (scenario.policy_space.kind != op.space().kind) {
    throw ArgumentError("rollout: scenario policy space does not match the operator");
  }
  if (params.d() != scenario.d()) throw ArgumentError("rollout: model dimension does not match the scenario");
  ModelLearner learner(params, op, sigma, &noise_rng);
  TrajectoryRecord rec;
  rec.trajectory = play(scenario, learner, action_rng);
  rec.regret = rollout_regret(scenario, rec.trajectory, mode);
  return rec;
}

std::vector<std::size_t> select_topk(std::span<const double> regrets, std::size_t k) {
  if (k < 1 || k > regrets.size()) throw ArgumentError("select_topk: need 1 <= k <= L");
  std::vector<std::size_t> idx(regrets.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return regrets[a] < regrets[b]; });
  idx.resize(k);
  return idx;
}

void append_imitation_items(const Trajectory& tr, std::size_t d, std::vector<GradItem>& out) {
  PrefixStats st(d);
  for (std::size_t t = 0; t < tr.rounds(); ++t) {
    out.push_back({st, tr.policies[t]});
    st.add(tr.inputs[t]);
  }
}

double sft_update(ModelParams& params, Adam& opt, std::span<const GradItem> items,
                  std::size_t batch_size, int epochs, const Operator& op, Rng& shuffle_rng,
                  LossTarget target) {
  if (items.empty()) throw ArgumentError("sft_update: empty dataset");
  if (batch_size < 1) throw ArgumentError("sft_update: batch size must be positive");
  const std::size_t d = params.d();
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<GradItem> batch;
  batch.reserve(std::min(batch_size, items.size()));
  double epoch_loss = 0.0;
  for (int e = 0; e < epochs; ++e) {
    // Fisher-Yates with a portable distribution.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(order[i], order[pick(shuffle_rng)]);
    }
    epoch_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
      const std::size_t hi = std::min(order.size(), lo + batch_size);
      batch.clear();
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(items[order[i]]);
      LossGrad lg = gradient(params, std::span<const GradItem>(batch), op, target);
      epoch_loss += lg.loss;
      const double inv = 1.0 / static_cast<double>(batch.size());
      Vec flat = params.flatten();
      opt.step(flat, lg.grad.flatten() * inv);
      params = ModelParams::unflatten(d, flat);
    }
    epoch_loss /= static_cast<double>(items.size());
  }
  return epoch_loss;
}

nlohmann::json log_entry_to_json(const TrainLogEntry& e) {
  nlohmann::json j = {{"iteration", e.iteration},
                      {"loss", e.loss},
                      {"a_b_norm", e.diag.a_b_norm},
                      {"c_dev", e.diag.c_dev},
                      {"d_dev", e.diag.d_dev},
                      {"mean_selected_regret", e.mean_selected_regret},
                      {"mean_rollout_regret", e.mean_rollout_regret}};
  if (!e.checkpoint.empty()) j["checkpoint"] = e.checkpoint;
  return j;
}

Scenario training_scenario(const TrainConfig& c, int iteration, std::size_t index) {
  const auto it = static_cast<std::uint64_t>(c.fixed_pool ? 0 : iteration);
  const std::uint64_t seed = derive_seed(c.seed, Stream::kScenario, {it, index});
  const ProcessKind p = c.processes[index % c.processes.size()];
  return make_scenario(c.env_kind, c.d, c.horizon, c.op.space(), p, seed);
}

namespace {

struct ScenarioOutcome {
  std::vector<GradItem> items;
  double selected_regret = 0.0;
  double rollout_regret = 0.0;
};

std::string write_checkpoint(const TrainConfig& c, const ModelParams& p, int iteration) {
  std::filesystem::create_directories(c.checkpoint_dir);
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_%06d.json", iteration);
  const auto path = (std::filesystem::path(c.checkpoint_dir) / name).string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << params_to_json(p, c.op).dump(2) << '\n';
  return path;
}

}  // namespace

TrainResult train(const TrainConfig& config, const TrainCallback& on_iteration) {
  config.validate();
  TrainResult res;
  Rng init_rng = make_rng(derive_seed(config.seed, Stream::kInit));
  res.initial = init_params(config.d, init_rng, config.init_std);
  res.params = res.initial;
  res.initial_diag = diagnostics(res.initial, config.op.kind);

  std::ofstream log;
  if (!config.log_path.empty()) {
    const auto parent = std::filesystem::path(config.log_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    log.open(config.log_path, std::ios::trunc);
    if (!log) throw ConfigError("cannot open training log '" + config.log_path + "'");
  }

  Adam opt(static_cast<Eigen::Index>(res.params.size()), config.adam);
  const double sigma = config.sigma_value();
  std::vector<ScenarioOutcome> outcomes(config.scenarios);

  for (int iter = 1; iter <= config.iterations; ++iter) {
    const ModelParams snapshot = res.params;
    parallel_for(config.scenarios, config.workers, [&](std::size_t i) {
      const Scenario sc = training_scenario(config, iter, i);
      std::vector<TrajectoryRecord> recs;
      std::vector<double> regrets;
      recs.reserve(config.rollouts);
      for (std::size_t l = 0; l < config.rollouts; ++l) {
        // Rollout streams depend on the iteration too, so a fixed pool still
        // sees fresh perturbations.
        const auto it = static_cast<std::uint64_t>(iter);
        Rng noise = make_rng(derive_seed(sc.seed, Stream::kPerturbation, {it, l}));
        Rng act = make_rng(derive_seed(sc.seed, Stream::kActionSampling, {it, l}));
        recs.push_back(rollout(sc, snapshot, config.op, sigma, noise, act, config.regret));
        regrets.push_back(recs.back().regret);
      }
      ScenarioOutcome out;
      for (double r : regrets) out.rollout_regret += r;
      out.rollout_regret /= static_cast<double>(regrets.size());
      const auto chosen = select_topk(regrets, config.top_k);
      for (std::size_t l : chosen) {
        out.selected_regret += regrets[l];
        append_imitation_items(recs[l].trajectory, config.d, out.items);
      }
      out.selected_regret /= static_cast<double>(chosen.size());
      outcomes[i] = std::move(out);
    });

    std::vector<GradItem> items;
    TrainLogEntry entry;
    entry.iteration = iter;
    for (auto& o : outcomes) {
      entry.mean_selected_regret += o.selected_regret;
      entry.mean_rollout_regret += o.rollout_regret;
      std::move(o.items.begin(), o.items.end(), std::back_inserter(items));
    }
    entry.mean_selected_regret /= static_cast<double>(outcomes.size());
    entry.mean_rollout_regret /= static_cast<double>(outcomes.size());

    Rng shuffle = make_rng(derive_seed(config.seed, Stream::kShuffle, {static_cast<std::uint64_t>(iter)}));
    entry.loss = sft_update(res.params, opt, items, config.batch_size, config.epochs, config.op, shuffle,
                            config.loss_target);
    if (!res.params.all_finite()) throw std::runtime_error("training diverged: non-finite parameters");
    entry.diag = diagnostics(res.params, config.op.kind);

    const bool last = iter == config.iterations;
    if (config.checkpoint_every > 0 && (iter % config.checkpoint_every == 0 || last)) {
      entry.checkpoint = write_checkpoint(config, res.params, iter);
    }
    if (log) log << log_entry_to_json(entry).dump() << '\n';
    if (on_iteration) on_iteration(entry, res.params);
    res.log.push_back(std::move(entry));
  }
  return res;
}

}  // namespace noregret
