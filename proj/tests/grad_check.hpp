#pragma once

// Random gradient-check instances shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "noregret/attn_model.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Instance {
  noregret::ModelParams params;
  std::vector<noregret::HistoryTarget> batch;
  noregret::Operator op;
};

// Interior instances use a radius far above any score norm; boundary ones a
// radius far below it, so no item sits near the kink.
inline Instance make_instance(std::mt19937_64& rng, noregret::OperatorKind kind, bool interior) {
  std::uniform_int_distribution<int> dim(2, 4), len(0, 6), items(1, 3);
  std::uniform_real_distribution<double> reward(0.0, 2.0);
  const auto d = static_cast<std::size_t>(dim(rng));
  Instance in;
  in.params = noregret::init_params(d, rng, 0.5);
  in.op = kind == noregret::OperatorKind::kSoftmax ? noregret::Operator::softmax()
                                                  : noregret::Operator::l2_ball(interior ? 1e6 : 1e-3);
  const int n = items(rng);
  for (int i = 0; i < n; ++i) {
    noregret::HistoryTarget item;
    const int T = len(rng) + (kind == noregret::OperatorKind::kProjL2Ball && !interior ? 1 : 0);
    for (int t = 0; t < T; ++t) {
      noregret::Vec r(static_cast<Eigen::Index>(d));
      for (auto& x : r) x = reward(rng);
      item.history.push_back(r);
    }
    noregret::Vec target(static_cast<Eigen::Index>(d));
    for (auto& x : target) x = reward(rng) / 2.0;
    item.target = kind == noregret::OperatorKind::kSoftmax ? noregret::softmax(target) : target;
    in.batch.push_back(std::move(item));
  }
  return in;
}

struct Result {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool boundary_hit = false;  // some item had a score outside the ball
};

// Per-coordinate relative error between the analytic gradient and central
// differences with step 1e-5. Coordinates where both are below `floor` in
// magnitude are compared against the floor instead of their own size.
inline Result check(const Instance& in, noregret::LossTarget target, double floor = 1e-3) {
  const std::size_t d = in.params.d();
  const auto analytic = noregret::gradient(in.params, in.batch, in.op, target).grad.flatten();
  std::vector<noregret::GradItem> items;
  for (const auto& h : in.batch) {
    items.push_back({noregret::PrefixStats::of(h.history, d), h.target});
  }
  auto f = [&](const noregret::Vec& flat) {
    return noregret::loss(noregret::ModelParams::unflatten(d, flat), items, in.op, target);
  };
  const auto numeric = oracle::central_difference(f, in.params.flatten(), 1e-5);
  Result r;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    r.max_rel_error = std::max(r.max_rel_error, oracle::rel_error(analytic[i], numeric[i], floor));
    r.max_abs_error = std::max(r.max_abs_error, std::abs(analytic[i] - numeric[i]));
  }
  for (const auto& it : items) {
    if (noregret::score(it.stats, in.params).norm() >= in.op.radius) r.boundary_hit = true;
  }
  return r;
}

}  // namespace gradcheck
