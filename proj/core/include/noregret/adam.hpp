#pragma once

#include <cstdint>

#include "noregret/types.hpp"

namespace noregret {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a flat parameter vector.
class Adam {
 public:
  Adam(Eigen::Index size, AdamConfig cfg = {});

  // Updates `params` in place from `grad`.
  void step(Vec& params, const Vec& grad);

  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void reset();

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace noregret
