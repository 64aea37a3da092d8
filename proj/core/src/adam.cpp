#include "noregret/adam.hpp"

#include <cmath>

#include "noregret/error.hpp"

namespace noregret {

Adam::Adam(Eigen::Index size, AdamConfig cfg)
    : cfg_(cfg), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {
  if (!(cfg_.lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0) {
    throw ConfigError("adam: moment decay must lie in [0, 1)");
  }
  if (!(cfg_.eps > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

void Adam::step(Vec& params, const Vec& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ArgumentError("adam: size mismatch");
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

void Adam::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

}  // namespace noregret
