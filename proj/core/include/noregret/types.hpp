#pragma once

#include <Eigen/Dense>

namespace noregret {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Per-action reward vector for one round.
using RewardVector = Vec;
// A point on the simplex or inside an l2-ball.
using Policy = Vec;

}  // namespace noregret
