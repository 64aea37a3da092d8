#include "noregret/policy_ops.hpp"

#include <cmath>

#include "noregret/error.hpp"

namespace noregret {

std::size_t argmax_lowest(const Vec& v) {
  if (v.size() == 0) throw ArgumentError("argmax of an empty vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

Vec softmax(const Vec& z) {
  const double m = z.maxCoeff();
  Vec e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

Vec project_l2_ball(const Vec& z, double radius) {
  const double n = z.norm();
  if (n <= radius) return z;
  return z * (radius / n);
}

Vec softmax_vjp(const Vec& z, const Vec& g) {
  const Vec p = softmax(z);
  // J = diag(p) - p p^T is symmetric.
  return p.cwiseProduct(g) - p * p.dot(g);
}

Vec project_l2_ball_vjp(const Vec& z, double radius, const Vec& g) {
  const double n = z.norm();
  if (n < radius) return g;
  const Vec u = z / n;
  // J = (r/||z||) (I - u u^T), symmetric.
  return (radius / n) * (g - u * u.dot(g));
}

bool is_simplex_point(const Vec& p, double tol) {
  if (p.size() == 0 || !p.allFinite()) return false;
  if ((p.array() < -tol).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

bool is_in_ball(const Vec& p, double radius, double tol) {
  return p.allFinite() && p.norm() <= radius + tol;
}

bool is_valid_policy(const Vec& p, const PolicySpace& space, double tol) {
  return space.kind == PolicySpaceKind::kSimplex ? is_simplex_point(p, tol)
                                                 : is_in_ball(p, space.radius, tol);
}

Vec uniform_policy(std::size_t d) {
  return Vec::Constant(static_cast<Eigen::Index>(d), 1.0 / static_cast<double>(d));
}

Vec vertex(std::size_t d, std::size_t i) {
  Vec e = Vec::Zero(static_cast<Eigen::Index>(d));
  e[static_cast<Eigen::Index>(i)] = 1.0;
  return e;
}

}  // namespace noregret
