#pragma once

#include <cstddef>

#include "noregret/types.hpp"

namespace noregret {

enum class PolicySpaceKind { kSimplex, kL2Ball };

struct PolicySpace {
  PolicySpaceKind kind = PolicySpaceKind::kSimplex;
  double radius = 1.0;  // only meaningful for kL2Ball

  static PolicySpace simplex() { return {PolicySpaceKind::kSimplex, 1.0}; }
  static PolicySpace l2_ball(double r) { return {PolicySpaceKind::kL2Ball, r}; }
};

inline constexpr double kPolicyTolerance = 1e-9;

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(const Vec& v);

// Max-subtracted softmax.
Vec softmax(const Vec& z);

// Radial projection onto the closed l2-ball of the given radius.
Vec project_l2_ball(const Vec& z, double radius);

// Vector-Jacobian products: returns J(z)^T g for the respective map.
Vec softmax_vjp(const Vec& z, const Vec& g);
// At ||z|| == radius the boundary branch is used.
Vec project_l2_ball_vjp(const Vec& z, double radius, const Vec& g);

bool is_simplex_point(const Vec& p, double tol = kPolicyTolerance);
bool is_in_ball(const Vec& p, double radius, double tol = kPolicyTolerance);
bool is_valid_policy(const Vec& p, const PolicySpace& space,
                     double tol = kPolicyTolerance);

Vec uniform_policy(std::size_t d);
Vec vertex(std::size_t d, std::size_t i);

}  // namespace noregret
