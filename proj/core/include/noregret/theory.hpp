#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "noregret/rng.hpp"
#include "noregret/types.hpp"

namespace noregret {

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

struct McMatrixEstimate {
  Mat value;
  Mat standard_error;
  std::size_t n = 0;
};

// Monte-Carlo sampling is split into fixed-size chunks, each with its own
// sub-seed, and reduced in chunk order; results do not depend on `workers`.
inline constexpr std::size_t kMcChunk = 1U << 14;

// E||S_T|| for S_T ~ N(0, T I_d): sqrt(2T) Gamma((d+1)/2) / Gamma(d/2).
double expected_norm_formula(std::size_t d, int T);
// Same quantity through double factorials, no Gamma function.
double expected_norm_double_factorial(std::size_t d, int T);

// Mean of ||sum_{i<=T} R_i|| over N streams of i.i.d. N(0, I_d) rewards.
McEstimate mc_expected_norm(std::size_t d, int T, std::size_t N, std::uint64_t seed,
                            std::size_t workers = 1);

struct IsotropyReport {
  McMatrixEstimate estimate;  // E[S S^T / ||S||]
  double max_off_diagonal = 0.0;
  double diagonal_mean = 0.0;
  double diagonal_spread = 0.0;  // max - min of the diagonal
  double prediction = 0.0;       // E||S_T|| / d
  double max_diag_rel_error = 0.0;
  bool off_diagonal_ok = false;  // max |off-diagonal| < 1% of the diagonal mean
  bool diagonal_ok = false;      // every diagonal entry within 1% of the prediction
};

// `rotation`, when given, is applied to every sampled S before accumulation.
IsotropyReport mc_isotropy(std::size_t d, int T, std::size_t N, std::uint64_t seed,
                           std::size_t workers = 1, const std::optional<Mat>& rotation = {});

// Orthonormalized Gaussian matrix with a sign-fixed QR factor.
Mat random_orthogonal(std::size_t d, Rng& rng);

struct OptimalCReport {
  Mat C;
  Mat C_standard_error;  // batch-means standard error per entry
  double scalar = 0.0;   // tr(C) / d
  double scalar_standard_error = 0.0;
  double off_diagonal_fraction = 0.0;  // ||offdiag(C)||_F / ||C||_F
  double prediction_penultimate = 0.0;  // (R / (T d)) (E||S_T|| / d)
  double prediction_final = 0.0;        // sqrt(2) R Gamma((d+1)/2) / (sqrt(T) d Gamma(d/2))
  double rel_error_penultimate = 0.0;
  double rel_error_final = 0.0;
  bool identity_proportional = false;  // off-diagonal fraction < 2%
  bool matches_penultimate = false;    // within 2%
  bool matches_final = false;          // within 2%
  std::size_t n = 0;
};

inline constexpr std::size_t kOptimalCBatches = 20;

// Least-squares C minimizing sum_t ||C S_{t-1} - R S_T / ||S_T|| ||^2 over N
// Gaussian streams, from the normal equations.
OptimalCReport empirical_optimal_C(std::size_t d, int T, double radius, std::size_t N,
                                   std::uint64_t seed, std::size_t workers = 1,
                                   const std::optional<Mat>& rotation = {});

struct DeltaReport {
  Mat A;
  Vec beta;
  Mat C;
  Vec fitted_delta;
  Vec predicted_delta;  // -A beta
  double rel_error = 0.0;
  double loss_at_fit = 0.0;
  double loss_at_minus_a_beta = 0.0;
  double loss_at_plus_a_beta = 0.0;
  bool matches_minus_a_beta = false;  // within 2%
  std::size_t n = 0;
};

// Draws A, beta, C ~ N(0, 1) entries from `seed` (A = 0 when zero_a) and
// fits the best delta for the loss sum_t ||sum_{i<t}(A R R^T beta + C R + delta)
// - R S_T / ||S_T|| ||^2 with R = 1.
DeltaReport delta_condition_check(std::size_t d, int T, std::size_t N, std::uint64_t seed,
                                  bool zero_a = false);
// Same with caller-chosen A, beta, C.
DeltaReport delta_condition_check(const Mat& A, const Vec& beta, const Mat& C, int T, std::size_t N,
                                  std::uint64_t seed);

struct DirectionsResult {
  Mat vectors;  // row i is V1^T (R_i R_i^T - I)
  Mat rewards;  // row i is R_i
  double determinant = 0.0;
  int attempts = 0;
};

inline constexpr double kIndependenceThreshold = 1e-8;

// Samples d points of the unit ball until the rows V1^T (R R^T - I) have
// |det| > 1e-8. Throws SearchFailure after max_attempts sets.
DirectionsResult independent_directions(std::size_t d, const Vec& V1, Rng& rng,
                                        int max_attempts = 100);

nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const IsotropyReport& r);
nlohmann::json to_json(const OptimalCReport& r);
nlohmann::json to_json(const DeltaReport& r);

}  // namespace noregret
