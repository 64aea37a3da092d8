#include "noregret/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <Eigen/QR>

#include "noregret/error.hpp"
#include "noregret/parallel.hpp"
#include "noregret/scenario_io.hpp"

namespace noregret {

namespace {

void require_dims(std::size_t d, int T) {
  if (d < 1) throw ArgumentError("d must be at least 1");
  if (T < 1) throw ArgumentError("T must be at least 1");
}

double double_factorial(long n) {
  double out = 1.0;
  for (long k = n; k > 1; k -= 2) out *= static_cast<double>(k);
  return out;
}

Vec gaussian_vec(Eigen::Index d, Rng& rng) {
  boost::random::normal_distribution<double> n01;
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n01(rng);
  return v;
}

std::size_t chunk_count(std::size_t N, std::size_t chunk) { return (N + chunk - 1) / chunk; }

std::size_t chunk_size(std::size_t N, std::size_t chunk, std::size_t c) {
  return std::min(chunk, N - c * chunk);
}

}  // namespace

double expected_norm_formula(std::size_t d, int T) {
  require_dims(d, T);
  const double dd = static_cast<double>(d);
  return std::sqrt(2.0 * T) * std::exp(std::lgamma((dd + 1.0) / 2.0) - std::lgamma(dd / 2.0));
}

double expected_norm_double_factorial(std::size_t d, int T) {
  require_dims(d, T);
  const long n = static_cast<long>(d);
  const double ratio = double_factorial(n - 1) / double_factorial(n - 2);
  // Gamma((d+1)/2) / Gamma(d/2) carries sqrt(pi)/2 for even d and 1/sqrt(pi) for odd d.
  const double g = d % 2 == 0 ? ratio * std::sqrt(std::numbers::pi) / 2.0
                              : ratio / std::sqrt(std::numbers::pi);
  return std::sqrt(2.0 * T) * g;
}

McEstimate mc_expected_norm(std::size_t d, int T, std::size_t N, std::uint64_t seed,
                            std::size_t workers) {
  require_dims(d, T);
  if (N < 1) throw ArgumentError("mc_expected_norm: N must be at least 1");
  const std::size_t chunks = chunk_count(N, kMcChunk);
  std::vector<double> sum(chunks, 0.0), sumsq(chunks, 0.0);
  const auto dim = static_cast<Eigen::Index>(d);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng = make_rng(derive_seed(seed, Stream::kMonteCarlo, {c}));
    boost::random::normal_distribution<double> n01;
    Vec S(dim);
    for (std::size_t s = 0; s < chunk_size(N, kMcChunk, c); ++s) {
      S.setZero();
      for (int t = 0; t < T; ++t) {
        for (Eigen::Index i = 0; i < dim; ++i) S[i] += n01(rng);
      }
      const double x = S.norm();
      sum[c] += x;
      sumsq[c] += x * x;
    }
  });
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s1 += sum[c];
    s2 += sumsq[c];
  }
  const double n = static_cast<double>(N);
  McEstimate e;
  e.n = N;
  e.value = s1 / n;
  const double var = N > 1 ? std::max(0.0, (s2 - n * e.value * e.value) / (n - 1.0)) : 0.0;
  e.standard_error = std::sqrt(var / n);
  return e;
}

IsotropyReport mc_isotropy(std::size_t d, int T, std::size_t N, std::uint64_t seed,
                           std::size_t workers, const std::optional<Mat>& rotation) {
  require_dims(d, T);
  if (N < 1) throw ArgumentError("mc_isotropy: N must be at least 1");
  const auto dim = static_cast<Eigen::Index>(d);
  if (rotation && (rotation->rows() != dim || rotation->cols() != dim)) {
    throw ArgumentError("mc_isotropy: rotation has the wrong shape");
  }
  const std::size_t chunks = chunk_count(N, kMcChunk);
  std::vector<Mat> sum(chunks, Mat::Zero(dim, dim)), sumsq(chunks, Mat::Zero(dim, dim));
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng = make_rng(derive_seed(seed, Stream::kMonteCarlo, {c}));
    boost::random::normal_distribution<double> n01;
    Vec S(dim);
    for (std::size_t s = 0; s < chunk_size(N, kMcChunk, c); ++s) {
      S.setZero();
      for (int t = 0; t < T; ++t) {
        for (Eigen::Index i = 0; i < dim; ++i) S[i] += n01(rng);
      }
      if (rotation) S = (*rotation) * S;
      const double nrm = S.norm();
      if (nrm == 0.0) continue;
      const Mat Y = S * S.transpose() / nrm;
      sum[c] += Y;
      sumsq[c] += Y.cwiseProduct(Y);
    }
  });
  Mat s1 = Mat::Zero(dim, dim), s2 = Mat::Zero(dim, dim);
  for (std::size_t c = 0; c < chunks; ++c) {
    s1 += sum[c];
    s2 += sumsq[c];
  }
  const double n = static_cast<double>(N);
  IsotropyReport r;
  r.estimate.n = N;
  r.estimate.value = s1 / n;
  Mat var = (s2 - n * r.estimate.value.cwiseProduct(r.estimate.value)) / std::max(1.0, n - 1.0);
  r.estimate.standard_error = (var.cwiseMax(0.0) / n).cwiseSqrt();

  const Vec diag = r.estimate.value.diagonal();
  r.diagonal_mean = diag.mean();
  r.diagonal_spread = diag.maxCoeff() - diag.minCoeff();
  Mat off = r.estimate.value;
  off.diagonal().setZero();
  r.max_off_diagonal = off.cwiseAbs().maxCoeff();
  r.prediction = expected_norm_formula(d, T) / static_cast<double>(d);
  r.max_diag_rel_error = ((diag.array() - r.prediction).abs() / r.prediction).maxCoeff();
  r.off_diagonal_ok = r.max_off_diagonal < 0.01 * std::abs(r.diagonal_mean);
  r.diagonal_ok = r.max_diag_rel_error < 0.01;
  return r;
}

Mat random_orthogonal(std::size_t d, Rng& rng) {
  const auto dim = static_cast<Eigen::Index>(d);
  Mat G(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) G.col(j) = gaussian_vec(dim, rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(dim, dim);
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

OptimalCReport empirical_optimal_C(std::size_t d, int T, double radius, std::size_t N,
                                   std::uint64_t seed, std::size_t workers,
                                   const std::optional<Mat>& rotation) {
  require_dims(d, T);
  if (T < 2) throw InsufficientDataError("empirical_optimal_C: T must be at least 2");
  if (N < 10 * d * d) {
    throw InsufficientDataError("empirical_optimal_C: need N >= 10 d^2 streams, got " + std::to_string(N));
  }
  const auto dim = static_cast<Eigen::Index>(d);
  if (rotation && (rotation->rows() != dim || rotation->cols() != dim)) {
    throw ArgumentError("empirical_optimal_C: rotation has the wrong shape");
  }
  const std::size_t B = std::min(kOptimalCBatches, N);
  std::vector<Mat> YX(B, Mat::Zero(dim, dim)), XX(B, Mat::Zero(dim, dim));
  parallel_for(B, workers, [&](std::size_t b) {
    Rng rng = make_rng(derive_seed(seed, Stream::kMonteCarlo, {b}));
    const std::size_t count = N / B + (b < N % B ? 1 : 0);
    std::vector<Vec> prefix(static_cast<std::size_t>(T));
    for (std::size_t s = 0; s < count; ++s) {
      Vec S = Vec::Zero(dim);
      for (int t = 0; t < T; ++t) {
        prefix[static_cast<std::size_t>(t)] = S;  // S_{t-1} for round t+1
        Vec R = gaussian_vec(dim, rng);
        if (rotation) R = (*rotation) * R;
        S += R;
      }
      const double nrm = S.norm();
      if (nrm == 0.0) continue;
      const Vec Y = radius * S / nrm;
      for (const Vec& X : prefix) {
        YX[b].noalias() += Y * X.transpose();
        XX[b].noalias() += X * X.transpose();
      }
    }
  });

  Mat yx = Mat::Zero(dim, dim), xx = Mat::Zero(dim, dim);
  for (std::size_t b = 0; b < B; ++b) {
    yx += YX[b];
    xx += XX[b];
  }
  OptimalCReport r;
  r.n = N;
  // C XX = YX  <=>  XX^T C^T = YX^T; XX is symmetric positive definite.
  r.C = xx.ldlt().solve(yx.transpose()).transpose();
  r.scalar = r.C.trace() / static_cast<double>(d);

  Mat mean_b = Mat::Zero(dim, dim), sq_b = Mat::Zero(dim, dim);
  std::vector<double> scalars(B);
  for (std::size_t b = 0; b < B; ++b) {
    const Mat Cb = XX[b].ldlt().solve(YX[b].transpose()).transpose();
    mean_b += Cb;
    sq_b += Cb.cwiseProduct(Cb);
    scalars[b] = Cb.trace() / static_cast<double>(d);
  }
  const double nb = static_cast<double>(B);
  mean_b /= nb;
  if (B > 1) {
    const Mat var = (sq_b / nb - mean_b.cwiseProduct(mean_b)) * (nb / (nb - 1.0));
    r.C_standard_error = (var.cwiseMax(0.0) / nb).cwiseSqrt();
    double m = 0.0, q = 0.0;
    for (double s : scalars) {
      m += s;
      q += s * s;
    }
    m /= nb;
    r.scalar_standard_error = std::sqrt(std::max(0.0, (q / nb - m * m) * nb / (nb - 1.0)) / nb);
  } else {
    r.C_standard_error = Mat::Zero(dim, dim);
  }

  Mat off = r.C;
  off.diagonal().setZero();
  const double total = r.C.norm();
  r.off_diagonal_fraction = total > 0.0 ? off.norm() / total : 0.0;

  const double dd = static_cast<double>(d);
  const double e_norm = expected_norm_formula(d, T);
  r.prediction_penultimate = radius / (static_cast<double>(T) * dd) * (e_norm / dd);
  r.prediction_final = std::sqrt(2.0) * radius *
                       std::exp(std::lgamma((dd + 1.0) / 2.0) - std::lgamma(dd / 2.0)) /
                       (std::sqrt(static_cast<double>(T)) * dd);
  r.rel_error_penultimate = std::abs(r.scalar - r.prediction_penultimate) / r.prediction_penultimate;
  r.rel_error_final = std::abs(r.scalar - r.prediction_final) / r.prediction_final;
  r.identity_proportional = r.off_diagonal_fraction < 0.02;
  r.matches_penultimate = r.rel_error_penultimate < 0.02;
  r.matches_final = r.rel_error_final < 0.02;
  return r;
}

DeltaReport delta_condition_check(const Mat& A, const Vec& beta, const Mat& C, int T, std::size_t N,
                                  std::uint64_t seed) {
  const auto dim = beta.size();
  require_dims(static_cast<std::size_t>(dim), T);
  if (A.rows() != dim || A.cols() != dim || C.rows() != dim || C.cols() != dim) {
    throw ArgumentError("delta_condition_check: shape mismatch");
  }
  if (T < 2) throw InsufficientDataError("delta_condition_check: T must be at least 2");
  if (N < 1) throw ArgumentError("delta_condition_check: N must be at least 1");

  // loss(delta) = q0 + 2 delta . q1 + q2 ||delta||^2 with Z_t = X_t - pi*.
  const std::size_t chunks = chunk_count(N, kMcChunk);
  std::vector<double> q0(chunks, 0.0);
  std::vector<Vec> q1(chunks, Vec::Zero(dim));
  parallel_for(chunks, 1, [&](std::size_t c) {
    Rng rng = make_rng(derive_seed(seed, Stream::kMonteCarlo, {c}));
    std::vector<Vec> X(static_cast<std::size_t>(T));
    for (std::size_t s = 0; s < chunk_size(N, kMcChunk, c); ++s) {
      Vec acc = Vec::Zero(dim);
      Vec S = Vec::Zero(dim);
      for (int t = 0; t < T; ++t) {
        X[static_cast<std::size_t>(t)] = acc;
        const Vec R = gaussian_vec(dim, rng);
        acc += A * (R * R.dot(beta)) + C * R;
        S += R;
      }
      const double nrm = S.norm();
      const Vec target = nrm > 0.0 ? Vec(S / nrm) : Vec(Vec::Zero(dim));
      for (int t = 0; t < T; ++t) {
        const Vec Z = X[static_cast<std::size_t>(t)] - target;
        q0[c] += Z.squaredNorm();
        q1[c] += static_cast<double>(t) * Z;
      }
    }
  });
  double Q0 = 0.0;
  Vec Q1 = Vec::Zero(dim);
  for (std::size_t c = 0; c < chunks; ++c) {
    Q0 += q0[c];
    Q1 += q1[c];
  }
  const double n = static_cast<double>(N);
  Q0 /= n;
  Q1 /= n;
  double Q2 = 0.0;
  for (int t = 0; t < T; ++t) Q2 += static_cast<double>(t) * t;
  auto loss_at = [&](const Vec& delta) { return Q0 + 2.0 * delta.dot(Q1) + Q2 * delta.squaredNorm(); };

  DeltaReport r;
  r.A = A;
  r.beta = beta;
  r.C = C;
  r.n = N;
  r.fitted_delta = -Q1 / Q2;
  r.predicted_delta = -A * beta;
  const double pn = r.predicted_delta.norm();
  const double err = (r.fitted_delta - r.predicted_delta).norm();
  // Relative error against -A beta; absolute when A beta vanishes.
  r.rel_error = pn > 0.0 ? err / pn : err;
  r.matches_minus_a_beta = r.rel_error < 0.02;
  r.loss_at_fit = loss_at(r.fitted_delta);
  r.loss_at_minus_a_beta = loss_at(r.predicted_delta);
  r.loss_at_plus_a_beta = loss_at(-r.predicted_delta);
  return r;
}

DeltaReport delta_condition_check(std::size_t d, int T, std::size_t N, std::uint64_t seed, bool zero_a) {
  require_dims(d, T);
  const auto dim = static_cast<Eigen::Index>(d);
  Rng rng = make_rng(derive_seed(seed, Stream::kProbe));
  Mat A(dim, dim), C(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) A.col(j) = gaussian_vec(dim, rng);
  const Vec beta = gaussian_vec(dim, rng);
  for (Eigen::Index j = 0; j < dim; ++j) C.col(j) = gaussian_vec(dim, rng);
  if (zero_a) A.setZero();
  return delta_condition_check(A, beta, C, T, N, seed);
}

DirectionsResult independent_directions(std::size_t d, const Vec& V1, Rng& rng, int max_attempts) {
  const auto dim = static_cast<Eigen::Index>(d);
  if (d < 1 || V1.size() != dim) throw ArgumentError("independent_directions: V1 must have length d");
  if (V1.norm() == 0.0) throw ArgumentError("independent_directions: V1 must be nonzero");
  boost::random::uniform_real_distribution<double> u01(0.0, 1.0);
  DirectionsResult out;
  out.vectors.resize(dim, dim);
  out.rewards.resize(dim, dim);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      Vec g = gaussian_vec(dim, rng);
      while (g.norm() == 0.0) g = gaussian_vec(dim, rng);
      // Uniform in the unit ball: uniform direction, radius U^(1/d).
      const Vec R = g / g.norm() * std::pow(u01(rng), 1.0 / static_cast<double>(d));
      out.rewards.row(i) = R.transpose();
      out.vectors.row(i) = (V1.dot(R) * R - V1).transpose();
    }
    out.determinant = out.vectors.determinant();
    out.attempts = attempt;
    if (std::abs(out.determinant) > kIndependenceThreshold) return out;
  }
  throw SearchFailure("independent_directions: no independent set within " +
                      std::to_string(max_attempts) + " attempts");
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"value", e.value}, {"standard_error", e.standard_error}, {"n", e.n}};
}

nlohmann::json to_json(const IsotropyReport& r) {
  return {{"estimate", mat_to_json(r.estimate.value)},
          {"standard_error", mat_to_json(r.estimate.standard_error)},
          {"n", r.estimate.n},
          {"max_off_diagonal", r.max_off_diagonal},
          {"diagonal_mean", r.diagonal_mean},
          {"diagonal_spread", r.diagonal_spread},
          {"prediction", r.prediction},
          {"max_diag_rel_error", r.max_diag_rel_error},
          {"off_diagonal_ok", r.off_diagonal_ok},
          {"diagonal_ok", r.diagonal_ok}};
}

nlohmann::json to_json(const OptimalCReport& r) {
  return {{"C", mat_to_json(r.C)},
          {"C_standard_error", mat_to_json(r.C_standard_error)},
          {"scalar", r.scalar},
          {"scalar_standard_error", r.scalar_standard_error},
          {"off_diagonal_fraction", r.off_diagonal_fraction},
          {"prediction_penultimate", r.prediction_penultimate},
          {"prediction_final", r.prediction_final},
          {"rel_error_penultimate", r.rel_error_penultimate},
          {"rel_error_final", r.rel_error_final},
          {"identity_proportional", r.identity_proportional},
          {"matches_penultimate", r.matches_penultimate},
          {"matches_final", r.matches_final},
          {"n", r.n}};
}

nlohmann::json to_json(const DeltaReport& r) {
  return {{"A", mat_to_json(r.A)},
          {"beta", vec_to_json(r.beta)},
          {"C", mat_to_json(r.C)},
          {"fitted_delta", vec_to_json(r.fitted_delta)},
          {"predicted_delta", vec_to_json(r.predicted_delta)},
          {"rel_error", r.rel_error},
          {"loss_at_fit", r.loss_at_fit},
          {"loss_at_minus_a_beta", r.loss_at_minus_a_beta},
          {"loss_at_plus_a_beta", r.loss_at_plus_a_beta},
          {"matches_minus_a_beta", r.matches_minus_a_beta},
          {"n", r.n}};
}

}  // namespace noregret
