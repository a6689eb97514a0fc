#pragma once

// Monte-Carlo harness for spectral bipartition under the planted model
// P = P̄ + ε: within-block weight 1-ν, cross-block ν, symmetric Gaussian ε.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cforest/core.hpp"
#include "cforest/data.hpp"
#include "cforest/spectral.hpp"

namespace cforest {

struct PerturbationSpec {
  int n1 = 100;
  double gamma = 1.0;  // n2 / n1
  double nu = 0.05;
  double sigma = 1.0;
  int trials = 1000;
  std::uint64_t seed = 0;

  int n2() const { return static_cast<int>(std::lround(gamma * n1)); }
  int n() const { return n1 + n2(); }

  void validate() const {
    if (n1 < 1 || n2() < 1) throw Error(ErrorKind::invalid_spec, "both blocks need at least one point");
    if (!(gamma > 0 && gamma <= 1)) throw Error(ErrorKind::invalid_spec, "gamma must lie in (0,1]");
    if (!(nu >= 0 && nu < 1 - nu)) throw Error(ErrorKind::invalid_spec, "nu must satisfy 0 <= nu < 1/2");
    if (!(sigma >= 0)) throw Error(ErrorKind::invalid_spec, "sigma must be nonnegative");
    if (trials < 1) throw Error(ErrorKind::invalid_spec, "trials must be positive");
  }
};

inline Matrix planted_affinity(int n1, int n2, double nu) {
  const int n = n1 + n2;
  Matrix P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) = ((i < n1) == (j < n1)) ? 1 - nu : nu;
  return P;
}

/// P̄ + ε with ε_ij = ε_ji ~ N(0, σ²) independent for i >= j. No clipping.
inline Matrix sample_perturbed(const Matrix& Pbar, double sigma, Rng& rng) {
  if (sigma < 0) throw Error(ErrorKind::invalid_input, "sigma must be nonnegative");
  Matrix P = Pbar;
  if (sigma == 0) return P;
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double e = noise(rng);
      P(i, j) += e;
      if (i != j) P(j, i) += e;
    }
  return P;
}

/// Fraction of points on the wrong side, minimized over the two matchings.
inline double misclustering_rate(const LabelVector& pred, int n1, int n2) {
  if (pred.size() != n1 + n2) throw Error(ErrorKind::length_mismatch, "prediction size differs from n1+n2");
  int wrong = 0;
  for (int i = 0; i < pred.size(); ++i) wrong += (pred[i] != 0) != (i >= n1);
  const int n = n1 + n2;
  return static_cast<double>(std::min(wrong, n - wrong)) / n;
}

/// Sign split (cutoff 0) of the second eigenvector of D^{-1/2} P D^{-1/2}
/// with D from raw row sums. Empty when some degree is not positive.
inline std::optional<LabelVector> signed_bipartition(const Matrix& P) {
  const Vector d = P.rowwise().sum();
  if (!(d.minCoeff() > 0)) return std::nullopt;
  const Matrix S = normalized_operator(P);
  const auto pair = second_eigenpair(S, d);
  std::vector<int> side(static_cast<std::size_t>(P.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) side[static_cast<std::size_t>(i)] = pair.vector(i) > 0 ? 1 : 0;
  return LabelVector(std::move(side), 2);
}

/// Right-hand side of the limit: -γ² / (2σ²(1+γ)(1+γ³)).
inline double theory_log_rate(double gamma, double sigma) {
  return -(gamma * gamma) / (2 * sigma * sigma * (1 + gamma) * (1 + gamma * gamma * gamma));
}

struct RateEstimate {
  double mean_m = 0;
  double empirical = 0;  // (1/n) log(mean M); -inf when mean M is 0
  double theory = 0;
  int trials_used = 0;
  int aborted = 0;  // trials with a non-positive degree
  std::string warning;
};

/// trials × {sample P, bipartition, mis-clustering rate}; trial t uses its
/// own substream of spec.seed and the mean is reduced in trial order.
inline RateEstimate estimate_rate(const PerturbationSpec& spec, int threads = 1) {
  spec.validate();
  const Matrix Pbar = planted_affinity(spec.n1, spec.n2(), spec.nu);
  std::vector<double> rates(static_cast<std::size_t>(spec.trials), -1.0);
  parallel_for(spec.trials, threads, [&](int t) {
    Rng rng = substream(spec.seed, 20, t);
    const auto labels = signed_bipartition(sample_perturbed(Pbar, spec.sigma, rng));
    if (labels) rates[static_cast<std::size_t>(t)] = misclustering_rate(*labels, spec.n1, spec.n2());
  });
  RateEstimate out;
  double sum = 0;
  for (double r : rates) {
    if (r < 0) {
      ++out.aborted;
      continue;
    }
    sum += r;
    ++out.trials_used;
  }
  out.theory = theory_log_rate(spec.gamma, spec.sigma);
  if (out.trials_used == 0) {
    out.mean_m = std::numeric_limits<double>::quiet_NaN();
    out.empirical = std::numeric_limits<double>::quiet_NaN();
    out.warning = "every trial aborted on a non-positive degree";
    return out;
  }
  out.mean_m = sum / out.trials_used;
  if (out.mean_m == 0) {
    out.empirical = -std::numeric_limits<double>::infinity();
    out.warning = "no mis-clustered point in any trial; rate too small to resolve at this n and trial count";
  } else {
    out.empirical = std::log(out.mean_m) / spec.n();
  }
  if (out.aborted > 0 && out.warning.empty())
    out.warning = std::to_string(out.aborted) + " trial(s) aborted on a non-positive degree";
  return out;
}

struct EigenAsymptotics {
  double lambda1 = 0, lambda2 = 0;
  double lambda2_predicted = 0;  // 1 - γ⁻¹(1+γ²)ν
  double lambda2_error = 0;
  /// Scaled second-eigenvector block values, (n1γ³+n2)^{1/2}·x2, oriented
  /// so the second block is positive; predicted (-γ^{3/2}, 1).
  double block1_value = 0, block2_value = 0;
  double max_component_deviation = 0;  // from the predicted block values
  double within_block_spread = 0;      // max |x2[i] - x2[j]| inside a block
};

inline EigenAsymptotics eigen_asymptotics_check(int n1, double gamma, double nu) {
  const int n2 = static_cast<int>(std::lround(gamma * n1));
  const Matrix Pbar = planted_affinity(n1, n2, nu);
  const Matrix S = normalized_operator(Pbar);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const Eigen::Index n = S.rows();
  EigenAsymptotics r;
  r.lambda1 = eig.eigenvalues()(n - 1);
  r.lambda2 = eig.eigenvalues()(n - 2);
  r.lambda2_predicted = 1 - (1 + gamma * gamma) * nu / gamma;
  r.lambda2_error = std::abs(r.lambda2 - r.lambda2_predicted);

  Vector x2 = second_eigenpair(S, Pbar.rowwise().sum()).vector;
  if (x2.tail(n2).sum() < 0) x2 = -x2;
  const double scale = std::sqrt(n1 * gamma * gamma * gamma + n2);
  const Vector scaled = scale * x2;
  r.block1_value = scaled.head(n1).mean();
  r.block2_value = scaled.tail(n2).mean();
  const double pred1 = -std::pow(gamma, 1.5), pred2 = 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    r.max_component_deviation = std::max(r.max_component_deviation, std::abs(scaled(i) - (i < n1 ? pred1 : pred2)));
  r.within_block_spread = std::max(x2.head(n1).maxCoeff() - x2.head(n1).minCoeff(),
                                   x2.tail(n2).maxCoeff() - x2.tail(n2).minCoeff());
  return r;
}

}  // namespace cforest
