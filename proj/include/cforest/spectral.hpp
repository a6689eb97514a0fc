#pragma once

// Symmetrically normalized spectral clustering: S = D^{-1/2} W D^{-1/2},
// sign split of the leading non-trivial eigenvector, recursive k-way Ncut.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"

namespace cforest {

/// Symmetric nonnegative weights with strictly positive degrees.
class AffinityGraph {
 public:
  explicit AffinityGraph(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() != weights_.cols()) throw Error(ErrorKind::invalid_input, "affinity must be square");
    if (weights_.rows() < 1) throw Error(ErrorKind::invalid_input, "empty affinity");
    if (!weights_.allFinite()) throw Error(ErrorKind::invalid_input, "affinity has non-finite entries");
    if (weights_.minCoeff() < 0) throw Error(ErrorKind::invalid_input, "affinity has negative weights");
    const double scale = std::max(1.0, weights_.cwiseAbs().maxCoeff());
    if ((weights_ - weights_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw Error(ErrorKind::invalid_input, "affinity is not symmetric");
    degrees_ = weights_.rowwise().sum();
    for (Eigen::Index i = 0; i < degrees_.size(); ++i)
      if (!(degrees_(i) > 0)) throw Error(ErrorKind::isolated_vertex, "vertex " + std::to_string(i) + " has zero degree");
  }

  int size() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  const Vector& degrees() const { return degrees_; }

 private:
  Matrix weights_;
  Vector degrees_;
};

/// D^{-1/2} W D^{-1/2}. Degrees are row sums and must be positive.
inline Matrix normalized_operator(const Matrix& weights) {
  const Vector d = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d(i) > 0)) throw Error(ErrorKind::isolated_vertex, "vertex " + std::to_string(i) + " has non-positive degree");
  const Vector inv_sqrt = d.array().rsqrt();
  return inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal();
}

inline Matrix normalized_operator(const AffinityGraph& g) { return normalized_operator(g.weights()); }

struct Eigenpair {
  double value = 0;
  Vector vector;
};

namespace detail {
inline constexpr Eigen::Index kDenseEigenLimit = 300;
}

/// Largest eigenpair of a symmetric matrix. Small inputs use a full dense
/// decomposition; larger ones use Lanczos with full reorthogonalization and
/// explicit restarts from the current Ritz vector, stopping once
/// ‖Av − λv‖ ≤ tol·‖A‖∞. The start vector is fixed, so results are
/// reproducible.
inline Eigenpair top_eigenpair(const Matrix& A, double tol = 1e-11) {
  const Eigen::Index n = A.rows();
  auto dense = [&] {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::invalid_input, "eigensolver did not converge");
    return Eigenpair{eig.eigenvalues()(n - 1), eig.eigenvectors().col(n - 1)};
  };
  if (n <= detail::kDenseEigenLimit) return dense();

  const double scale = std::max(A.cwiseAbs().rowwise().sum().maxCoeff(), std::numeric_limits<double>::min());
  Vector v(n);
  {
    Rng rng(0x1a2c3e5f7b9d0e1fULL);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    v.normalize();
  }
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, 96);
  Matrix V(n, max_basis);
  for (int restart = 0; restart < 60; ++restart) {
    Vector alpha = Vector::Zero(max_basis), beta = Vector::Zero(max_basis);
    V.col(0) = v;
    Eigen::Index m = max_basis;
    for (Eigen::Index j = 0; j < max_basis; ++j) {
      Vector w = A * V.col(j);
      alpha(j) = V.col(j).dot(w);
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
      if (j + 1 == max_basis) break;
      beta(j) = w.norm();
      if (beta(j) <= 1e-13 * scale) {
        m = j + 1;
        break;
      }
      V.col(j + 1) = w / beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> small;
    Vector diag = alpha.head(m), sub = beta.head(std::max<Eigen::Index>(m - 1, 0));
    small.computeFromTridiagonal(diag, sub);
    const double theta = small.eigenvalues()(m - 1);
    Vector x = V.leftCols(m) * small.eigenvectors().col(m - 1);
    x.normalize();
    const double residual = (A * x - theta * x).norm();
    if (residual <= tol * scale) return {theta, x};
    v = x;
  }
  return dense();
}

/// Leading eigenpair of S orthogonal to the trivial eigenvector D^{1/2}·1
/// (which satisfies S·D^{1/2}1 = D^{1/2}1 for any weights with positive
/// degrees). The trivial direction is deflated to below the spectrum, so the
/// result is the second eigenvector even when noise lifts another eigenvalue
/// of a signed matrix above 1.
inline Eigenpair second_eigenpair(const Matrix& S, const Vector& degrees) {
  Vector u = degrees.array().sqrt();
  u.normalize();
  const double bound = S.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix deflated = S - (2.0 + 2.0 * bound) * (u * u.transpose());
  return top_eigenpair(deflated);
}

/// Side 1 for positive components. Falls back to a split above the median
/// when every component falls on one side of the cutoff.
inline std::vector<int> sign_split(const Vector& v, double cutoff = 0.0) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<int> side(n);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    side[i] = v(static_cast<Eigen::Index>(i)) > cutoff ? 1 : 0;
    ones += static_cast<std::size_t>(side[i]);
  }
  if (ones != 0 && ones != n) return side;
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2), sorted.end());
  const double median = sorted[(n - 1) / 2];
  ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    side[i] = v(static_cast<Eigen::Index>(i)) > median ? 1 : 0;
    ones += static_cast<std::size_t>(side[i]);
  }
  if (ones == 0 || ones == n)
    for (std::size_t i = 0; i < n; ++i) side[i] = i >= n / 2 ? 1 : 0;
  return side;
}

/// cut(A,B)/assoc(A) + cut(A,B)/assoc(B).
inline double ncut_value(const Matrix& weights, const std::vector<int>& side) {
  double cut = 0, assoc[2] = {0, 0};
  const Eigen::Index n = weights.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int si = side[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights(i, j);
      assoc[si] += w;
      if (si == 0 && side[static_cast<std::size_t>(j)] == 1) cut += w;
    }
  }
  if (cut == 0) return 0;
  return cut / assoc[0] + cut / assoc[1];
}

/// Connected components over positive off-diagonal weights, each sorted,
/// ordered by size (descending) then smallest member.
inline std::vector<std::vector<int>> connected_components(const Matrix& weights) {
  const int n = static_cast<int>(weights.rows());
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      out.back().push_back(v);
      for (int w = 0; w < n; ++w)
        if (w != v && comp[static_cast<std::size_t>(w)] < 0 && weights(v, w) > 0) {
          comp[static_cast<std::size_t>(w)] = id;
          stack.push_back(w);
        }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

struct Bipartition {
  std::vector<int> side;  // 0/1 per vertex
  double ncut = 0;
  bool from_components = false;
};

/// Best two-way split of a graph. A disconnected graph is split between its
/// largest component and the rest (zero cut); a connected one by the sign
/// of its second eigenvector.
inline Bipartition bipartition(const Matrix& weights) {
  const auto n = static_cast<std::size_t>(weights.rows());
  if (n < 2) throw Error(ErrorKind::invalid_input, "bipartition needs at least two vertices");
  auto comps = connected_components(weights);
  Bipartition out;
  if (comps.size() > 1) {
    out.side.assign(n, 1);
    for (int v : comps.front()) out.side[static_cast<std::size_t>(v)] = 0;
    out.from_components = true;
    out.ncut = 0;
    return out;
  }
  const Matrix S = normalized_operator(weights);
  const auto pair = second_eigenpair(S, weights.rowwise().sum());
  out.side = sign_split(pair.vector);
  out.ncut = ncut_value(weights, out.side);
  return out;
}

namespace detail {

inline LabelVector canonical_from_groups(const std::vector<std::vector<int>>& groups, int n) {
  std::vector<int> raw(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int v : groups[g]) raw[static_cast<std::size_t>(v)] = static_cast<int>(g);
  return LabelVector::canonical(raw);
}

inline Matrix submatrix(const Matrix& w, const std::vector<int>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix out(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) out(a, b) = w(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  return out;
}

}  // namespace detail

/// Two clusters by the sign of the second eigenvector of S. Labels are
/// numbered by first appearance.
inline LabelVector ncut_bipartition(const AffinityGraph& g) {
  if (g.size() < 2) throw Error(ErrorKind::invalid_input, "ncut_bipartition needs n >= 2");
  return LabelVector::canonical(bipartition(g.weights()).side);
}

enum class SpectralMethod {
  recursive_ncut,  // repeated two-way Ncut splits
  njw,             // top-k eigenvectors, row-normalized, K-means
};

struct SpectralOptions {
  SpectralMethod method = SpectralMethod::recursive_ncut;
  std::uint64_t seed = 0;  // NJW K-means only
};

inline LabelVector spectral_cluster_njw(const AffinityGraph& g, int k, std::uint64_t seed) {
  const Matrix S = normalized_operator(g);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  Matrix embed = eig.eigenvectors().rightCols(k);
  for (Eigen::Index i = 0; i < embed.rows(); ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0) embed.row(i) /= norm;
  }
  return LabelVector::canonical(kmeans(embed, k, seed).assignments);
}

/// k clusters by recursive Ncut: each round splits, among clusters with at
/// least two members, the one whose best bipartition has the smallest Ncut
/// value (ties to the cluster holding the lowest index).
inline LabelVector spectral_cluster(const AffinityGraph& g, int k, const SpectralOptions& opts = {}) {
  const int n = g.size();
  if (k < 1) throw Error(ErrorKind::infeasible_k, "k must be positive");
  if (k > n) throw Error(ErrorKind::infeasible_k, "k exceeds the number of points");
  if (opts.method == SpectralMethod::njw) return spectral_cluster_njw(g, k, opts.seed);

  struct Cluster {
    std::vector<int> members;
    std::optional<Bipartition> split;
  };
  std::vector<Cluster> clusters(1);
  clusters[0].members.resize(static_cast<std::size_t>(n));
  std::iota(clusters[0].members.begin(), clusters[0].members.end(), 0);

  while (static_cast<int>(clusters.size()) < k) {
    int pick = -1;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      auto& cl = clusters[c];
      if (cl.members.size() < 2) continue;
      if (!cl.split) cl.split = bipartition(detail::submatrix(g.weights(), cl.members));
      if (pick < 0) {
        pick = static_cast<int>(c);
        continue;
      }
      const auto& best = clusters[static_cast<std::size_t>(pick)];
      if (cl.split->ncut < best.split->ncut ||
          (cl.split->ncut == best.split->ncut && cl.members.front() < best.members.front()))
        pick = static_cast<int>(c);
    }
    Cluster chosen = std::move(clusters[static_cast<std::size_t>(pick)]);
    clusters.erase(clusters.begin() + pick);
    Cluster halves[2];
    for (std::size_t i = 0; i < chosen.members.size(); ++i)
      halves[chosen.split->side[i]].members.push_back(chosen.members[i]);
    clusters.push_back(std::move(halves[0]));
    clusters.push_back(std::move(halves[1]));
  }
  std::vector<std::vector<int>> groups;
  for (auto& cl : clusters) groups.push_back(std::move(cl.members));
  return detail::canonical_from_groups(groups, n);
}

}  // namespace cforest
