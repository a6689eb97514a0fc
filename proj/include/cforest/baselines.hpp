#pragma once

// Comparison ensembles: evidence accumulation (EA), random projection (RP)
// and bagged clustering (bC2), with single-linkage agglomeration on
// co-association similarities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"
#include "cforest/ensemble.hpp"
#include "cforest/metrics.hpp"

namespace cforest {

struct LinkageThreshold {
  double t;
};
struct LinkageTarget {
  int k;
};
using LinkageMode = std::variant<LinkageThreshold, LinkageTarget>;

struct Merge {
  int a, b;  // smallest member of each merged cluster
  double similarity;
};

struct LinkageResult {
  LabelVector labels;
  std::vector<Merge> merges;
  bool degenerate = false;  // threshold mode ended with 1 or n clusters
};

/// Agglomerative single linkage on similarities: repeatedly merge the two
/// clusters joined by the most similar pair of points. Implemented as a
/// maximum spanning tree (Prim, O(n²)) whose edges are replayed in order of
/// decreasing similarity, ties by (smaller endpoint, larger endpoint).
inline LinkageResult single_linkage(const CoAssociationMatrix& sim, const LinkageMode& mode) {
  const int n = sim.size();
  if (n < 1) throw Error(ErrorKind::invalid_input, "empty similarity matrix");
  struct Edge {
    int u, v;
    double w;
  };
  std::vector<Edge> tree;
  {
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    std::vector<double> best(static_cast<std::size_t>(n), -1);
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    in[0] = 1;
    for (int v = 1; v < n; ++v) {
      best[static_cast<std::size_t>(v)] = sim(0, v);
      parent[static_cast<std::size_t>(v)] = 0;
    }
    for (int step = 1; step < n; ++step) {
      int pick = -1;
      for (int v = 0; v < n; ++v)
        if (!in[static_cast<std::size_t>(v)] && (pick < 0 || best[static_cast<std::size_t>(v)] > best[static_cast<std::size_t>(pick)]))
          pick = v;
      in[static_cast<std::size_t>(pick)] = 1;
      tree.push_back({std::min(pick, parent[static_cast<std::size_t>(pick)]), std::max(pick, parent[static_cast<std::size_t>(pick)]),
                      best[static_cast<std::size_t>(pick)]});
      for (int v = 0; v < n; ++v)
        if (!in[static_cast<std::size_t>(v)] && sim(pick, v) > best[static_cast<std::size_t>(v)]) {
          best[static_cast<std::size_t>(v)] = sim(pick, v);
          parent[static_cast<std::size_t>(v)] = pick;
        }
    }
  }
  std::sort(tree.begin(), tree.end(), [](const Edge& x, const Edge& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.u != y.u) return x.u < y.u;
    return x.v < y.v;
  });

  std::vector<int> root(static_cast<std::size_t>(n));
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[static_cast<std::size_t>(x)] != x) x = root[static_cast<std::size_t>(x)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
    return x;
  };
  LinkageResult out;
  int clusters = n;
  for (const auto& e : tree) {
    if (const auto* th = std::get_if<LinkageThreshold>(&mode)) {
      if (e.w < th->t) break;
    } else if (clusters <= std::get<LinkageTarget>(mode).k) {
      break;
    }
    const int a = find(e.u), b = find(e.v);
    // Roots are always the smallest member.
    out.merges.push_back({std::min(a, b), std::max(a, b), e.w});
    root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    --clusters;
  }
  std::vector<int> raw(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) raw[static_cast<std::size_t>(v)] = find(v);
  out.labels = LabelVector::canonical(raw);
  if (std::holds_alternative<LinkageThreshold>(mode)) out.degenerate = clusters == 1 || clusters == n;
  return out;
}

enum class BaselineMethod { ea, rp, bc2 };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::ea;
  int T = 100;
  int n_b = 2;
  int n_f = 2;
  double t = 0.5;  // EA threshold
  int dim = 5;     // RP target dimension
  bool orthonormal_projection = false;
  bool bootstrap = true;  // bC2; false resamples the identity
  std::uint64_t seed = 0;
  KMeansOptions kmeans{};
  int threads = 1;
};

struct BaselineResult {
  LabelVector labels;
  bool fallback = false;  // EA replaced a degenerate threshold cut by n_f
};

/// EA: T K-means runs on all features, co-association, single linkage at
/// threshold t. A degenerate cut (one cluster, or at least n/2 clusters) is
/// replaced by single linkage to n_f clusters.
inline BaselineResult evidence_accumulation(const DataMatrix& data, const BaselineConfig& cfg) {
  if (!(cfg.t > 0 && cfg.t < 1)) throw Error(ErrorKind::invalid_input, "EA threshold must lie in (0,1)");
  std::vector<std::vector<int>> runs(static_cast<std::size_t>(cfg.T));
  const Matrix& x = data.values();
  parallel_for(cfg.T, cfg.threads, [&](int l) {
    runs[static_cast<std::size_t>(l)] = kmeans(x, cfg.n_b, derive_seed(cfg.seed, 10, l), cfg.kmeans).assignments;
  });
  const auto P = co_association(runs);
  auto cut = single_linkage(P, LinkageThreshold{cfg.t});
  const int clusters = cut.labels.num_classes;
  if (clusters == 1 || 2 * clusters >= data.rows())
    return {single_linkage(P, LinkageTarget{cfg.n_f}).labels, true};
  return {std::move(cut.labels), false};
}

/// dim×p Gaussian projection scaled by 1/sqrt(dim), or with orthonormal rows.
inline Matrix random_projection(int dim, int p, Rng& rng, bool orthonormal) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix R(dim, p);
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    for (Eigen::Index j = 0; j < R.cols(); ++j) R(i, j) = normal(rng);
  if (orthonormal) {
    Eigen::HouseholderQR<Matrix> qr(R.transpose());
    return (qr.householderQ() * Matrix::Identity(p, dim)).transpose();
  }
  return R / std::sqrt(static_cast<double>(dim));
}

/// RP: T projections to `dim` dimensions, K-means with n_b clusters each,
/// co-association, single linkage to n_f clusters.
inline BaselineResult random_projection_ensemble(const DataMatrix& data, const BaselineConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > data.cols()) throw Error(ErrorKind::invalid_input, "RP dimension must lie in 1..p");
  std::vector<std::vector<int>> runs(static_cast<std::size_t>(cfg.T));
  parallel_for(cfg.T, cfg.threads, [&](int l) {
    Rng rng = substream(cfg.seed, 11, l);
    const Matrix R = random_projection(cfg.dim, data.cols(), rng, cfg.orthonormal_projection);
    const Matrix projected = data.values() * R.transpose();
    runs[static_cast<std::size_t>(l)] = kmeans(projected, cfg.n_b, rng(), cfg.kmeans).assignments;
  });
  return {single_linkage(co_association(runs), LinkageTarget{cfg.n_f}).labels, false};
}

/// bC2: K-means (n_b = n_f) on T bootstrap resamples, every point labeled by
/// its nearest center, instances aligned to the first by optimal matching,
/// then a majority vote (ties to the lowest label).
inline BaselineResult bagged_clustering(const DataMatrix& data, const BaselineConfig& cfg) {
  const int n = data.rows(), k = cfg.n_f;
  const Matrix& x = data.values();
  std::vector<std::vector<int>> runs(static_cast<std::size_t>(cfg.T));
  parallel_for(cfg.T, cfg.threads, [&](int l) {
    Rng rng = substream(cfg.seed, 12, l);
    std::uniform_int_distribution<int> draw(0, n - 1);
    Partition part;
    for (int attempt = 0;; ++attempt) {
      Matrix sample(n, x.cols());
      for (int i = 0; i < n; ++i) sample.row(i) = x.row(cfg.bootstrap ? draw(rng) : i);
      try {
        part = kmeans(sample, k, rng(), cfg.kmeans);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::infeasible_k || !cfg.bootstrap || attempt > 100) throw;
      }
    }
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (part.centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      lab[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    runs[static_cast<std::size_t>(l)] = std::move(lab);
  });

  const LabelVector reference(runs.front(), k);
  std::vector<std::vector<int>> votes(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(k), 0));
  for (const auto& run : runs) {
    const auto table = ContingencyTable::build(reference, LabelVector(run, k));
    const auto match = best_matching(table);
    for (int i = 0; i < n; ++i) {
      const int mapped = match.cluster_to_class[static_cast<std::size_t>(run[static_cast<std::size_t>(i)])];
      ++votes[static_cast<std::size_t>(i)][static_cast<std::size_t>(mapped)];
    }
  }
  std::vector<int> final_labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& v = votes[static_cast<std::size_t>(i)];
    final_labels[static_cast<std::size_t>(i)] = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  }
  return {LabelVector(std::move(final_labels), k), false};
}

inline BaselineResult run_baseline(const DataMatrix& data, const BaselineConfig& cfg) {
  switch (cfg.method) {
    case BaselineMethod::ea: return evidence_accumulation(data, cfg);
    case BaselineMethod::rp: return random_projection_ensemble(data, cfg);
    case BaselineMethod::bc2: return bagged_clustering(data, cfg);
  }
  throw Error(ErrorKind::invalid_input, "unknown baseline");
}

}  // namespace cforest
