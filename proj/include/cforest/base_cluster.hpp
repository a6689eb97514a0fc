#pragma once

// K-means base clustering over weighted feature-subset views, and the κ
// cluster-quality ratio SS_W / SS_B.

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "cforest/core.hpp"
#include "cforest/data.hpp"

namespace cforest {

/// Columns of a DataMatrix, possibly repeated. A column listed m times
/// contributes m times its squared coordinate difference to distances.
class FeatureView {
 public:
  FeatureView(const DataMatrix& source, std::vector<int> columns)
      : source_(&source), columns_(std::move(columns)) {
    for (int c : columns_)
      if (c < 0 || c >= source.cols()) throw Error(ErrorKind::invalid_input, "view column out of range");
    if (columns_.empty()) throw Error(ErrorKind::invalid_input, "empty feature view");
  }

  const DataMatrix& source() const { return *source_; }
  const std::vector<int>& columns() const { return columns_; }
  int rows() const { return source_->rows(); }
  int dim() const { return static_cast<int>(columns_.size()); }

  /// n×d matrix of the view's coordinates.
  Matrix materialize() const {
    Matrix out(source_->rows(), dim());
    for (int c = 0; c < dim(); ++c) out.col(c) = source_->values().col(columns_[static_cast<std::size_t>(c)]);
    return out;
  }

 private:
  const DataMatrix* source_;
  std::vector<int> columns_;
};

struct Partition {
  std::vector<int> assignments;
  int k = 0;
  Matrix centers;  // k×d
  double inertia = 0;

  int size() const { return static_cast<int>(assignments.size()); }
};

struct KMeansOptions {
  int max_iter = 100;
  int restarts = 5;
};

namespace detail {

// Points stored one per column (d×n) so each point is contiguous.
inline double sq_dist(const double* a, const double* b, Eigen::Index d) {
  double s = 0;
  for (Eigen::Index t = 0; t < d; ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

struct LloydRun {
  std::vector<int> assign;
  Matrix centers;  // d×k
  double inertia;
};

// k-means++ seeding. Returns false when the points have fewer than k
// distinct values (every remaining squared distance is zero).
inline bool seed_centers(const Matrix& pts, int k, Rng& rng, Matrix& centers) {
  const Eigen::Index d = pts.rows(), n = pts.cols();
  centers.resize(d, k);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.col(0) = pts.col(first(rng));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = sq_dist(pts.col(i).data(), centers.col(0).data(), d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (double v : dist) total += v;
    if (!(total > 0)) return false;
    double target = unit(rng) * total;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = dist[static_cast<std::size_t>(i)];
      if (w <= 0) continue;
      pick = i;
      target -= w;
      if (target < 0) break;
    }
    centers.col(c) = pts.col(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist[static_cast<std::size_t>(i)] =
          std::min(dist[static_cast<std::size_t>(i)], sq_dist(pts.col(i).data(), centers.col(c).data(), d));
  }
  return true;
}

// Nearest center, lowest index on ties. Returns total squared distance.
inline double assign_points(const Matrix& pts, const Matrix& centers, std::vector<int>& assign,
                            std::vector<double>& cost) {
  const Eigen::Index d = pts.rows(), n = pts.cols(), k = centers.cols();
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq_dist(pts.col(i).data(), centers.col(0).data(), d);
    for (Eigen::Index c = 1; c < k; ++c) {
      const double dc = sq_dist(pts.col(i).data(), centers.col(c).data(), d);
      if (dc < best_d) {
        best_d = dc;
        best = static_cast<int>(c);
      }
    }
    assign[static_cast<std::size_t>(i)] = best;
    cost[static_cast<std::size_t>(i)] = best_d;
    total += best_d;
  }
  return total;
}

// Reseeds each empty cluster at the point farthest from its current center.
inline void repair_empty(const Matrix& pts, Matrix& centers, std::vector<int>& assign, std::vector<double>& cost) {
  const Eigen::Index k = centers.cols();
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++counts[static_cast<std::size_t>(a)];
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (counts[static_cast<std::size_t>(assign[i])] < 2) continue;
      if (cost[i] > far_d) {
        far_d = cost[i];
        far = static_cast<Eigen::Index>(i);
      }
    }
    if (far < 0) continue;
    --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
    assign[static_cast<std::size_t>(far)] = static_cast<int>(c);
    cost[static_cast<std::size_t>(far)] = 0;
    counts[static_cast<std::size_t>(c)] = 1;
    centers.col(c) = pts.col(far);
  }
}

inline void update_centers(const Matrix& pts, const std::vector<int>& assign, Matrix& centers) {
  const Eigen::Index k = centers.cols();
  centers.setZero();
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    centers.col(assign[i]) += pts.col(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(assign[i])];
  }
  for (Eigen::Index c = 0; c < k; ++c) centers.col(c) /= counts[static_cast<std::size_t>(c)];
}

inline double inertia_of(const Matrix& pts, const std::vector<int>& assign, const Matrix& centers) {
  double total = 0;
  for (std::size_t i = 0; i < assign.size(); ++i)
    total += sq_dist(pts.col(static_cast<Eigen::Index>(i)).data(), centers.col(assign[i]).data(), pts.rows());
  return total;
}

inline LloydRun lloyd(const Matrix& pts, Matrix centers, int max_iter, std::vector<double>* trace) {
  const std::size_t n = static_cast<std::size_t>(pts.cols());
  LloydRun run{std::vector<int>(n, -1), std::move(centers), 0};
  std::vector<int> next(n);
  std::vector<double> cost(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    assign_points(pts, run.centers, next, cost);
    repair_empty(pts, run.centers, next, cost);
    if (next == run.assign) break;
    run.assign.swap(next);
    update_centers(pts, run.assign, run.centers);
    if (trace) trace->push_back(inertia_of(pts, run.assign, run.centers));
  }
  run.inertia = inertia_of(pts, run.assign, run.centers);
  return run;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding, best of `restarts` runs by
/// inertia. `points` is n×d. Throws infeasible_k when there are fewer than k
/// distinct points. If `trace` is given it receives the inertia after each
/// center update of the winning restart.
inline Partition kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts = {},
                        std::vector<double>* trace = nullptr) {
  if (k < 1) throw Error(ErrorKind::infeasible_k, "k must be positive");
  if (k > points.rows()) throw Error(ErrorKind::infeasible_k, "k exceeds the number of points");
  const Matrix pts = points.transpose();
  Rng rng(seed);
  detail::LloydRun best{{}, {}, std::numeric_limits<double>::infinity()};
  std::vector<double> best_trace;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Matrix centers;
    if (!detail::seed_centers(pts, k, rng, centers))
      throw Error(ErrorKind::infeasible_k, "fewer than " + std::to_string(k) + " distinct points");
    std::vector<double> run_trace;
    auto run = detail::lloyd(pts, std::move(centers), std::max(1, opts.max_iter), trace ? &run_trace : nullptr);
    if (run.inertia < best.inertia) {
      best = std::move(run);
      best_trace = std::move(run_trace);
    }
  }
  if (trace) *trace = std::move(best_trace);
  return Partition{std::move(best.assign), k, best.centers.transpose(), best.inertia};
}

inline Partition kmeans(const FeatureView& view, int k, std::uint64_t seed, const KMeansOptions& opts = {}) {
  return kmeans(view.materialize(), k, seed, opts);
}

/// SS_W / SS_B over unordered point pairs, in O(n·d) through cluster means:
/// within a cluster Σ_{i<j}‖x_i-x_j‖² = |C|·SSE_C, and between clusters
/// C, C' the pair sum is |C'|·SSE_C + |C|·SSE_C' + |C||C'|·‖m_C-m_C'‖².
/// Returns kInfiniteKappa when SS_B is zero.
inline double kappa(const Matrix& points, const std::vector<int>& assignments, int k) {
  const Eigen::Index n = points.rows(), d = points.cols();
  if (static_cast<Eigen::Index>(assignments.size()) != n)
    throw Error(ErrorKind::length_mismatch, "partition size differs from view size");
  if (k < 2) throw Error(ErrorKind::invalid_input, "kappa needs at least two clusters");
  Matrix means = Matrix::Zero(d, k);
  std::vector<double> size(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assignments[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) throw Error(ErrorKind::invalid_input, "assignment outside 0..k-1");
    means.col(c) += points.row(i).transpose();
    size[static_cast<std::size_t>(c)] += 1;
  }
  for (int c = 0; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] == 0) throw Error(ErrorKind::invalid_input, "empty cluster");
    means.col(c) /= size[static_cast<std::size_t>(c)];
  }
  std::vector<double> sse(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assignments[static_cast<std::size_t>(i)];
    sse[static_cast<std::size_t>(c)] += (points.row(i).transpose() - means.col(c)).squaredNorm();
  }
  double ss_w = 0, ss_b = 0;
  for (int c = 0; c < k; ++c) {
    const double nc = size[static_cast<std::size_t>(c)];
    ss_w += nc * sse[static_cast<std::size_t>(c)];
    for (int e = c + 1; e < k; ++e) {
      const double ne = size[static_cast<std::size_t>(e)];
      ss_b += ne * sse[static_cast<std::size_t>(c)] + nc * sse[static_cast<std::size_t>(e)] +
              nc * ne * (means.col(c) - means.col(e)).squaredNorm();
    }
  }
  if (!(ss_b > 0)) return kInfiniteKappa;
  return ss_w / ss_b;
}

inline double kappa(const FeatureView& view, const Partition& part) {
  return kappa(view.materialize(), part.assignments, part.k);
}

}  // namespace cforest
