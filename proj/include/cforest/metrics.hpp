#pragma once

// External clustering indices: pair-counting agreement ρ_r and
// permutation-maximized accuracy ρ_c.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "cforest/core.hpp"
#include "cforest/data.hpp"

namespace cforest {

/// counts(j, k): points with true class j and predicted cluster k.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;

  int rows() const { return static_cast<int>(counts.size()); }
  int cols() const { return counts.empty() ? 0 : static_cast<int>(counts.front().size()); }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& r : counts)
      for (auto c : r) t += c;
    return t;
  }

  static ContingencyTable build(const LabelVector& truth, const LabelVector& pred) {
    if (truth.size() != pred.size()) throw Error(ErrorKind::length_mismatch, "label vectors differ in length");
    ContingencyTable t;
    t.counts.assign(static_cast<std::size_t>(truth.num_classes),
                    std::vector<std::int64_t>(static_cast<std::size_t>(pred.num_classes), 0));
    for (int i = 0; i < truth.size(); ++i) ++t.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
    return t;
  }
};

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// method with potentials, O(m³)). Returns column assigned to each row.
inline std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const int m = static_cast<int>(weight.size());
  if (m == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Minimize cost = -weight; 1-based arrays as in the classic formulation.
  std::vector<double> u(static_cast<std::size_t>(m + 1), 0), v(static_cast<std::size_t>(m + 1), 0);
  std::vector<int> match(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  auto cost = [&](int i, int j) { return -weight[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]; };
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(m + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(m), -1);
  for (int j = 1; j <= m; ++j)
    if (match[static_cast<std::size_t>(j)] > 0) row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

/// Optimal one-to-one matching of predicted clusters to true classes. The
/// table is padded square with zeros; returns matched point count and, for
/// each predicted cluster, its class (-1 when matched to padding).
struct Matching {
  std::int64_t matched = 0;
  std::vector<int> cluster_to_class;
};

inline Matching best_matching(const ContingencyTable& table) {
  const int m = std::max(table.rows(), table.cols());
  std::vector<std::vector<double>> w(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (int j = 0; j < table.rows(); ++j)
    for (int k = 0; k < table.cols(); ++k)
      w[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          static_cast<double>(table.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
  auto assign = max_weight_assignment(w);
  Matching out;
  out.cluster_to_class.assign(static_cast<std::size_t>(table.cols()), -1);
  for (int k = 0; k < table.cols(); ++k) {
    const int j = assign[static_cast<std::size_t>(k)];
    if (j < table.rows()) {
      out.cluster_to_class[static_cast<std::size_t>(k)] = j;
      out.matched += table.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
  }
  return out;
}

/// Percentage of unordered pairs on which both labelings agree about
/// co-membership, from pair counts of the contingency table.
inline double rho_r(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::length_mismatch, "label vectors differ in length");
  if (a.size() < 2) throw Error(ErrorKind::invalid_input, "rho_r needs at least two points");
  auto pairs = [](std::int64_t c) { return c * (c - 1) / 2; };
  const auto table = ContingencyTable::build(a, b);
  std::int64_t both = 0;
  std::vector<std::int64_t> row_sum(static_cast<std::size_t>(table.rows()), 0), col_sum(static_cast<std::size_t>(table.cols()), 0);
  for (int j = 0; j < table.rows(); ++j)
    for (int k = 0; k < table.cols(); ++k) {
      const auto c = table.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      both += pairs(c);
      row_sum[static_cast<std::size_t>(j)] += c;
      col_sum[static_cast<std::size_t>(k)] += c;
    }
  std::int64_t same_a = 0, same_b = 0;
  for (auto r : row_sum) same_a += pairs(r);
  for (auto c : col_sum) same_b += pairs(c);
  const std::int64_t total = pairs(a.size());
  const std::int64_t agree = total - (same_a - both) - (same_b - both);
  return 100.0 * static_cast<double>(agree) / static_cast<double>(total);
}

/// Accuracy in [0,1] under the best one-to-one relabeling of `pred`.
inline double rho_c(const LabelVector& pred, const LabelVector& truth) {
  if (pred.size() != truth.size()) throw Error(ErrorKind::length_mismatch, "label vectors differ in length");
  if (pred.size() == 0) throw Error(ErrorKind::invalid_input, "empty labelings");
  const auto m = best_matching(ContingencyTable::build(truth, pred));
  return static_cast<double>(m.matched) / static_cast<double>(pred.size());
}

}  // namespace cforest
