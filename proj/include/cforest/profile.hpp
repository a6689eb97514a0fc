#pragma once

// Single-feature strength profile: κ of a K-means fit on each column alone.

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"

namespace cforest {

/// Strength of feature j is κ of k-means on column j. A constant numeric
/// column scores kInfiniteKappa. A categorical column with fewer than k
/// levels borrows the strength of a uniformly drawn finite-strength donor.
inline std::vector<double> feature_profile(const DataMatrix& data, int k, std::uint64_t seed,
                                           const KMeansOptions& opts = {}) {
  if (k < 2) throw Error(ErrorKind::invalid_input, "feature_profile needs k >= 2");
  const int p = data.cols();
  std::vector<double> strength(static_cast<std::size_t>(p), kInfiniteKappa);
  std::vector<int> borrowers;
  std::vector<double> donors;
  for (int j = 0; j < p; ++j) {
    const auto& kind = data.kinds()[static_cast<std::size_t>(j)];
    if (kind.is_categorical() && kind.num_levels < k) {
      borrowers.push_back(j);
      continue;
    }
    const Matrix col = data.values().col(j);
    try {
      const auto part = kmeans(col, k, derive_seed(seed, 30, j), opts);
      strength[static_cast<std::size_t>(j)] = kappa(col, part.assignments, part.k);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible_k) throw;
    }
    if (std::isfinite(strength[static_cast<std::size_t>(j)])) donors.push_back(strength[static_cast<std::size_t>(j)]);
  }
  if (!borrowers.empty()) {
    if (donors.empty()) throw Error(ErrorKind::degenerate_profile, "no feature with a finite strength to sample from");
    Rng rng = substream(seed, 31);
    std::uniform_int_distribution<std::size_t> pick(0, donors.size() - 1);
    for (int j : borrowers) strength[static_cast<std::size_t>(j)] = donors[pick(rng)];
  }
  return strength;
}

inline void write_profile_csv(std::ostream& out, const std::vector<double>& strength) {
  out << "feature_index,strength\n";
  for (std::size_t j = 0; j < strength.size(); ++j) out << j << ',' << format_double(strength[j]) << '\n';
}

}  // namespace cforest
