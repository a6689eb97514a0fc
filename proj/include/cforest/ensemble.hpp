#pragma once

// Cluster Forests driver: grow T clustering vectors, average their
// co-cluster indicators, regularize, and aggregate by spectral clustering.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <vector>

#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"
#include "cforest/growth.hpp"
#include "cforest/spectral.hpp"

namespace cforest {

namespace detail {
inline std::size_t packed_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  const auto ii = static_cast<std::size_t>(i), nn = static_cast<std::size_t>(n);
  return ii * nn - ii * (ii + 1) / 2 + static_cast<std::size_t>(j);
}
}  // namespace detail

/// Binary co-membership matrix of one partition, upper triangle packed.
class IndicatorMatrix {
 public:
  explicit IndicatorMatrix(const std::vector<int>& assignments) : n_(static_cast<int>(assignments.size())) {
    bits_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ + 1) / 2);
    std::size_t at = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) bits_[at++] = assignments[static_cast<std::size_t>(i)] == assignments[static_cast<std::size_t>(j)];
  }

  int size() const { return n_; }
  int operator()(int i, int j) const { return bits_[detail::packed_index(n_, i, j)]; }
  const std::vector<std::uint8_t>& packed() const { return bits_; }

 private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

inline IndicatorMatrix co_cluster_indicator(const Partition& part) { return IndicatorMatrix(part.assignments); }
inline IndicatorMatrix co_cluster_indicator(const LabelVector& labels) { return IndicatorMatrix(labels.labels); }

/// Symmetric matrix of co-clustering frequencies; symmetry is structural
/// (only the upper triangle is stored) and the diagonal is 1.
class CoAssociationMatrix {
 public:
  CoAssociationMatrix() = default;

  /// From an upper-triangle packed array, row-major (i <= j).
  CoAssociationMatrix(int n, std::vector<double> packed) : n_(n), values_(std::move(packed)) {
    if (values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2)
      throw Error(ErrorKind::invalid_input, "packed size does not match n");
    for (double v : values_)
      if (!(v >= 0 && v <= 1)) throw Error(ErrorKind::invalid_input, "co-association entry outside [0,1]");
    for (int i = 0; i < n; ++i)
      if (values_[detail::packed_index(n, i, i)] != 1.0) throw Error(ErrorKind::invalid_input, "diagonal entry not 1");
  }

  int size() const { return n_; }
  double operator()(int i, int j) const { return values_[detail::packed_index(n_, i, j)]; }
  const std::vector<double>& packed() const { return values_; }

  Matrix dense() const {
    Matrix out(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) out(i, j) = out(j, i) = (*this)(i, j);
    return out;
  }

  /// Same matrix with vertices reordered: entry (a,b) = old(order[a], order[b]).
  CoAssociationMatrix permuted(const std::vector<int>& order) const {
    std::vector<double> packed;
    packed.reserve(values_.size());
    for (int a = 0; a < n_; ++a)
      for (int b = a; b < n_; ++b) packed.push_back((*this)(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]));
    return CoAssociationMatrix(n_, std::move(packed));
  }

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Entrywise mean of T indicators. Sums are integer counts, so the result
/// does not depend on summation order.
inline CoAssociationMatrix aggregate(std::span<const IndicatorMatrix> indicators) {
  if (indicators.empty()) throw Error(ErrorKind::invalid_input, "no indicator matrices to aggregate");
  const int n = indicators.front().size();
  std::vector<std::uint32_t> counts(indicators.front().packed().size(), 0);
  for (const auto& ind : indicators) {
    if (ind.size() != n) throw Error(ErrorKind::length_mismatch, "indicator matrices differ in size");
    const auto& bits = ind.packed();
    for (std::size_t e = 0; e < counts.size(); ++e) counts[e] += bits[e];
  }
  const double t = static_cast<double>(indicators.size());
  std::vector<double> values(counts.size());
  for (std::size_t e = 0; e < counts.size(); ++e) values[e] = counts[e] / t;
  return CoAssociationMatrix(n, std::move(values));
}

/// Co-association of T labelings without materializing indicators.
inline CoAssociationMatrix co_association(std::span<const std::vector<int>> labelings) {
  if (labelings.empty()) throw Error(ErrorKind::invalid_input, "no labelings to aggregate");
  const int n = static_cast<int>(labelings.front().size());
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2, 0);
  for (const auto& lab : labelings) {
    if (static_cast<int>(lab.size()) != n) throw Error(ErrorKind::length_mismatch, "labelings differ in length");
    std::size_t at = 0;
    for (int i = 0; i < n; ++i) {
      const int li = lab[static_cast<std::size_t>(i)];
      for (int j = i; j < n; ++j) counts[at++] += li == lab[static_cast<std::size_t>(j)];
    }
  }
  const double t = static_cast<double>(labelings.size());
  std::vector<double> values(counts.size());
  for (std::size_t e = 0; e < counts.size(); ++e) values[e] = counts[e] / t;
  return CoAssociationMatrix(n, std::move(values));
}

enum class RegularizationMode {
  zero_preserving,  // entries below beta2 stay 0 after scaling
  threshold_then_exp,  // exp applied to every entry, so zeroed ones become 1
};

/// Thresholding at beta2 followed by scaling exp(beta1·P).
inline Matrix regularize(const CoAssociationMatrix& P, double beta1, double beta2,
                         RegularizationMode mode = RegularizationMode::zero_preserving) {
  if (!(beta2 > 0 && beta2 < 1)) throw Error(ErrorKind::invalid_input, "beta2 must lie in (0,1)");
  const int n = P.size();
  Matrix W(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double p = P(i, j);
      const double kept = p >= beta2 ? p : 0.0;
      double w = std::exp(beta1 * kept);
      if (mode == RegularizationMode::zero_preserving && p < beta2) w = 0.0;
      W(i, j) = W(j, i) = w;
    }
  return W;
}

struct CFConfig {
  int T = 100;
  GrowthConfig growth{};
  double beta1 = 10.0;
  double beta2 = 0.4;
  int n_b = 2;
  int n_f = 2;
  std::uint64_t seed = 0;
  RegularizationMode regularization = RegularizationMode::zero_preserving;
  SpectralMethod aggregator = SpectralMethod::recursive_ncut;
  int threads = 1;

  void validate() const {
    if (T < 1) throw Error(ErrorKind::invalid_input, "T must be at least 1");
    if (!(beta2 > 0 && beta2 < 1)) throw Error(ErrorKind::invalid_input, "beta2 must lie in (0,1)");
    if (n_f < 2 || n_b < 2) throw Error(ErrorKind::invalid_input, "n_f and n_b must be at least 2");
    growth.validate();
  }
};

struct CFResult {
  LabelVector labels;
  CoAssociationMatrix coassociation;
  std::vector<ClusteringVector> vectors;
  std::vector<std::vector<int>> base_labelings;
};

/// Base clustering of an ensemble member: the partition found while growing
/// the vector, or, for a view too coarse for n_b clusters, K-means with as
/// many clusters as the view allows.
inline std::vector<int> base_partition(const DataMatrix& data, const ClusteringVector& vec, int n_b,
                                       std::uint64_t seed, const KMeansOptions& opts) {
  if (vec.partition) return vec.partition->assignments;
  const Matrix pts = FeatureView(data, vec.features).materialize();
  for (int k = n_b - 1; k >= 2; --k) {
    try {
      return kmeans(pts, k, seed, opts).assignments;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible_k) throw;
    }
  }
  return std::vector<int>(static_cast<std::size_t>(data.rows()), 0);
}

/// Grows T vectors (member l on its own substream of cfg.seed), base-
/// clusters each, averages indicators, regularizes and spectral-clusters
/// into n_f clusters.
inline CFResult run_cluster_forests(const DataMatrix& data, const CFConfig& cfg) {
  cfg.validate();
  if (data.cols() < cfg.growth.b) throw Error(ErrorKind::invalid_input, "fewer features than b");
  GrowthConfig growth = cfg.growth;
  growth.k = cfg.n_b;

  CFResult result;
  result.vectors.resize(static_cast<std::size_t>(cfg.T));
  result.base_labelings.resize(static_cast<std::size_t>(cfg.T));
  parallel_for(cfg.T, cfg.threads, [&](int l) {
    Rng rng = substream(cfg.seed, 1, l);
    auto vec = grow_clustering_vector(data, growth, rng);
    result.base_labelings[static_cast<std::size_t>(l)] = base_partition(data, vec, cfg.n_b, rng(), growth.kmeans);
    result.vectors[static_cast<std::size_t>(l)] = std::move(vec);
  });
  result.coassociation = co_association(result.base_labelings);
  AffinityGraph graph(regularize(result.coassociation, cfg.beta1, cfg.beta2, cfg.regularization));
  result.labels = spectral_cluster(graph, cfg.n_f, {cfg.aggregator, derive_seed(cfg.seed, 2)});
  return result;
}

// --- affinity export -----------------------------------------------------

inline void write_affinity_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

namespace detail {
inline void put_le(std::ostream& out, std::uint64_t bits) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}
inline std::uint64_t get_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw Error(ErrorKind::malformed_input, "truncated affinity dump");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
}  // namespace detail

/// 8-byte little-endian n, then n·n little-endian f64 values row-major.
inline void write_affinity_binary(std::ostream& out, const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::invalid_input, "affinity dump needs a square matrix");
  detail::put_le(out, static_cast<std::uint64_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) detail::put_le(out, std::bit_cast<std::uint64_t>(m(i, j)));
}

inline Matrix read_affinity_binary(std::istream& in) {
  const auto n = static_cast<Eigen::Index>(detail::get_le(in));
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = std::bit_cast<double>(detail::get_le(in));
  return m;
}

}  // namespace cforest
