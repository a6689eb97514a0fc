#pragma once

// Growth of clustering vectors guided by κ, seeded by feature competition.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"

namespace cforest {

enum class StoppingRule {
  failure_run,  // stop after tau_max consecutive rejected expansions
  attempt_all,  // attempt every feature once (duplicates excluded), then stop
};

struct GrowthConfig {
  int b = 2;        // features sampled per attempt
  int q = 1;        // feature-competition rounds
  int tau_max = 3;  // consecutive failures allowed
  int k = 2;        // base-clustering cluster count
  bool distinct = false;
  StoppingRule stop = StoppingRule::failure_run;
  KMeansOptions kmeans{};

  void validate() const {
    if (b < 1 || q < 1 || tau_max < 1 || k < 2)
      throw Error(ErrorKind::invalid_input, "growth config needs b>=1, q>=1, tau_max>=1, k>=2");
  }
};

/// An expansion is accepted only if it lowers κ by more than this relative
/// amount, so a re-sampled identical view cannot win on rounding alone.
inline constexpr double kKappaRelativeTolerance = 1e-12;

struct ViewScore {
  double kappa = kInfiniteKappa;
  std::optional<Partition> partition;  // empty when the view cannot hold k clusters
};

/// K-means on the view of `features`, scored by κ. A view with fewer than k
/// distinct points scores kInfiniteKappa instead of throwing.
inline ViewScore score_view(const DataMatrix& data, const std::vector<int>& features, int k, std::uint64_t seed,
                            const KMeansOptions& opts) {
  const Matrix pts = FeatureView(data, features).materialize();
  try {
    Partition part = kmeans(pts, k, seed, opts);
    const double value = kappa(pts, part.assignments, part.k);
    return {value, std::move(part)};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::infeasible_k) throw;
    return {};
  }
}

struct CompetitionResult {
  std::vector<int> features;
  ViewScore score;
};

/// q independent b-feature draws; the κ-minimizer wins, earliest on ties.
inline CompetitionResult feature_competition(const DataMatrix& data, const GrowthConfig& cfg, Rng& rng) {
  cfg.validate();
  if (data.cols() < cfg.b) throw Error(ErrorKind::invalid_input, "fewer features than b");
  CompetitionResult best;
  for (int round = 0; round < cfg.q; ++round) {
    auto features = sample_without_replacement(data.cols(), cfg.b, rng);
    const std::uint64_t seed = rng();
    auto score = score_view(data, features, cfg.k, seed, cfg.kmeans);
    if (round == 0 || score.kappa < best.score.kappa) best = {std::move(features), std::move(score)};
  }
  return best;
}

struct ClusteringVector {
  std::vector<int> features;
  double kappa_value = kInfiniteKappa;
  /// K-means partition of the accepted view; the vector's base clustering.
  std::optional<Partition> partition;
  /// κ after initialization and after each accepted expansion.
  std::vector<double> kappa_trace;
  int attempts = 0;
  int longest_failure_run = 0;
};

/// Grows one clustering vector: start from the competition winner, then
/// repeatedly append b sampled features and keep them iff κ strictly drops.
inline ClusteringVector grow_clustering_vector(const DataMatrix& data, const GrowthConfig& cfg, Rng& rng) {
  auto init = feature_competition(data, cfg, rng);
  ClusteringVector vec;
  vec.features = std::move(init.features);
  vec.kappa_value = init.score.kappa;
  vec.partition = std::move(init.score.partition);
  vec.kappa_trace.push_back(vec.kappa_value);

  auto try_expand = [&](const std::vector<int>& extra) {
    std::vector<int> expanded = vec.features;
    expanded.insert(expanded.end(), extra.begin(), extra.end());
    const std::uint64_t seed = rng();
    auto score = score_view(data, expanded, cfg.k, seed, cfg.kmeans);
    ++vec.attempts;
    if (score.kappa < vec.kappa_value * (1 - kKappaRelativeTolerance)) {
      vec.features = std::move(expanded);
      vec.kappa_value = score.kappa;
      vec.partition = std::move(score.partition);
      vec.kappa_trace.push_back(vec.kappa_value);
      return true;
    }
    return false;
  };

  auto unused_features = [&] {
    std::vector<char> used(static_cast<std::size_t>(data.cols()), 0);
    for (int f : vec.features) used[static_cast<std::size_t>(f)] = 1;
    std::vector<int> pool;
    for (int f = 0; f < data.cols(); ++f)
      if (!used[static_cast<std::size_t>(f)]) pool.push_back(f);
    return pool;
  };

  if (cfg.stop == StoppingRule::attempt_all) {
    auto pool = unused_features();
    std::shuffle(pool.begin(), pool.end(), rng);
    int run = 0;
    for (std::size_t start = 0; start < pool.size(); start += static_cast<std::size_t>(cfg.b)) {
      const auto stop = std::min(pool.size(), start + static_cast<std::size_t>(cfg.b));
      std::vector<int> extra(pool.begin() + static_cast<std::ptrdiff_t>(start),
                             pool.begin() + static_cast<std::ptrdiff_t>(stop));
      run = try_expand(extra) ? 0 : run + 1;
      vec.longest_failure_run = std::max(vec.longest_failure_run, run);
    }
    return vec;
  }

  int tau = 0;
  while (tau < cfg.tau_max) {
    std::vector<int> extra;
    if (cfg.distinct) {
      auto pool = unused_features();
      if (pool.empty()) break;
      for (int idx : sample_without_replacement(static_cast<int>(pool.size()), cfg.b, rng))
        extra.push_back(pool[static_cast<std::size_t>(idx)]);
    } else {
      extra = sample_without_replacement(data.cols(), cfg.b, rng);
    }
    tau = try_expand(extra) ? 0 : tau + 1;
    vec.longest_failure_run = std::max(vec.longest_failure_run, tau);
  }
  return vec;
}

}  // namespace cforest
