#include <gtest/gtest.h>

#include "cforest/perturbation.hpp"

using namespace cforest;

TEST(Planted, Examples) {
  Matrix a = planted_affinity(1, 1, 0.1);
  EXPECT_EQ(a(0, 0), 0.9);
  EXPECT_EQ(a(0, 1), 0.1);
  EXPECT_EQ(a(1, 0), 0.1);
  Matrix z = planted_affinity(2, 3, 0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(z(i, j), (i < 2) == (j < 2) ? 1.0 : 0.0);
  Matrix h = planted_affinity(3, 2, 0.5);
  EXPECT_EQ(h.maxCoeff(), 0.5);
  EXPECT_EQ(h.minCoeff(), 0.5);
}

TEST(Perturbed, ZeroNoiseAndSymmetry) {
  const Matrix P = planted_affinity(20, 20, 0.1);
  Rng rng(1);
  EXPECT_EQ(sample_perturbed(P, 0, rng), P);
  const Matrix Q = sample_perturbed(P, 0.7, rng);
  EXPECT_EQ(Q, Q.transpose());
}

TEST(Perturbed, NoiseMeanNearZero) {
  const int n = 200;
  const double sigma = 0.5;
  const Matrix P = planted_affinity(100, 100, 0.1);
  Rng rng(2);
  const Matrix E = sample_perturbed(P, sigma, rng) - P;
  double sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) sum += E(i, j);
  const double m = n * (n + 1) / 2.0;
  EXPECT_LE(std::abs(sum / m), 4 * sigma / std::sqrt(m));
}

TEST(Perturbed, SpectralNormGrowsLikeSqrtN) {
  std::vector<double> ratio;
  for (int n : {100, 200, 400}) {
    Rng rng(static_cast<std::uint64_t>(n));
    const Matrix E = sample_perturbed(Matrix::Zero(n, n), 1.0, rng);
    ratio.push_back(E.operatorNorm() / std::sqrt(static_cast<double>(n)));
  }
  // Semicircle edge: about 2 for every n.
  for (double r : ratio) EXPECT_NEAR(r, 2.0, 0.25);
  EXPECT_LT(std::abs(ratio[2] - ratio[0]), 0.2);
}

TEST(Misclustering, Examples) {
  std::vector<int> truth(100);
  for (int i = 50; i < 100; ++i) truth[static_cast<std::size_t>(i)] = 1;
  EXPECT_EQ(misclustering_rate(LabelVector(truth, 2), 50, 50), 0);
  std::vector<int> swapped(truth);
  for (auto& v : swapped) v = 1 - v;
  EXPECT_EQ(misclustering_rate(LabelVector(swapped, 2), 50, 50), 0);
  truth[3] = 1;
  EXPECT_DOUBLE_EQ(misclustering_rate(LabelVector(truth, 2), 50, 50), 0.01);
  EXPECT_THROW(misclustering_rate(LabelVector(truth, 2), 50, 49), Error);
}

TEST(Theory, ClosedForm) {
  EXPECT_EQ(theory_log_rate(1, 1), -0.125);
  EXPECT_EQ(theory_log_rate(1, 2), -1.0 / 32);
  // Minimum over gamma at 1, rising towards 0 as sigma grows.
  double prev = 0;
  for (int i = 1; i <= 50; ++i) {
    const double g = i / 50.0, r = theory_log_rate(g, 1);
    if (i > 1) {
      EXPECT_LT(r, prev);
    }
    prev = r;
  }
  for (double s = 0.5; s < 5; s += 0.25) EXPECT_LT(theory_log_rate(0.6, s), theory_log_rate(0.6, s + 0.25));
}

TEST(Bipartition, SmallNoiseRecoversBlocks) {
  const Matrix P = planted_affinity(100, 100, 0.1);
  int perfect = 0;
  for (int t = 0; t < 500; ++t) {
    Rng rng = substream(3, t);
    auto labels = signed_bipartition(sample_perturbed(P, 0.05, rng));
    ASSERT_TRUE(labels);
    perfect += misclustering_rate(*labels, 100, 100) == 0;
  }
  EXPECT_GE(perfect, 495);
}

TEST(Bipartition, NonPositiveDegreeAborts) {
  Matrix P = planted_affinity(2, 2, 0.1);
  P.row(0).setConstant(-1);
  P.col(0).setConstant(-1);
  EXPECT_FALSE(signed_bipartition(P));
}

TEST(Rate, ZeroNoiseGivesSentinel) {
  PerturbationSpec spec{20, 1.0, 0.05, 0.0, 10, 1};
  auto r = estimate_rate(spec);
  EXPECT_EQ(r.mean_m, 0);
  EXPECT_EQ(r.empirical, -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(r.warning.empty());
  EXPECT_EQ(r.theory, theory_log_rate(1, 0));
}

TEST(Rate, DeterministicAcrossThreads) {
  PerturbationSpec spec{30, 0.6, 0.05, 1.2, 40, 9};
  auto a = estimate_rate(spec, 1), b = estimate_rate(spec, 3);
  EXPECT_EQ(a.mean_m, b.mean_m);
  EXPECT_EQ(a.aborted, b.aborted);
  EXPECT_GT(a.mean_m, 0);
}

TEST(Rate, SpecValidation) {
  EXPECT_THROW(estimate_rate({10, 1.5, 0.05, 1, 5, 0}), Error);
  EXPECT_THROW(estimate_rate({10, 1, 0.5, 1, 5, 0}), Error);
  EXPECT_THROW(estimate_rate({10, 1, 0.05, 1, 0, 0}), Error);
}

TEST(EigenAsymptotics, Examples) {
  auto zero = eigen_asymptotics_check(30, 1, 0);
  EXPECT_NEAR(zero.lambda1, 1, 1e-12);
  EXPECT_NEAR(zero.lambda2, 1, 1e-12);
  auto r = eigen_asymptotics_check(500, 1, 0.01);
  EXPECT_NEAR(r.lambda2, 0.98, 1e-3);
  EXPECT_LE(r.lambda2_error, 1e-3);
  EXPECT_LE(r.within_block_spread, 1e-10);
  for (double g : {0.3, 0.6, 1.0}) {
    auto e = eigen_asymptotics_check(400, g, 0.01);
    EXPECT_LE(e.within_block_spread, 1e-10) << g;
    EXPECT_NEAR(e.block1_value, -std::pow(g, 1.5), 0.05) << g;
    EXPECT_NEAR(e.block2_value, 1, 0.05) << g;
  }
}
