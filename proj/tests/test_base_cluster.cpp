#include <gtest/gtest.h>

#include <set>

#include "cforest/base_cluster.hpp"
#include "cforest/metrics.hpp"

using namespace cforest;

namespace {

// All unordered pairs, straight from the definition.
double brute_kappa(const Matrix& x, const std::vector<int>& a) {
  double w = 0, b = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double d = (x.row(i) - x.row(j)).squaredNorm();
      (a[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(j)] ? w : b) += d;
    }
  return w / b;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Matrix gaussian(int n, int d, Rng& rng, double sd = 1) {
  std::normal_distribution<double> z(0, sd);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = z(rng);
  return m;
}

}  // namespace

TEST(Kappa, CoincidentWithinClustersIsZero) {
  EXPECT_EQ(kappa(column({0, 0, 10, 10}), {0, 0, 1, 1}, 2), 0);
}

TEST(Kappa, HandEnumeratedExample) {
  EXPECT_NEAR(kappa(column({0, 1, 10, 11}), {0, 0, 1, 1}, 2), 2.0 / 402.0, 1e-15);
}

TEST(Kappa, FastPathMatchesBruteForce) {
  Rng rng(101);
  std::uniform_int_distribution<int> nn(4, 200), dd(1, 6), kk(2, 5);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = nn(rng), d = dd(rng), k = std::min(kk(rng), n);
    Matrix x = gaussian(n, d, rng, 3);
    std::vector<int> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = i < k ? i : std::uniform_int_distribution<int>(0, k - 1)(rng);
    const double fast = kappa(x, a, k), slow = brute_kappa(x, a);
    EXPECT_NEAR(fast, slow, 1e-9 * slow) << "instance " << inst;
  }
}

TEST(Kappa, ZeroBetweenSumIsInfinite) {
  EXPECT_EQ(kappa(column({3, 3, 3, 3}), {0, 0, 1, 1}, 2), kInfiniteKappa);
  EXPECT_GT(kInfiniteKappa, 1e300);
}

TEST(Kappa, RigidMotionAndScaleInvariance) {
  Rng rng(7);
  Matrix x = gaussian(60, 3, rng);
  for (int i = 0; i < 30; ++i) x.row(i).array() += 2;
  std::vector<int> a(60);
  for (int i = 0; i < 60; ++i) a[static_cast<std::size_t>(i)] = i < 30 ? 0 : 1;
  const double base = kappa(x, a, 2);
  Eigen::HouseholderQR<Matrix> qr(gaussian(3, 3, rng));
  const Matrix Q = qr.householderQ();
  Matrix moved = (x * Q).rowwise() + Eigen::RowVector3d(5, -2, 9);
  EXPECT_NEAR(kappa(moved, a, 2), base, 1e-12 * base);
  EXPECT_NEAR(kappa(Matrix(4.5 * x), a, 2), base, 1e-12 * base);
  EXPECT_GE(base, 0);
}

TEST(Kappa, DuplicateColumnActsAsDoubleWeight) {
  Rng rng(9);
  Matrix x = gaussian(40, 3, rng);
  DataMatrix data(x);
  std::vector<int> a(40);
  for (int i = 0; i < 40; ++i) a[static_cast<std::size_t>(i)] = i % 3;
  const Matrix dup = FeatureView(data, {0, 1, 1, 2}).materialize();
  // Oracle: explicit weighted squared distance with weight 2 on column 1.
  double w = 0, b = 0;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j) {
      const Eigen::RowVector3d diff = x.row(i) - x.row(j);
      const double d = diff(0) * diff(0) + 2 * diff(1) * diff(1) + diff(2) * diff(2);
      (a[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(j)] ? w : b) += d;
      EXPECT_NEAR((dup.row(i) - dup.row(j)).squaredNorm(), d, 1e-12);
    }
  EXPECT_NEAR(kappa(dup, a, 3), w / b, 1e-12);
}

TEST(FeatureView, RejectsOutOfRange) {
  DataMatrix data(Matrix::Zero(3, 2));
  EXPECT_THROW(FeatureView(data, {0, 2}), Error);
  EXPECT_THROW(FeatureView(data, {}), Error);
}

TEST(KMeans, SeparatedCloudsRecoveredForAnySeed) {
  Rng rng(3);
  Matrix x = gaussian(200, 2, rng);
  for (int i = 0; i < 200; ++i) x.row(i).array() += i < 100 ? 10 : -10;
  std::vector<int> truth(200);
  for (int i = 0; i < 200; ++i) truth[static_cast<std::size_t>(i)] = i < 100 ? 0 : 1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = kmeans(x, 2, seed);
    EXPECT_EQ(rho_c(LabelVector(p.assignments, 2), LabelVector(truth, 2)), 1.0);
  }
}

TEST(KMeans, KEqualsNGivesSingletons) {
  Matrix x = column({1, 5, 2, 8, 3});
  auto p = kmeans(x, 5, 1);
  EXPECT_EQ(std::set<int>(p.assignments.begin(), p.assignments.end()).size(), 5u);
  EXPECT_EQ(p.inertia, 0);
}

TEST(KMeans, TooFewDistinctPointsIsInfeasible) {
  Matrix x = column({1, 1, 2, 2, 1});
  try {
    kmeans(x, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible_k);
  }
  EXPECT_NO_THROW(kmeans(x, 2, 0));
}

TEST(KMeans, MixtureAccuracyNearBayes) {
  Rng rng(21);
  Matrix x = gaussian(5000, 5, rng);
  std::vector<int> truth(5000);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 5000; ++i) {
    truth[static_cast<std::size_t>(i)] = coin(rng);
    x(i, 0) += truth[static_cast<std::size_t>(i)] ? 3 : -3;
  }
  auto p = kmeans(x, 2, 5);
  EXPECT_GE(rho_c(LabelVector(p.assignments, 2), LabelVector(truth, 2)), 0.95);
}

TEST(KMeans, InertiaNonIncreasingAndClustersNonEmpty) {
  Rng rng(5);
  for (int inst = 0; inst < 20; ++inst) {
    Matrix x = gaussian(300, 4, rng);
    std::vector<double> trace;
    auto p = kmeans(x, 6, static_cast<std::uint64_t>(inst), {}, &trace);
    ASSERT_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] * (1 + 1e-12));
    std::vector<int> size(6, 0);
    for (int c : p.assignments) ++size[static_cast<std::size_t>(c)];
    for (int s : size) EXPECT_GT(s, 0);
    // Each point sits at a nearest center.
    for (int i = 0; i < 300; ++i) {
      const double own = (x.row(i) - p.centers.row(p.assignments[static_cast<std::size_t>(i)])).squaredNorm();
      const double best = (p.centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff();
      EXPECT_LE(own, best + 1e-9);
    }
  }
}

TEST(KMeans, Deterministic) {
  Rng rng(8);
  Matrix x = gaussian(500, 3, rng);
  auto a = kmeans(x, 4, 77), b = kmeans(x, 4, 77);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(Kappa, NoiseFeatureRaisesKappa) {
  // Small-scale version of the population property exercised by the acceptance suite.
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    Matrix x = gaussian(20000, 2, rng);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 20000; ++i) x(i, 0) += coin(rng) ? 2 : -2;
    DataMatrix data(x);
    FeatureView inf(data, {0}), both(data, {0, 1});
    const double k1 = kappa(inf, kmeans(inf, 2, seed)), k2 = kappa(both, kmeans(both, 2, seed));
    EXPECT_LT(k1, k2) << "seed " << seed;
  }
}
