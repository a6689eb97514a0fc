#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "cforest/profile.hpp"

using namespace cforest;

TEST(Profile, ConstantColumnIsInfinite) {
  Matrix x(6, 2);
  x << 1, 0, 1, 1, 1, 5, 1, 6, 1, 0.5, 1, 5.5;
  const auto s = feature_profile(DataMatrix(x), 2, 1);
  EXPECT_EQ(s[0], kInfiniteKappa);
  EXPECT_TRUE(std::isfinite(s[1]));
  EXPECT_GT(s[1], 0);
}

TEST(Profile, TwoPointClustersScoreZero) {
  Matrix x(8, 1);
  x << -10, -10, -10, -10, 10, 10, 10, 10;
  EXPECT_EQ(feature_profile(DataMatrix(x), 2, 3)[0], 0.0);
}

TEST(Profile, CategoricalBelowKBorrowsADonor) {
  Matrix x(6, 3);
  x << 0, 0, 0,
       1, 0, 0.1,
       9, 0, 0.2,
       10, 0, 5,
       11, 0, 5.1,
       0.5, 0, 5.2;
  DataMatrix d(x, {FeatureKind::numeric(), FeatureKind::categorical(1), FeatureKind::numeric()});
  const auto s = feature_profile(d, 2, 7);
  EXPECT_TRUE(s[1] == s[0] || s[1] == s[2]);
  // Same draw every time.
  EXPECT_EQ(feature_profile(d, 2, 7), s);
}

TEST(Profile, NoDonorIsDegenerate) {
  Matrix x(4, 2);
  x << 0, 1, 0, 1, 0, 1, 0, 1;
  DataMatrix d(x, {FeatureKind::categorical(1), FeatureKind::numeric()});
  try {
    feature_profile(d, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_profile);
  }
}

TEST(Profile, InformativeFeaturesAreStrongerOnG2) {
  const auto d = sample_gaussian_mixture(preset_g2(1), 2000, 4);
  const auto s = feature_profile(d.data, 2, 5);
  ASSERT_EQ(s.size(), 120u);
  for (double v : s) EXPECT_GE(v, 0);
  double noise = 0, informative = 0;
  for (int j = 0; j < 100; ++j) noise += s[static_cast<std::size_t>(j)];
  for (int j = 100; j < 120; ++j) informative += s[static_cast<std::size_t>(j)];
  EXPECT_GT(noise / 100, informative / 20);

}

TEST(Profile, StrengthImprovesWithSeparation) {
  // One noise column and columns with half-separation 1, 2, 3.
  const int n = 5000;
  Rng rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Matrix x(n, 4);
  for (int i = 0; i < n; ++i) {
    const double side = coin(rng) ? 1 : -1;
    for (int j = 0; j < 4; ++j) x(i, j) = side * j + normal(rng);
  }
  const auto s = feature_profile(DataMatrix(x), 2, 2);
  for (int j = 1; j < 4; ++j) EXPECT_LT(s[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j - 1)]) << j;
}

TEST(Profile, CsvFormat) {
  std::ostringstream out;
  write_profile_csv(out, {0.5, kInfiniteKappa});
  EXPECT_EQ(out.str(), "feature_index,strength\n0,0.5\n1,inf\n");
}

TEST(Profile, Validation) {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  EXPECT_THROW(feature_profile(DataMatrix(x), 1, 0), Error);
}
