#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "relevo/io.hpp"
#include "relevo/stats.hpp"

namespace relevo {
namespace {

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile(Sample({1, 2, 3, 4, 5}), 0.5), 3.0);
  EXPECT_EQ(quantile(Sample({1, 2, 3, 4}), 0.5), 2.5);
  EXPECT_EQ(quantile(Sample({10, 20, 30, 40, 50}), 0.25), 20.0);
  const Sample s({7, -1, 3});
  EXPECT_EQ(quantile(s, 0.0), -1.0);
  EXPECT_EQ(quantile(s, 1.0), 7.0);
}

TEST(Quantile, Errors) {
  EXPECT_THROW(Sample(std::vector<double>{}), Error);
  EXPECT_THROW(quantile(std::span<const double>{}, 0.5), Error);
  EXPECT_THROW(quantile(Sample({1, 2}), 1.5), Error);
  EXPECT_THROW(Sample({1.0, std::nan("")}), Error);
  try {
    Sample(std::vector<double>{});
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "empty sample");
  }
}

TEST(Quantile, MonotoneInLevel) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Sample s(oracle::random_sample(rng, 3 + rep));
    double prev = quantile(s, 0.0);
    for (int k = 1; k <= 200; ++k) {
      const double q = quantile(s, k / 200.0);
      ASSERT_GE(q, prev);
      prev = q;
    }
  }
}

TEST(Medcouple, SymmetricSamplesAreZero) {
  EXPECT_EQ(medcouple(Sample({1, 2, 3})), 0.0);
  EXPECT_EQ(medcouple(Sample({1, 2, 3, 4, 5})), 0.0);
}

TEST(Medcouple, PinnedSkewedSample) {
  // Kernel values for [0,1,2,3,10] (median 2): -1, -1, -1/3, 0, 0, 0.6, 7/9,
  // 1, 1 -> median 0.
  EXPECT_EQ(oracle::medcouple({0, 1, 2, 3, 10}), 0.0);
  EXPECT_EQ(medcouple(Sample({0, 1, 2, 3, 10})), 0.0);
  // Even length, median 2.5 is not a sample value; the kernel values are
  // symmetric around 0 here.
  EXPECT_EQ(oracle::medcouple({0, 1, 2, 3, 4, 20}), 0.0);
  EXPECT_EQ(medcouple(Sample({0, 1, 2, 3, 4, 20})), 0.0);
  // 16 kernel values, the two middle ones are 1/3 and 1/2.
  EXPECT_DOUBLE_EQ(oracle::medcouple({0, 1, 2, 3, 5, 9, 30}), (1.0 / 3.0 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(medcouple(Sample({0, 1, 2, 3, 5, 9, 30})), 0.41666666666666663);
}

TEST(Medcouple, MedianTiesFollowSignConvention) {
  // [5,5,5,6]: median 5 with three ties. The 3x3 tie block gives
  // {-1,-1,-1,0,0,0,1,1,1} and the pairs (5, 6) add +1 three times, so the
  // two middle values of the 12 are 0 and 1.
  const double expected = oracle::medcouple({5, 5, 5, 6});
  EXPECT_EQ(expected, 0.5);
  EXPECT_EQ(medcouple(Sample({5, 5, 5, 6})), expected);
  EXPECT_EQ(medcouple(Sample({4, 5, 5, 5})), -expected);
}

TEST(Medcouple, DegenerateSamples) {
  EXPECT_THROW(medcouple(Sample({4, 4, 4})), Error);
  EXPECT_THROW(medcouple(Sample({1, 2})), Error);
  try {
    medcouple(Sample({4, 4, 4, 4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_sample);
  }
}

TEST(Medcouple, MatchesBruteForceAndIsAntisymmetric) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(3, 50);
  int checked = 0;
  for (int rep = 0; rep < 300; ++rep) {
    auto x = oracle::random_sample(rng, static_cast<std::size_t>(size(rng)));
    if (*std::min_element(x.begin(), x.end()) == *std::max_element(x.begin(), x.end())) continue;
    const double mc = medcouple(Sample(x));
    ASSERT_EQ(mc, oracle::medcouple(x)) << "rep " << rep;
    ASSERT_GE(mc, -1.0);
    ASSERT_LE(mc, 1.0);
    std::vector<double> mirrored(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mirrored[i] = -x[i];
    ASSERT_EQ(medcouple(Sample(mirrored)), -mc);
    // Mirroring about a non-zero constant is exact up to rounding.
    for (std::size_t i = 0; i < x.size(); ++i) mirrored[i] = 17.0 - x[i];
    ASSERT_NEAR(medcouple(Sample(mirrored)), -mc, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(Medcouple, LargeSampleAgreesWithReferenceLibraryValue) {
  // statsmodels.stats.stattools.medcouple on the bundled dataset's target.
  const auto data = read_dataset_csv(std::string(RELEVO_DATA) + "/synthetic_skewed.csv", "y");
  EXPECT_NEAR(medcouple(Sample(data.target)), 0.3221372243364252, 1e-12);
  EXPECT_EQ(medcouple(Sample(data.target)), oracle::medcouple(data.target));
}

TEST(AdjustedFences, SymmetricCollapsesToClassicBoxplot) {
  // q1 = 2, q3 = 4, medcouple 0.
  const Fences f = adjusted_fences(Sample({1, 2, 3, 4, 5}));
  EXPECT_EQ(f.medcouple, 0.0);
  EXPECT_EQ(f.q1, 2.0);
  EXPECT_EQ(f.q3, 4.0);
  EXPECT_EQ(f.lower, -1.0);
  EXPECT_EQ(f.upper, 7.0);
}

TEST(AdjustedFences, PinnedSkewedSample) {
  const Fences f = adjusted_fences(Sample({0, 1, 2, 3, 10}));
  EXPECT_EQ(f.q1, 1.0);
  EXPECT_EQ(f.q3, 3.0);
  EXPECT_EQ(f.lower, -2.0);
  EXPECT_EQ(f.upper, 6.0);

  const std::vector<double> x{0, 1, 2, 3, 5, 9, 30};
  const double mc = oracle::medcouple(x);
  const Fences g = adjusted_fences(Sample(x));
  // q1 = 1.5, q3 = 7
  EXPECT_EQ(g.q1, 1.5);
  EXPECT_EQ(g.q3, 7.0);
  EXPECT_DOUBLE_EQ(g.lower, 1.5 - 1.5 * std::exp(-4.0 * mc) * 5.5);
  EXPECT_DOUBLE_EQ(g.upper, 7.0 + 1.5 * std::exp(3.0 * mc) * 5.5);
}

TEST(AdjustedFences, NegativeSkewUsesMirroredExponents) {
  const std::vector<double> x{-30, -9, -5, -3, -2, -1, 0};
  const Fences f = adjusted_fences(Sample(x));
  const double mc = -0.41666666666666663;
  EXPECT_DOUBLE_EQ(f.medcouple, mc);
  EXPECT_DOUBLE_EQ(f.lower, f.q1 - 1.5 * std::exp(-3.0 * mc) * (f.q3 - f.q1));
  EXPECT_DOUBLE_EQ(f.upper, f.q3 + 1.5 * std::exp(4.0 * mc) * (f.q3 - f.q1));
}

TEST(AdjustedFences, OrderedAroundQuartiles) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    auto x = oracle::random_sample(rng, 20);
    if (*std::min_element(x.begin(), x.end()) == *std::max_element(x.begin(), x.end())) continue;
    const Fences f = adjusted_fences(Sample(x));
    ASSERT_LE(f.lower, f.q1);
    ASSERT_LE(f.q1, f.q3);
    ASSERT_LE(f.q3, f.upper);
    if (f.medcouple == 0.0) {
      ASSERT_NEAR(f.lower, f.q1 - 1.5 * (f.q3 - f.q1), 1e-12 * std::max(1.0, std::abs(f.lower)));
    }
  }
}

TEST(Stddev, SampleDenominator) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(stddev(v), std::sqrt(32.0 / 7.0));
  EXPECT_EQ(stddev(std::vector<double>{3.0}), 0.0);
}

}  // namespace
}  // namespace relevo
