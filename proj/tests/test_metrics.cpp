#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "relevo/metrics.hpp"

namespace relevo {
namespace {

// phi(1) = 0, phi(2) = 0.5, phi(10) = 1 with a piecewise-linear-ish profile
// through the three knots (slopes pinned to 0 keep the knot values exact).
RelevanceFunction three_level() { return build_relevance({{1, 0.0, 0.0}, {2, 0.5, 0.0}, {10, 1.0, 0.0}}); }

const std::vector<double> kTruth{1, 2, 10};
const std::vector<double> kPred{1.5, 3, 8};

TEST(Ser, ThreePointFixture) {
  const auto f = three_level();
  // Squared errors 0.25, 1, 4.
  EXPECT_EQ(ser(0.0, kPred, kTruth, f), 5.25);
  EXPECT_EQ(ser(0.25, kPred, kTruth, f), 5.0);
  EXPECT_EQ(ser(0.75, kPred, kTruth, f), 4.0);
  const std::vector<double> phi{0.0, 0.5, 1.0};
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) EXPECT_EQ(ser(t, kPred, kTruth, f), oracle::ser(t, kPred, kTruth, phi));
}

TEST(Ser, EmptySubsetAndErrors) {
  const auto f = build_relevance({{0, 0, 0.0}, {100, 1, 0.0}});
  EXPECT_EQ(ser(1.0, std::vector<double>{3, 4}, std::vector<double>{1, 2}, f), 0.0);
  EXPECT_THROW(ser(0.0, std::vector<double>{1}, std::vector<double>{1, 2}, f), Error);
  EXPECT_THROW(ser(1.5, std::vector<double>{1}, std::vector<double>{1}, f), Error);
}

TEST(Sera, UniformRelevanceIsSse) {
  const auto curve = sera(kPred, kTruth, uniform_relevance());
  EXPECT_NEAR(curve.area, 5.25, 1e-12);
  EXPECT_EQ(curve.t_grid.front(), 0.0);
  EXPECT_EQ(curve.t_grid.back(), 1.0);
  EXPECT_EQ(curve.t_grid.size(), 1001u);
}

TEST(Sera, ThreePointExactAndTrapezoid) {
  const auto f = three_level();
  EXPECT_NEAR(sera_exact(kPred, kTruth, f), 4.5, 1e-12);
  const double trap = sera(kPred, kTruth, f).area;
  EXPECT_LT(std::abs(trap - 4.5) / 4.5, 0.006);
  // With relevance values on grid nodes the trapezoid adds half a step of
  // every point whose relevance is below 1: 0.0005 * (0.25 + 1).
  EXPECT_NEAR(trap, 4.5 + 0.0005 * 1.25, 1e-9);
}

TEST(Sera, ZeroErrorIsZero) {
  EXPECT_EQ(sera(kTruth, kTruth, three_level()).area, 0.0);
}

TEST(Sera, Errors) {
  EXPECT_THROW(sera(std::vector<double>{1, 2}, kTruth, three_level()), Error);
  EXPECT_THROW(sera(std::vector<double>{1, 2, std::nan("")}, kTruth, three_level()), Error);
  EXPECT_THROW(sera(kPred, kTruth, three_level(), 0.0), Error);
  EXPECT_THROW(sera(kPred, kTruth, three_level(), 0.6), Error);
}

TEST(Sera, UnevenStepEndsAtOne) {
  const auto curve = sera(kPred, kTruth, three_level(), 0.3);
  ASSERT_EQ(curve.t_grid.size(), 5u);
  EXPECT_EQ(curve.t_grid.back(), 1.0);
  EXPECT_NEAR(curve.t_grid[3], 0.9, 1e-15);
}

struct RandomCase {
  std::vector<double> truth;
  std::vector<double> pred;
};

RandomCase random_case(std::mt19937_64& rng, std::size_t n) {
  std::lognormal_distribution<double> target(3.0, 0.6);
  std::normal_distribution<double> noise(0.0, 5.0);
  RandomCase c;
  for (std::size_t i = 0; i < n; ++i) {
    c.truth.push_back(target(rng));
    c.pred.push_back(c.truth.back() + noise(rng));
  }
  return c;
}

TEST(SeraProperties, CurvesAreNonIncreasingAndBoundedByFirstValue) {
  std::mt19937_64 rng(29);
  const auto f = build_relevance({{20, 0, 0.0}, {45, 1, 0.0}});
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = random_case(rng, 150);
    const auto curve = sera(c.pred, c.truth, f);
    for (std::size_t j = 1; j < curve.ser_values.size(); ++j) ASSERT_LE(curve.ser_values[j], curve.ser_values[j - 1]);
    ASSERT_GE(curve.area, 0.0);
    ASSERT_LE(curve.area, curve.ser_values.front());
  }
}

TEST(SeraProperties, TrapezoidMatchesBruteForceEnumeration) {
  std::mt19937_64 rng(31);
  const auto f = build_relevance({{20, 0, 0.0}, {45, 1, 0.0}});
  for (int rep = 0; rep < 10; ++rep) {
    const auto c = random_case(rng, 60);
    std::vector<double> phi;
    for (double y : c.truth) phi.push_back(oracle::ramp(y, 20, 45));
    const double brute = oracle::sera_trapezoid(c.pred, c.truth, phi, 100);
    ASSERT_NEAR(sera(c.pred, c.truth, f, 0.01).area, brute, 1e-9 * std::max(1.0, brute));
    ASSERT_NEAR(sera_exact(c.pred, c.truth, f), oracle::sera_exact(c.pred, c.truth, phi), 1e-9 * brute);
  }
}

TEST(SeraProperties, UniformDegenerationOnRandomSets) {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 100; ++rep) {
    const auto c = random_case(rng, 200);
    double sse = 0.0;
    for (std::size_t i = 0; i < c.truth.size(); ++i) sse += (c.pred[i] - c.truth[i]) * (c.pred[i] - c.truth[i]);
    ASSERT_LE(std::abs(sera(c.pred, c.truth, uniform_relevance()).area - sse), 1e-9 * std::max(1.0, sse));
  }
}

TEST(SeraProperties, GridRefinementIsStable) {
  std::mt19937_64 rng(41);
  const auto f = build_relevance({{20, 0, 0.0}, {45, 1, 0.0}});
  for (int rep = 0; rep < 30; ++rep) {
    const auto c = random_case(rng, 200);
    const double coarse = sera(c.pred, c.truth, f, 1e-3).area;
    const double fine = sera(c.pred, c.truth, f, 5e-4).area;
    ASSERT_LE(std::abs(coarse - fine), 0.005 * fine);
  }
}

TEST(SeraProperties, ScaleCovariance) {
  std::mt19937_64 rng(43);
  const auto f = build_relevance({{20, 0, 0.0}, {45, 1, 0.0}});
  const auto c = random_case(rng, 100);
  std::vector<double> scaled(c.pred.size());
  for (std::size_t i = 0; i < c.pred.size(); ++i) scaled[i] = c.truth[i] + 3.0 * (c.pred[i] - c.truth[i]);
  const double base = sera(c.pred, c.truth, f).area;
  EXPECT_NEAR(sera(scaled, c.truth, f).area, 9.0 * base, 1e-9 * base);
}

TEST(SeraAll, OrderedByModelIdAndMatchesSingleModel) {
  PredictionSet preds(kTruth);
  preds.add_model("B", {1.0, 2.0, 11.0});
  preds.add_model("A", kPred);
  const auto all = sera_all(preds, three_level());
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all.begin()->first, "A");
  EXPECT_EQ(all.at("A").area, sera(kPred, kTruth, three_level()).area);
  EXPECT_LT(all.at("B").area, all.at("A").area);
}

TEST(SeraAll, SingleModel) {
  PredictionSet preds(kTruth);
  preds.add_model("only", kPred);
  const auto all = sera_all(preds, three_level());
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all.at("only").area, sera(kPred, kTruth, three_level()).area);
}

TEST(PredictionSet, Validation) {
  PredictionSet preds(kTruth);
  EXPECT_THROW(preds.add_model("A", {1.0}), Error);
  preds.add_model("A", kPred);
  EXPECT_THROW(preds.add_model("A", kPred), Error);
  EXPECT_THROW(preds.add_model("C", {1.0, INFINITY, 2.0}), Error);
  EXPECT_THROW(PredictionSet(std::vector<double>{}), Error);
}

}  // namespace
}  // namespace relevo
