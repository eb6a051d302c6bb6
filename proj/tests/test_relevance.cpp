#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "relevo/io.hpp"
#include "relevo/relevance.hpp"

namespace relevo {
namespace {

RelevanceFunction who() { return build_relevance({{50, 0, 0.0}, {150, 1, 0.0}}); }

TEST(BuildRelevance, WhoControlPoints) {
  const auto f = who();
  EXPECT_EQ(f(50), 0.0);
  EXPECT_EQ(f(150), 1.0);
  EXPECT_EQ(f(40), 0.0);
  EXPECT_EQ(f(200), 1.0);
  EXPECT_NEAR(f(100), 0.5, 1e-12);
}

TEST(BuildRelevance, TwoKnotRampMatchesClosedForm) {
  // Dense-grid check against 3s^2 - 2s^3, which is what the Hermite basis
  // reduces to with zero end slopes.
  const auto f = who();
  for (int i = 0; i <= 10000; ++i) {
    const double y = 30.0 + 140.0 * i / 10000.0;
    ASSERT_NEAR(f(y), oracle::ramp(y, 50, 150), 1e-12) << y;
  }
}

TEST(BuildRelevance, SortsInputAndRejectsDuplicates) {
  const auto f = build_relevance({{150, 1, 0.0}, {50, 0, 0.0}});
  EXPECT_EQ(f.points().front().y, 50.0);
  try {
    build_relevance({{50, 0, 0.0}, {50, 1, 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::duplicate_control_point);
    EXPECT_NE(std::string(e.what()).find("duplicate control point"), std::string::npos);
  }
  EXPECT_THROW(build_relevance({{50, 0, 0.0}}), Error);
  EXPECT_THROW(build_relevance({{50, 0, 0.0}, {60, 1.5, 0.0}}), Error);
  EXPECT_THROW(who()(std::nan("")), Error);
}

TEST(BuildRelevance, SteepUserSlopesAreLimited) {
  // A slope of 1 on a unit-rise interval of width 100 would overshoot badly.
  const auto f = build_relevance({{0, 0, 1.0}, {100, 1, 1.0}});
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = f(i / 10.0);
    ASSERT_GE(v, prev - 1e-15);
    ASSERT_LE(v, 1.0);
    prev = v;
  }
  // Slopes with the wrong sign are zeroed.
  const auto g = build_relevance({{0, 0, -0.5}, {10, 1, 0.0}});
  EXPECT_EQ(g.slopes()[0], 0.0);
}

TEST(BuildRelevance, UnpinnedSlopesUseFritschCarlson) {
  const auto f = build_relevance({{0, 0, std::nullopt}, {1, 0.2, std::nullopt}, {2, 1, std::nullopt}});
  EXPECT_GT(f.slopes()[1], 0.0);
  for (int i = 0; i <= 2000; ++i) {
    const double y = i / 1000.0;
    ASSERT_LE(f(y), f(y + 1e-3) + 1e-15);
  }
}

std::vector<ControlPoint> random_points(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 7);
  std::uniform_real_distribution<double> gap(0.5, 20.0);
  std::uniform_real_distribution<double> level(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  std::vector<ControlPoint> pts;
  double y = -30.0;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    y += gap(rng);
    ControlPoint p{y, level(rng), 0.0};
    switch (kind(rng)) {
      case 0: p.phi = 0.0; break;
      case 1: p.phi = 1.0; break;
      default: break;
    }
    const int slope = kind(rng);
    if (slope == 0) p.dphi.reset();
    if (slope == 1) p.dphi = (level(rng) - 0.5) * 4.0;
    pts.push_back(p);
  }
  return pts;
}

TEST(RelevanceProperties, KnotExactBoundedMonotoneContinuous) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const auto pts = random_points(rng);
    const RelevanceFunction f(pts);
    const auto knots = f.points();
    for (const auto& k : knots) {
      ASSERT_EQ(f(k.y), k.phi);
      ASSERT_NEAR(f(k.y + 1e-9), k.phi, 1e-6);
      ASSERT_NEAR(f(k.y - 1e-9), k.phi, 1e-6);
    }
    const double lo = knots.front().y;
    const double hi = knots.back().y;
    std::uniform_real_distribution<double> anywhere(lo - (hi - lo), hi + (hi - lo));
    for (int i = 0; i < 500; ++i) {
      const double v = f(anywhere(rng));
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double dir = knots[k + 1].phi >= knots[k].phi ? 1.0 : -1.0;
      double prev = f(knots[k].y);
      for (int i = 1; i <= 200; ++i) {
        const double y = knots[k].y + (knots[k + 1].y - knots[k].y) * i / 200.0;
        const double v = f(y);
        ASSERT_GE(dir * (v - prev), -1e-14) << "interval " << k;
        prev = v;
      }
    }
  }
}

TEST(AutoControlPoints, RightTailFromSkewedSample) {
  // [0,1,2,3,10]: median 2, medcouple 0, fences -2 and 6; only 10 is beyond.
  const auto pts = auto_control_points(Sample({0, 1, 2, 3, 10}));
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0], (ControlPoint{2.0, 0.0, 0.0}));
  EXPECT_EQ(pts[1], (ControlPoint{6.0, 1.0, 0.0}));
}

TEST(AutoControlPoints, TwoTailsForHeavySymmetricSample) {
  const auto pts = auto_control_points(Sample({-40, 1, 2, 3, 4, 5, 6, 7, 8, 9, 50}));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].phi, 1.0);
  EXPECT_EQ(pts[1].phi, 0.0);
  EXPECT_EQ(pts[1].y, 5.0);
  EXPECT_EQ(pts[2].phi, 1.0);
  EXPECT_LT(pts[0].y, pts[1].y);
  EXPECT_LT(pts[1].y, pts[2].y);
}

TEST(AutoControlPoints, LeftTail) {
  const auto pts = auto_control_points(Sample({-10, 7, 8, 9, 10}));
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].phi, 1.0);
  EXPECT_EQ(pts[1], (ControlPoint{8.0, 0.0, 0.0}));
}

TEST(AutoControlPoints, ConfigurableCentre) {
  const auto pts = auto_control_points(Sample({0, 1, 2, 3, 10}), {0.25});
  EXPECT_EQ(pts[0].y, 1.0);
}

TEST(AutoControlPoints, NoRareRegion) {
  try {
    auto_control_points(Sample({1, 2, 3, 4, 5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_rare_region);
    EXPECT_EQ(std::string(e.what()), "no rare region detected");
  }
  EXPECT_THROW(auto_control_points(Sample({3, 3, 3, 3})), Error);
}

TEST(Anchors, RightTail) {
  const auto a = anchors_of(who());
  EXPECT_EQ(a.pi_min, 50.0);
  EXPECT_EQ(a.pi_max, 150.0);
  EXPECT_EQ(a.tail, Tail::right);
}

TEST(Anchors, LeftTail) {
  const auto a = anchors_of(build_relevance({{-5, 1, 0.0}, {0, 0, 0.0}}));
  EXPECT_EQ(a.pi_max, -5.0);
  EXPECT_EQ(a.pi_min, 0.0);
  EXPECT_EQ(a.tail, Tail::left);
}

TEST(Anchors, FirstMaximum) {
  const auto a = anchors_of(build_relevance({{0, 0, 0.0}, {10, 1, 0.0}, {20, 1, 0.0}}));
  EXPECT_EQ(a.pi_max, 10.0);
  EXPECT_EQ(a.pi_min, 0.0);
}

TEST(Anchors, BaseIsLastZeroBeforeThePeak) {
  const auto a = anchors_of(build_relevance({{0, 0, 0.0}, {5, 0, 0.0}, {8, 0.4, 0.0}, {10, 1, 0.0}}));
  EXPECT_EQ(a.pi_min, 5.0);
  EXPECT_EQ(a.pi_max, 10.0);
}

TEST(Anchors, TwoTailsNeedAChoice) {
  const auto f = build_relevance({{-2, 1, 0.0}, {2, 0, 0.0}, {6, 1, 0.0}});
  EXPECT_THROW(anchors_of(f), Error);
  const auto right = anchors_of(f, Tail::right);
  EXPECT_EQ(right.pi_min, 2.0);
  EXPECT_EQ(right.pi_max, 6.0);
  const auto left = anchors_of(f, Tail::left);
  EXPECT_EQ(left.pi_min, 2.0);
  EXPECT_EQ(left.pi_max, -2.0);
}

TEST(Anchors, Undefined) {
  try {
    anchors_of(build_relevance({{0, 0, 0.0}, {10, 0.8, 0.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::anchors_undefined);
  }
  EXPECT_THROW(anchors_of(build_relevance({{0, 1, 0.0}, {10, 1, 0.0}})), Error);
  EXPECT_THROW(anchors_of(who(), Tail::left), Error);
}

TEST(RelevanceJson, RoundTripEvaluatesIdentically) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const RelevanceFunction f(random_points(rng));
    const std::string text = relevance_to_json(f).dump();
    const RelevanceFunction g = relevance_from_json(Json::parse(text));
    ASSERT_EQ(std::vector<ControlPoint>(f.points().begin(), f.points().end()),
              std::vector<ControlPoint>(g.points().begin(), g.points().end()));
    std::uniform_real_distribution<double> y(-40.0, 150.0);
    for (int i = 0; i < 1000; ++i) {
      const double v = y(rng);
      ASSERT_NEAR(f(v), g(v), 1e-12);
    }
  }
}

}  // namespace
}  // namespace relevo
