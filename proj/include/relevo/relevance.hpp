#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relevo/error.hpp"
#include "relevo/stats.hpp"

namespace relevo {

/// Anchor of a relevance function. A missing derivative means "let the
/// interpolant choose" (Fritsch-Carlson estimate); the usual choice is 0.
struct ControlPoint {
  double y = 0.0;
  double phi = 0.0;
  std::optional<double> dphi = 0.0;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
};

enum class Tail { right, left };

inline std::string_view to_string(Tail tail) { return tail == Tail::right ? "right" : "left"; }

inline Tail parse_tail(std::string_view text) {
  if (text == "right") return Tail::right;
  if (text == "left") return Tail::left;
  throw Error(ErrorCode::invalid_argument, "unknown tail '" + std::string(text) + "' (expected right or left)");
}

/// Peak (first phi = 1) and base (last phi = 0 before the slope) locations.
/// For a left tail pi_max < pi_min.
struct RelevanceAnchors {
  double pi_max = 0.0;
  double pi_min = 0.0;
  Tail tail = Tail::right;
};

/// Monotone piecewise cubic Hermite interpolant through control points, with
/// constant extension beyond the outer knots and output clamped to [0, 1].
/// Immutable once built.
class RelevanceFunction {
 public:
  explicit RelevanceFunction(std::vector<ControlPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2)
      throw Error(ErrorCode::invalid_argument, "a relevance function needs at least 2 control points");
    for (const auto& p : points_) {
      if (!std::isfinite(p.y) || !std::isfinite(p.phi) || (p.dphi && !std::isfinite(*p.dphi)))
        throw Error(ErrorCode::non_finite, "non-finite control point");
      if (p.phi < 0.0 || p.phi > 1.0)
        throw Error(ErrorCode::invalid_argument,
                    "control point relevance must lie in [0, 1] (got " + std::to_string(p.phi) + ")");
    }
    std::stable_sort(points_.begin(), points_.end(),
                     [](const ControlPoint& a, const ControlPoint& b) { return a.y < b.y; });
    for (std::size_t k = 1; k < points_.size(); ++k) {
      if (points_[k].y == points_[k - 1].y)
        throw Error(ErrorCode::duplicate_control_point,
                    "duplicate control point at y = " + std::to_string(points_[k].y));
    }
    slopes_ = limited_slopes(points_);
  }

  std::span<const ControlPoint> points() const noexcept { return points_; }

  /// Knot derivatives actually used after monotonicity limiting.
  std::span<const double> slopes() const noexcept { return slopes_; }

  double operator()(double y) const {
    if (!std::isfinite(y)) throw Error(ErrorCode::non_finite, "relevance evaluated at a non-finite value");
    if (y <= points_.front().y) return points_.front().phi;
    if (y >= points_.back().y) return points_.back().phi;
    const auto it = std::upper_bound(points_.begin(), points_.end(), y,
                                     [](double v, const ControlPoint& p) { return v < p.y; });
    const auto k = static_cast<std::size_t>(it - points_.begin()) - 1;
    const ControlPoint& a = points_[k];
    const ControlPoint& b = points_[k + 1];
    const double h = b.y - a.y;
    const double t = (y - a.y) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    const double v = h00 * a.phi + h10 * h * slopes_[k] + h01 * b.phi + h11 * h * slopes_[k + 1];
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  // Fritsch-Carlson: start from the pinned derivative (or a three-point
  // estimate), then shrink per interval until the cubic is monotone there.
  // Shrinking a shared knot derivative never breaks an earlier interval.
  static std::vector<double> limited_slopes(const std::vector<ControlPoint>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> secant(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
      secant[k] = (pts[k + 1].phi - pts[k].phi) / (pts[k + 1].y - pts[k].y);

    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (pts[k].dphi) {
        d[k] = *pts[k].dphi;
      } else if (k == 0) {
        d[k] = secant.front();
      } else if (k == n - 1) {
        d[k] = secant.back();
      } else if (secant[k - 1] * secant[k] <= 0.0) {
        d[k] = 0.0;
      } else {
        d[k] = 0.5 * (secant[k - 1] + secant[k]);
      }
    }

    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double delta = secant[k];
      if (delta == 0.0) {
        d[k] = 0.0;
        d[k + 1] = 0.0;
        continue;
      }
      if (d[k] * delta < 0.0) d[k] = 0.0;
      if (d[k + 1] * delta < 0.0) d[k + 1] = 0.0;
      const double alpha = d[k] / delta;
      const double beta = d[k + 1] / delta;
      const double r2 = alpha * alpha + beta * beta;
      if (r2 > 9.0) {
        const double tau = 3.0 / std::sqrt(r2);
        d[k] = tau * alpha * delta;
        d[k + 1] = tau * beta * delta;
      }
    }
    return d;
  }

  std::vector<ControlPoint> points_;
  std::vector<double> slopes_;
};

inline RelevanceFunction build_relevance(std::vector<ControlPoint> points) {
  return RelevanceFunction(std::move(points));
}

/// phi = 1 everywhere; SERA under it is the plain sum of squared errors.
inline RelevanceFunction uniform_relevance() {
  return RelevanceFunction({{0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}});
}

struct AutoOptions {
  /// Quantile of the sample where the phi = 0 anchor sits.
  double center_quantile = 0.5;
};

/// Control points derived from the adjusted boxplot: phi = 0 at the centre,
/// phi = 1 at each fence that has at least one sample value beyond it.
inline std::vector<ControlPoint> auto_control_points(const Sample& sample, const AutoOptions& options = {}) {
  const Fences fences = adjusted_fences(sample);
  const double center = quantile(sample, options.center_quantile);
  const bool low_tail = sample.min() < fences.lower;
  const bool high_tail = sample.max() > fences.upper;
  if (!low_tail && !high_tail)
    throw Error(ErrorCode::no_rare_region, "no rare region detected");

  std::vector<ControlPoint> points;
  if (low_tail) {
    if (!(fences.lower < center))
      throw Error(ErrorCode::degenerate_sample, "degenerate sample: lower fence does not lie below the centre");
    points.push_back({fences.lower, 1.0, 0.0});
  }
  points.push_back({center, 0.0, 0.0});
  if (high_tail) {
    if (!(fences.upper > center))
      throw Error(ErrorCode::degenerate_sample, "degenerate sample: upper fence does not lie above the centre");
    points.push_back({fences.upper, 1.0, 0.0});
  }
  return points;
}

namespace detail {

inline std::optional<RelevanceAnchors> right_anchors(std::span<const ControlPoint> pts) {
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].phi != 1.0) continue;
    for (std::size_t j = k; j-- > 0;) {
      if (pts[j].phi == 0.0) return RelevanceAnchors{pts[k].y, pts[j].y, Tail::right};
    }
  }
  return std::nullopt;
}

inline std::optional<RelevanceAnchors> left_anchors(std::span<const ControlPoint> pts) {
  for (std::size_t k = pts.size(); k-- > 0;) {
    if (pts[k].phi != 1.0) continue;
    for (std::size_t j = k + 1; j < pts.size(); ++j) {
      if (pts[j].phi == 0.0) return RelevanceAnchors{pts[k].y, pts[j].y, Tail::left};
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Anchors of the requested tail, or of the only tail present when none is
/// requested. A function with both tails needs an explicit choice.
inline RelevanceAnchors anchors_of(const RelevanceFunction& f, std::optional<Tail> tail = std::nullopt) {
  const auto right = detail::right_anchors(f.points());
  const auto left = detail::left_anchors(f.points());
  if (tail == Tail::right) {
    if (!right) throw Error(ErrorCode::anchors_undefined, "anchors undefined: no phi=0 knot below a phi=1 knot");
    return *right;
  }
  if (tail == Tail::left) {
    if (!left) throw Error(ErrorCode::anchors_undefined, "anchors undefined: no phi=0 knot above a phi=1 knot");
    return *left;
  }
  if (right && left)
    throw Error(ErrorCode::anchors_undefined, "anchors ambiguous: relevance has two tails, choose one");
  if (right) return *right;
  if (left) return *left;
  throw Error(ErrorCode::anchors_undefined, "anchors undefined: relevance must reach both 0 and 1 at control points");
}

}  // namespace relevo
