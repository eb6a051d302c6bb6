#pragma once

// Robust distribution statistics used to place automatic relevance control
// points: linear-interpolation quantiles, the medcouple and the
// skewness-adjusted boxplot fences built on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relevo/error.hpp"

namespace relevo {

/// Finite, sorted, non-empty sample of target values.
class Sample {
 public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorCode::empty_sample, "empty sample");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]))
        throw Error(ErrorCode::non_finite,
                    "non-finite sample value at position " + std::to_string(i));
    }
    std::sort(values_.begin(), values_.end());
  }

  explicit Sample(std::span<const double> values)
      : Sample(std::vector<double>(values.begin(), values.end())) {}

  std::span<const double> sorted() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }

 private:
  std::vector<double> values_;
};

struct Fences {
  double lower = 0.0;
  double upper = 0.0;
  double medcouple = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Quantile with linear interpolation between order statistics, so that
/// quantile(k / (n - 1)) is the (k + 1)-th smallest value.
inline double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::empty_sample, "empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::invalid_argument, "quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(const Sample& sample, double p) { return quantile(sample.sorted(), p); }

inline double median(const Sample& sample) { return quantile(sample, 0.5); }

inline double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::empty_sample, "empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> values) {
  const double mu = mean(values);
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace detail {

inline double medcouple_kernel(double lo, double hi, double m) {
  return ((hi - m) - (m - lo)) / (hi - lo);
}

// Kernel matrix of the medcouple laid out so that entries are non-decreasing
// along both rows and columns:
//   rows    i: values >= median, ascending
//   columns j: values <= median, ascending
// Values equal to the median appear in both lists (first rows, last columns).
// For two median ties the kernel is sign(u + v - (ties - 1)) with u, v the
// positions inside the tie blocks, which is the usual -1/0/+1 convention.
class KernelMatrix {
 public:
  explicit KernelMatrix(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    m_ = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (double v : sorted) {
      if (v >= m_) upper_.push_back(v);
      if (v <= m_) lower_.push_back(v);
      if (v == m_) ++ties_;
    }
  }

  std::size_t rows() const noexcept { return upper_.size(); }
  std::size_t cols() const noexcept { return lower_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    const double hi = upper_[i];
    const double lo = lower_[j];
    if (hi == lo) {
      const std::size_t v = j - (lower_.size() - ties_);
      const auto s = static_cast<long long>(i + v) - static_cast<long long>(ties_ - 1);
      return static_cast<double>((s > 0) - (s < 0));
    }
    return medcouple_kernel(lo, hi, m_);
  }

 private:
  double m_ = 0.0;
  std::size_t ties_ = 0;
  std::vector<double> upper_;
  std::vector<double> lower_;
};

inline double weighted_median(std::vector<std::pair<double, std::size_t>> values) {
  std::sort(values.begin(), values.end());
  std::size_t total = 0;
  for (const auto& v : values) total += v.second;
  std::size_t acc = 0;
  for (const auto& v : values) {
    acc += v.second;
    if (2 * acc >= total) return v.first;
  }
  return values.back().first;
}

// Rank-th smallest (0-based) kernel value, selected without materialising the
// whole matrix (Johnson & Mizoguchi style pruning of per-row active ranges).
inline double kernel_order_statistic(const KernelMatrix& h, std::size_t rank) {
  const std::size_t p = h.rows();
  const std::size_t q = h.cols();
  // Active columns of row i are [left[i], right[i]).
  std::vector<std::size_t> left(p, 0);
  std::vector<std::size_t> right(p, q);
  std::vector<std::size_t> below(p), below_eq(p);

  auto active = [&] {
    std::size_t total = 0;
    for (std::size_t i = 0; i < p; ++i) total += right[i] - left[i];
    return total;
  };

  std::size_t remaining_count = active();
  while (remaining_count > p) {
    std::vector<std::pair<double, std::size_t>> row_medians;
    for (std::size_t i = 0; i < p; ++i) {
      if (left[i] < right[i]) {
        row_medians.emplace_back(h(i, left[i] + (right[i] - left[i] - 1) / 2), right[i] - left[i]);
      }
    }
    const double pivot = weighted_median(std::move(row_medians));

    // Rows and columns are non-decreasing, so the count of entries below the
    // pivot is a non-increasing staircase in i.
    std::size_t j = q;
    std::size_t n_below = 0;
    for (std::size_t i = 0; i < p; ++i) {
      while (j > 0 && h(i, j - 1) >= pivot) --j;
      below[i] = j;
      n_below += j;
    }
    j = q;
    std::size_t n_below_eq = 0;
    for (std::size_t i = 0; i < p; ++i) {
      while (j > 0 && h(i, j - 1) > pivot) --j;
      below_eq[i] = j;
      n_below_eq += j;
    }

    if (rank < n_below) {
      for (std::size_t i = 0; i < p; ++i) right[i] = std::min(right[i], below[i]);
    } else if (rank >= n_below_eq) {
      for (std::size_t i = 0; i < p; ++i) left[i] = std::max(left[i], below_eq[i]);
    } else {
      return pivot;
    }
    for (std::size_t i = 0; i < p; ++i) right[i] = std::max(right[i], left[i]);
    const std::size_t now = active();
    if (now == remaining_count) break;
    remaining_count = now;
  }

  std::size_t skipped = 0;
  std::vector<double> remaining;
  for (std::size_t i = 0; i < p; ++i) {
    skipped += left[i];
    for (std::size_t c = left[i]; c < right[i]; ++c) remaining.push_back(h(i, c));
  }
  const std::size_t k = rank - skipped;
  std::nth_element(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(k),
                   remaining.end());
  return remaining[k];
}

}  // namespace detail

/// Medcouple: median of ((x_j - m) - (m - x_i)) / (x_j - x_i) over all pairs
/// x_i <= m <= x_j, m the sample median. For an even number of kernel values
/// the two middle ones are averaged. Runs in O(n log n) time and O(n) memory.
inline double medcouple(const Sample& sample) {
  const auto sorted = sample.sorted();
  if (sorted.size() < 3)
    throw Error(ErrorCode::degenerate_sample, "degenerate sample: medcouple needs at least 3 values");
  if (sorted.front() == sorted.back())
    throw Error(ErrorCode::degenerate_sample, "degenerate sample: all values are identical");

  const detail::KernelMatrix h(sorted);
  const std::size_t count = h.rows() * h.cols();
  if (count % 2 == 1) return detail::kernel_order_statistic(h, count / 2);
  const double lo = detail::kernel_order_statistic(h, count / 2 - 1);
  const double hi = detail::kernel_order_statistic(h, count / 2);
  return (lo + hi) / 2.0;
}

/// Skewness-adjusted boxplot fences (Hubert & Vandervieren).
inline Fences adjusted_fences(const Sample& sample) {
  Fences f;
  f.medcouple = medcouple(sample);
  f.q1 = quantile(sample, 0.25);
  f.q3 = quantile(sample, 0.75);
  const double iqr = f.q3 - f.q1;
  const double mc = f.medcouple;
  if (mc >= 0.0) {
    f.lower = f.q1 - 1.5 * std::exp(-4.0 * mc) * iqr;
    f.upper = f.q3 + 1.5 * std::exp(3.0 * mc) * iqr;
  } else {
    f.lower = f.q1 - 1.5 * std::exp(-3.0 * mc) * iqr;
    f.upper = f.q3 + 1.5 * std::exp(4.0 * mc) * iqr;
  }
  return f;
}

}  // namespace relevo
