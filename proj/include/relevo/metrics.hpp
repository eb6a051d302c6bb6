#pragma once

// Squared error-relevance (SER_t) and its area over t in [0, 1] (SERA).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relevo/error.hpp"
#include "relevo/relevance.hpp"

namespace relevo {

/// True targets plus one aligned prediction vector per model. Model ids are
/// kept sorted so iteration order is deterministic.
class PredictionSet {
 public:
  PredictionSet() = default;

  explicit PredictionSet(std::vector<double> y_true) : y_true_(std::move(y_true)) {
    if (y_true_.empty()) throw Error(ErrorCode::invalid_argument, "prediction set needs at least one row");
    check_finite(y_true_, "y_true");
  }

  void add_model(const std::string& id, std::vector<double> predictions) {
    if (id.empty()) throw Error(ErrorCode::invalid_argument, "empty model id");
    if (models_.count(id)) throw Error(ErrorCode::invalid_argument, "duplicate model id '" + id + "'");
    if (predictions.size() != y_true_.size())
      throw Error(ErrorCode::length_mismatch, "model '" + id + "' has " + std::to_string(predictions.size()) +
                                                  " predictions for " + std::to_string(y_true_.size()) + " targets");
    check_finite(predictions, "model '" + id + "'");
    models_.emplace(id, std::move(predictions));
  }

  std::span<const double> y_true() const noexcept { return y_true_; }
  const std::map<std::string, std::vector<double>>& models() const noexcept { return models_; }
  std::size_t size() const noexcept { return y_true_.size(); }

  std::vector<std::string> model_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : models_) ids.push_back(id);
    return ids;
  }

 private:
  static void check_finite(std::span<const double> values, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]))
        throw Error(ErrorCode::non_finite, "non-finite value in " + what + " at row " + std::to_string(i));
    }
  }

  std::vector<double> y_true_;
  std::map<std::string, std::vector<double>> models_;
};

struct SeraCurve {
  std::vector<double> t_grid;
  std::vector<double> ser_values;
  double area = 0.0;
};

namespace detail {

inline void check_aligned(std::span<const double> y_pred, std::span<const double> y_true) {
  if (y_pred.size() != y_true.size())
    throw Error(ErrorCode::length_mismatch, "predictions and targets differ in length (" +
                                                std::to_string(y_pred.size()) + " vs " +
                                                std::to_string(y_true.size()) + ")");
  for (std::size_t i = 0; i < y_pred.size(); ++i) {
    if (!std::isfinite(y_pred[i]) || !std::isfinite(y_true[i]))
      throw Error(ErrorCode::non_finite, "non-finite prediction or target at row " + std::to_string(i));
  }
}

// Cumulative view of squared errors ordered by relevance: ser(t) is the sum of
// squared errors of all points whose relevance is >= t.
class SerProfile {
 public:
  SerProfile(std::span<const double> y_pred, std::span<const double> y_true, std::span<const double> relevance) {
    const std::size_t n = y_true.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return relevance[a] < relevance[b]; });
    phi_.resize(n);
    suffix_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) phi_[k] = relevance[order[k]];
    for (std::size_t k = n; k-- > 0;) {
      const double e = y_pred[order[k]] - y_true[order[k]];
      suffix_[k] = suffix_[k + 1] + e * e;
    }
  }

  double at(double t) const {
    const auto it = std::lower_bound(phi_.begin(), phi_.end(), t);
    return suffix_[static_cast<std::size_t>(it - phi_.begin())];
  }

  // Exact integral of the step function ser(t) over [0, 1]: constant between
  // consecutive distinct relevance values.
  double exact_area() const {
    double area = 0.0;
    double prev = 0.0;
    std::size_t k = 0;
    while (k < phi_.size()) {
      const double b = std::clamp(phi_[k], 0.0, 1.0);
      if (b > prev) {
        area += (b - prev) * suffix_[k];
        prev = b;
      }
      const double group = phi_[k];
      while (k < phi_.size() && phi_[k] == group) ++k;
    }
    return area;
  }

 private:
  std::vector<double> phi_;
  std::vector<double> suffix_;
};

inline std::vector<double> t_grid(double step) {
  if (!(step > 0.0 && step <= 0.5))
    throw Error(ErrorCode::invalid_argument, "SERA step must lie in (0, 0.5]");
  auto intervals = static_cast<std::size_t>(std::llround(1.0 / step));
  if (std::abs(static_cast<double>(intervals) * step - 1.0) > 1e-9)
    intervals = static_cast<std::size_t>(std::ceil(1.0 / step));
  std::vector<double> grid(intervals + 1);
  for (std::size_t j = 0; j < intervals; ++j) grid[j] = std::min(1.0, static_cast<double>(j) * step);
  grid[intervals] = 1.0;
  return grid;
}

}  // namespace detail

/// Relevance of each true target.
inline std::vector<double> relevance_values(const RelevanceFunction& f, std::span<const double> y_true) {
  std::vector<double> phi(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) phi[i] = f(y_true[i]);
  return phi;
}

/// Sum of squared errors over the points whose true target has relevance >= t.
inline double ser(double t, std::span<const double> y_pred, std::span<const double> y_true,
                  const RelevanceFunction& f) {
  detail::check_aligned(y_pred, y_true);
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::invalid_argument, "SER cutoff must lie in [0, 1]");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (f(y_true[i]) >= t) {
      const double e = y_pred[i] - y_true[i];
      sum += e * e;
    }
  }
  return sum;
}

/// SERA curve from precomputed relevance values, trapezoidal rule on a
/// uniform grid in t.
inline SeraCurve sera_from_relevance(std::span<const double> y_pred, std::span<const double> y_true,
                                     std::span<const double> relevance, double step = 0.001) {
  detail::check_aligned(y_pred, y_true);
  if (relevance.size() != y_true.size())
    throw Error(ErrorCode::length_mismatch, "relevance values and targets differ in length");
  SeraCurve curve;
  curve.t_grid = detail::t_grid(step);
  const detail::SerProfile profile(y_pred, y_true, relevance);
  curve.ser_values.resize(curve.t_grid.size());
  for (std::size_t j = 0; j < curve.t_grid.size(); ++j) curve.ser_values[j] = profile.at(curve.t_grid[j]);
  for (std::size_t j = 1; j < curve.t_grid.size(); ++j) {
    curve.area += 0.5 * (curve.t_grid[j] - curve.t_grid[j - 1]) * (curve.ser_values[j] + curve.ser_values[j - 1]);
  }
  return curve;
}

inline SeraCurve sera(std::span<const double> y_pred, std::span<const double> y_true, const RelevanceFunction& f,
                      double step = 0.001) {
  detail::check_aligned(y_pred, y_true);
  const auto phi = relevance_values(f, y_true);
  return sera_from_relevance(y_pred, y_true, phi, step);
}

/// SERA integrated exactly over the breakpoints of the SER step function.
inline double sera_exact(std::span<const double> y_pred, std::span<const double> y_true, const RelevanceFunction& f) {
  detail::check_aligned(y_pred, y_true);
  const auto phi = relevance_values(f, y_true);
  return detail::SerProfile(y_pred, y_true, phi).exact_area();
}

/// SERA for every model, keyed (and therefore ordered) by model id.
inline std::map<std::string, SeraCurve> sera_all(const PredictionSet& preds, const RelevanceFunction& f,
                                                 double step = 0.001) {
  const auto phi = relevance_values(f, preds.y_true());
  std::map<std::string, SeraCurve> out;
  for (const auto& [id, values] : preds.models()) {
    try {
      out.emplace(id, sera_from_relevance(values, preds.y_true(), phi, step));
    } catch (const Error& e) {
      throw Error(e.code(), "model '" + id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace relevo
