#pragma once

// Baseline learners and a k-fold harness that picks hyperparameters by SERA.
// These exist so the toolkit runs end to end; predictions from any external
// model can be fed in through a predictions CSV instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relevo/error.hpp"
#include "relevo/metrics.hpp"
#include "relevo/relevance.hpp"

namespace relevo {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error(ErrorCode::length_mismatch, "matrix data does not match its shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols_), cols_,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Dataset {
  Matrix features;
  std::vector<double> target;
  std::vector<std::string> feature_names;
  std::string target_name = "y";

  std::size_t size() const noexcept { return target.size(); }

  void validate() const {
    if (features.rows() != target.size())
      throw Error(ErrorCode::length_mismatch, "feature rows and target length differ");
    if (feature_names.size() != features.cols())
      throw Error(ErrorCode::length_mismatch, "feature names do not match feature columns");
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features = features.select_rows(rows);
    out.target.reserve(rows.size());
    for (std::size_t r : rows) out.target.push_back(target[r]);
    out.feature_names = feature_names;
    out.target_name = target_name;
    return out;
  }
};

using Hyperparams = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Learners

inline std::vector<double> fit_predict_mean(const Dataset& train, const Matrix& test) {
  if (train.target.empty()) throw Error(ErrorCode::invalid_argument, "mean predictor needs a non-empty training set");
  return std::vector<double>(test.rows(), mean(train.target));
}

/// Least squares with an unpenalised intercept and ridge penalty `ridge` on
/// the slopes. Solved on centred data through the normal equations.
inline std::vector<double> fit_predict_ols(const Dataset& train, const Matrix& test, double ridge = 1e-8) {
  const std::size_t n = train.size();
  const std::size_t p = train.features.cols();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "OLS needs a non-empty training set");
  if (p == 0) throw Error(ErrorCode::invalid_argument, "OLS needs at least one feature");
  if (!(ridge >= 0.0)) throw Error(ErrorCode::invalid_argument, "ridge penalty must be >= 0");
  if (test.cols() != p) throw Error(ErrorCode::length_mismatch, "test features do not match training features");

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) x(r, c) = train.features(r, c);
    y(r) = train.target[r];
  }
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  x.rowwise() -= x_mean;
  y.array() -= y_mean;

  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd diag = ldlt.vectorD();
  const double largest = diag.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-12 * std::max(largest, 1.0)))
    throw Error(ErrorCode::singular_system, "singular least-squares system; use a ridge penalty > 0");
  const Eigen::VectorXd beta = ldlt.solve(x.transpose() * y);
  const double intercept = y_mean - x_mean.dot(beta);

  std::vector<double> out(test.rows());
  for (std::size_t r = 0; r < test.rows(); ++r) {
    double v = intercept;
    for (std::size_t c = 0; c < p; ++c) v += beta(static_cast<Eigen::Index>(c)) * test(r, c);
    out[r] = v;
  }
  return out;
}

/// k nearest neighbours on features standardised with the training mean and
/// standard deviation. Distance ties go to the lower training row.
inline std::vector<double> fit_predict_knn(const Dataset& train, const Matrix& test, std::size_t k) {
  const std::size_t n = train.size();
  const std::size_t p = train.features.cols();
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be positive");
  if (k > n)
    throw Error(ErrorCode::invalid_argument,
                "k = " + std::to_string(k) + " exceeds the training size " + std::to_string(n));
  if (test.cols() != p) throw Error(ErrorCode::length_mismatch, "test features do not match training features");

  std::vector<double> centre(p, 0.0), scale(p, 1.0);
  for (std::size_t c = 0; c < p; ++c) {
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = train.features(r, c);
    centre[c] = mean(column);
    const double sd = stddev(column);
    if (sd > 0.0) scale[c] = sd;
  }
  Matrix z(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) z(r, c) = (train.features(r, c) - centre[c]) / scale[c];

  std::vector<double> out(test.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<double> q(p);
  for (std::size_t t = 0; t < test.rows(); ++t) {
    for (std::size_t c = 0; c < p; ++c) q[c] = (test(t, c) - centre[c]) / scale[c];
    for (std::size_t r = 0; r < n; ++r) {
      double d = 0.0;
      for (std::size_t c = 0; c < p; ++c) d += (z(r, c) - q[c]) * (z(r, c) - q[c]);
      dist[r] = {d, r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += train.target[dist[i].second];
    out[t] = sum / static_cast<double>(k);
  }
  return out;
}

using FitPredict = std::function<std::vector<double>(const Dataset&, const Matrix&, const Hyperparams&)>;

/// A learner plus the hyperparameter grid to search.
struct LearnerSpec {
  std::string name;
  FitPredict fit_predict;
  std::vector<Hyperparams> grid;
};

inline LearnerSpec mean_learner() {
  return {"mean", [](const Dataset& train, const Matrix& test, const Hyperparams&) {
            return fit_predict_mean(train, test);
          },
          {Hyperparams{}}};
}

inline LearnerSpec ols_learner(const std::vector<double>& ridges = {1e-8, 1e-2, 1.0, 10.0}) {
  LearnerSpec spec{"ols",
                   [](const Dataset& train, const Matrix& test, const Hyperparams& h) {
                     return fit_predict_ols(train, test, h.at("ridge"));
                   },
                   {}};
  for (double r : ridges) spec.grid.push_back({{"ridge", r}});
  return spec;
}

inline LearnerSpec knn_learner(const std::vector<std::size_t>& ks = {1, 3, 5, 10, 20}) {
  LearnerSpec spec{"knn",
                   [](const Dataset& train, const Matrix& test, const Hyperparams& h) {
                     return fit_predict_knn(train, test, static_cast<std::size_t>(h.at("k")));
                   },
                   {}};
  for (std::size_t k : ks) spec.grid.push_back({{"k", static_cast<double>(k)}});
  return spec;
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace detail {

// Uniform integer in [0, bound) by rejection, so the sequence depends only on
// the mt19937_64 stream (which the standard fully specifies).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

template <typename T>
void shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace detail

struct CvPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  std::size_t rows() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
  }
};

/// Random partition of 0..n-1 into `folds` sets whose sizes differ by at most
/// one. Identical (n, folds, seed) give identical plans.
inline CvPlan make_cv_plan(std::size_t n, std::uint64_t seed, std::size_t folds = 10) {
  if (folds < 2) throw Error(ErrorCode::invalid_argument, "cross-validation needs at least 2 folds");
  if (n < folds)
    throw Error(ErrorCode::invalid_argument, "cannot split " + std::to_string(n) + " rows into " +
                                                 std::to_string(folds) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  detail::shuffle(order, rng);

  CvPlan plan;
  plan.seed = seed;
  plan.folds.resize(folds);
  for (std::size_t i = 0; i < n; ++i) plan.folds[i % folds].push_back(order[i]);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

/// `count` grid points drawn without replacement, kept in grid order.
inline std::vector<Hyperparams> random_grid_subset(const std::vector<Hyperparams>& grid, std::size_t count,
                                                   std::uint64_t seed) {
  if (count >= grid.size()) return grid;
  std::vector<std::size_t> idx(grid.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  detail::shuffle(idx, rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<Hyperparams> out;
  for (std::size_t i : idx) out.push_back(grid[i]);
  return out;
}

/// Out-of-fold predictions: row i is predicted by a model fit without its fold.
inline std::vector<double> out_of_fold(const Dataset& data, const CvPlan& plan, const FitPredict& fit_predict,
                                       const Hyperparams& params) {
  if (plan.rows() != data.size())
    throw Error(ErrorCode::length_mismatch, "cross-validation plan does not cover the dataset");
  std::vector<double> oof(data.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < plan.folds.size(); ++g) {
      if (g != f) train_rows.insert(train_rows.end(), plan.folds[g].begin(), plan.folds[g].end());
    }
    if (train_rows.empty()) throw Error(ErrorCode::invalid_argument, "fold " + std::to_string(f) + " has no training rows");
    std::sort(train_rows.begin(), train_rows.end());
    const Dataset train = data.subset(train_rows);
    const Matrix test = data.features.select_rows(plan.folds[f]);
    const auto pred = fit_predict(train, test, params);
    for (std::size_t i = 0; i < plan.folds[f].size(); ++i) oof[plan.folds[f][i]] = pred[i];
  }
  return oof;
}

struct Selection {
  Hyperparams best;
  std::size_t best_index = 0;
  double best_sera = 0.0;
  std::vector<double> grid_sera;
  std::vector<double> predictions;
};

/// Scores each grid point by the SERA of its out-of-fold predictions and keeps
/// the smallest; the first grid point wins ties.
inline Selection select_by_sera(const Dataset& data, const LearnerSpec& learner, const RelevanceFunction& f,
                                const CvPlan& plan, double sera_step = 0.001) {
  if (learner.grid.empty()) throw Error(ErrorCode::invalid_argument, "learner '" + learner.name + "' has an empty grid");
  Selection sel;
  const auto phi = relevance_values(f, data.target);
  for (std::size_t g = 0; g < learner.grid.size(); ++g) {
    auto oof = out_of_fold(data, plan, learner.fit_predict, learner.grid[g]);
    const double area = sera_from_relevance(oof, data.target, phi, sera_step).area;
    sel.grid_sera.push_back(area);
    if (g == 0 || area < sel.best_sera) {
      sel.best = learner.grid[g];
      sel.best_index = g;
      sel.best_sera = area;
      sel.predictions = std::move(oof);
    }
  }
  return sel;
}

}  // namespace relevo
