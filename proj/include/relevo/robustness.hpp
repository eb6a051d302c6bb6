#pragma once

// Ranking robustness under relevance uncertainty. Two families of neighbouring
// relevance functions are generated around a reference:
//
//  * convolution: the whole function is translated along the target axis,
//    so the peak and base anchors move together;
//  * elastic: the base anchor (last phi = 0) stays put while the peak anchor
//    (first phi = 1) moves, stretching or compressing the slope between them.
//
// Every model is scored with SERA under every scenario and the rank-shift
// probability is the share of neighbouring scenarios whose best model differs
// from the best model under the reference function.
//
// Offsets are measured away from the bulk of the data: for a left tail a
// positive offset moves knots towards smaller targets, so a sweep on negated
// data with a mirrored relevance function yields the same report.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relevo/error.hpp"
#include "relevo/metrics.hpp"
#include "relevo/parallel.hpp"
#include "relevo/relevance.hpp"

namespace relevo {

enum class SweepMethod { convolution, elastic };

inline std::string_view to_string(SweepMethod method) {
  return method == SweepMethod::convolution ? "convolution" : "elastic";
}

inline SweepMethod parse_method(std::string_view text) {
  if (text == "convolution" || text == "conv") return SweepMethod::convolution;
  if (text == "elastic") return SweepMethod::elastic;
  throw Error(ErrorCode::invalid_argument, "unknown sweep method '" + std::string(text) + "'");
}

struct SweepConfig {
  SweepMethod method = SweepMethod::convolution;
  /// Number of scenarios, reference included. Must be odd.
  int steps = 19;
  /// Largest absolute offset, in target units. Usually the training target's
  /// standard deviation.
  double half_range = 1.0;
  /// Tail to sweep; inferred from the relevance function when empty.
  std::optional<Tail> tail;
  /// Offsets 0..half_range instead of -half_range..+half_range.
  bool one_sided = false;

  void validate() const {
    if (steps < 3 || steps % 2 == 0)
      throw Error(ErrorCode::invalid_config, "sweep steps must be an odd integer >= 3 (got " +
                                                 std::to_string(steps) + ")");
    if (!(std::isfinite(half_range) && half_range > 0.0))
      throw Error(ErrorCode::invalid_config, "sweep half range must be a positive finite number");
  }

  /// Offset between consecutive scenarios.
  double step_size() const {
    const double span = one_sided ? half_range : 2.0 * half_range;
    return span / static_cast<double>(steps - 1);
  }

  int first_index() const { return one_sided ? 0 : -(steps - 1) / 2; }
  int last_index() const { return one_sided ? steps - 1 : (steps - 1) / 2; }
};

/// One perturbed relevance function. Skipped scenarios carry a reason and no
/// function.
struct ScenarioSpec {
  int index = 0;
  double offset = 0.0;
  std::optional<RelevanceFunction> relevance;
  std::optional<RelevanceAnchors> anchors;
  std::string skip_reason;

  bool skipped() const noexcept { return !relevance.has_value(); }
};

namespace detail {

inline double direction(Tail tail) { return tail == Tail::right ? 1.0 : -1.0; }

inline double offset_for(const SweepConfig& cfg, int index) {
  return static_cast<double>(index) * cfg.step_size();
}

inline ScenarioSpec scenario_from_points(int index, double offset, std::vector<ControlPoint> points, Tail tail) {
  ScenarioSpec spec;
  spec.index = index;
  spec.offset = offset;
  spec.relevance.emplace(std::move(points));
  spec.anchors = anchors_of(*spec.relevance, tail);
  return spec;
}

}  // namespace detail

/// Rigid translations of the reference: scenario k is phi(y - k * delta).
inline std::vector<ScenarioSpec> convolution_scenarios(const RelevanceFunction& f, const SweepConfig& cfg) {
  cfg.validate();
  const RelevanceAnchors reference = anchors_of(f, cfg.tail);
  const double dir = detail::direction(reference.tail);

  std::vector<ScenarioSpec> out;
  for (int index = cfg.first_index(); index <= cfg.last_index(); ++index) {
    const double offset = detail::offset_for(cfg, index);
    std::vector<ControlPoint> points(f.points().begin(), f.points().end());
    if (index != 0) {
      for (auto& p : points) p.y += dir * offset;
    }
    out.push_back(detail::scenario_from_points(index, offset, std::move(points), reference.tail));
  }
  return out;
}

/// Anchored stretches of the reference: the base anchor is fixed, the peak
/// anchor moves by k * delta, knots between them are rescaled affinely and
/// knots past the peak move with it.
inline std::vector<ScenarioSpec> elastic_scenarios(const RelevanceFunction& f, const SweepConfig& cfg) {
  cfg.validate();
  const RelevanceAnchors reference = anchors_of(f, cfg.tail);
  const double dir = detail::direction(reference.tail);
  const auto knots = f.points();
  const double epsilon = 1e-6 * (knots.back().y - knots.front().y);
  const double base = reference.pi_min;
  const double peak = reference.pi_max;

  std::vector<ScenarioSpec> out;
  for (int index = cfg.first_index(); index <= cfg.last_index(); ++index) {
    const double offset = detail::offset_for(cfg, index);
    if (index == 0) {
      out.push_back(detail::scenario_from_points(index, offset, {knots.begin(), knots.end()}, reference.tail));
      continue;
    }
    const double new_peak = peak + dir * offset;
    if (!(dir * (new_peak - base) > epsilon)) {
      ScenarioSpec skipped;
      skipped.index = index;
      skipped.offset = offset;
      skipped.skip_reason = "peak anchor would move to " + std::to_string(new_peak) +
                            ", not beyond the base anchor at " + std::to_string(base);
      out.push_back(std::move(skipped));
      continue;
    }
    const double scale = (new_peak - base) / (peak - base);
    std::vector<ControlPoint> points(knots.begin(), knots.end());
    const double peak_along = dir * (peak - base);
    for (auto& p : points) {
      const double along = dir * (p.y - base);
      if (along <= 0.0) continue;
      if (along >= peak_along) {
        p.y += dir * offset;
      } else {
        p.y = base + (p.y - base) * scale;
      }
    }
    out.push_back(detail::scenario_from_points(index, offset, std::move(points), reference.tail));
  }
  return out;
}

inline std::vector<ScenarioSpec> make_scenarios(const RelevanceFunction& f, const SweepConfig& cfg) {
  return cfg.method == SweepMethod::convolution ? convolution_scenarios(f, cfg) : elastic_scenarios(f, cfg);
}

/// Model ids by ascending area; equal areas fall back to the id.
inline std::vector<std::string> rank_models(const std::map<std::string, double>& areas) {
  if (areas.empty()) throw Error(ErrorCode::invalid_argument, "cannot rank an empty model set");
  std::vector<std::pair<double, std::string>> order;
  for (const auto& [id, area] : areas) {
    if (std::isnan(area)) throw Error(ErrorCode::non_finite, "SERA of model '" + id + "' is NaN");
    order.emplace_back(area, id);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::string> ids;
  for (auto& [_, id] : order) ids.push_back(std::move(id));
  return ids;
}

struct ScenarioResult {
  ScenarioSpec spec;
  std::map<std::string, double> sera;
  std::vector<std::string> ranking;
};

/// Outcome of one sweep method.
struct MethodSweep {
  SweepConfig config;
  RelevanceAnchors anchors;
  std::vector<ScenarioResult> scenarios;
  std::string reference_best;
  std::size_t neighbours = 0;
  std::size_t shifted = 0;
  double rank_shift_probability = 0.0;

  std::vector<const ScenarioSpec*> skipped() const {
    std::vector<const ScenarioSpec*> out;
    for (const auto& s : scenarios) {
      if (s.spec.skipped()) out.push_back(&s.spec);
    }
    return out;
  }
};

/// Scores every model under every scenario of one method. Scenarios are
/// evaluated on up to `threads` workers; results are stored by scenario index
/// so the report is the same for any thread count.
inline MethodSweep run_sweep(const PredictionSet& preds, const RelevanceFunction& f, const SweepConfig& cfg,
                             double sera_step = 0.001, std::size_t threads = 1) {
  if (preds.models().empty()) throw Error(ErrorCode::invalid_argument, "no models to sweep");
  MethodSweep sweep;
  sweep.config = cfg;
  sweep.anchors = anchors_of(f, cfg.tail);

  auto specs = make_scenarios(f, cfg);
  sweep.scenarios.resize(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) sweep.scenarios[s].spec = std::move(specs[s]);

  parallel_for(sweep.scenarios.size(), threads, [&](std::size_t s) {
    ScenarioResult& result = sweep.scenarios[s];
    if (result.spec.skipped()) return;
    const auto phi = relevance_values(*result.spec.relevance, preds.y_true());
    for (const auto& [id, values] : preds.models()) {
      result.sera[id] = sera_from_relevance(values, preds.y_true(), phi, sera_step).area;
    }
    result.ranking = rank_models(result.sera);
  });

  for (const auto& r : sweep.scenarios) {
    if (r.spec.index == 0) sweep.reference_best = r.ranking.front();
  }
  for (const auto& r : sweep.scenarios) {
    if (r.spec.index == 0 || r.spec.skipped()) continue;
    ++sweep.neighbours;
    if (r.ranking.front() != sweep.reference_best) ++sweep.shifted;
  }
  sweep.rank_shift_probability =
      sweep.neighbours == 0 ? 0.0 : static_cast<double>(sweep.shifted) / static_cast<double>(sweep.neighbours);
  return sweep;
}


/// Everything one robustness run produces: the reference curves plus one
/// sub-report per sweep method.
struct SweepReport {
  std::vector<ControlPoint> relevance;
  std::vector<std::string> models;
  double sera_step = 0.001;
  std::map<std::string, SeraCurve> reference_curves;
  std::vector<MethodSweep> methods;
};

inline SweepReport run_sweeps(const PredictionSet& preds, const RelevanceFunction& f,
                              const std::vector<SweepConfig>& configs, double sera_step = 0.001,
                              std::size_t threads = 1) {
  for (const auto& cfg : configs) cfg.validate();
  SweepReport report;
  report.relevance.assign(f.points().begin(), f.points().end());
  report.models = preds.model_ids();
  report.sera_step = sera_step;
  report.reference_curves = sera_all(preds, f, sera_step);
  for (const auto& cfg : configs) report.methods.push_back(run_sweep(preds, f, cfg, sera_step, threads));
  return report;
}

}  // namespace relevo
