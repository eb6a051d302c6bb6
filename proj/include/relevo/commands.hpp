#pragma once

// Workflows behind the `relevo` command line tool. They take plain option
// structs and an output stream so they can be driven from tests as well.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relevo/error.hpp"
#include "relevo/io.hpp"
#include "relevo/metrics.hpp"
#include "relevo/models.hpp"
#include "relevo/relevance.hpp"
#include "relevo/robustness.hpp"
#include "relevo/stats.hpp"

namespace relevo::commands {

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string shortest(double v) { return format_double(v); }

inline void print_anchors(std::ostream& out, const RelevanceFunction& f) {
  for (Tail tail : {Tail::right, Tail::left}) {
    try {
      const auto a = anchors_of(f, tail);
      out << "anchors (" << to_string(a.tail) << " tail): pi_min = " << shortest(a.pi_min)
          << ", pi_max = " << shortest(a.pi_max) << "\n";
    } catch (const Error&) {
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct RelevanceOptions {
  std::optional<std::string> data_path;
  std::string target = "y";
  bool automatic = false;
  std::optional<std::string> points;
  double center_quantile = 0.5;
  std::string output_dir = ".";
  std::size_t curve_points = 500;
};

/// Builds a relevance function from explicit points or from the data, writes
/// relevance.json and relevance_curve.csv and prints the anchors.
inline RelevanceFunction cmd_relevance(const RelevanceOptions& opt, std::ostream& out) {
  if (opt.automatic == opt.points.has_value())
    throw Error(ErrorCode::usage, "choose exactly one of --auto or --points");
  std::optional<Dataset> data;
  if (opt.data_path) data = read_dataset_csv(*opt.data_path, opt.target);
  if (opt.automatic && !data) throw Error(ErrorCode::usage, "--auto needs --data");

  const RelevanceFunction f = opt.automatic
                                  ? build_relevance(auto_control_points(Sample(data->target), {opt.center_quantile}))
                                  : build_relevance(parse_points_spec(*opt.points));

  double lo = f.points().front().y;
  double hi = f.points().back().y;
  if (data) {
    const Sample s(data->target);
    lo = s.min();
    hi = s.max();
  } else {
    const double pad = 0.1 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

  ::relevo::detail::ensure_directory(opt.output_dir);
  const std::filesystem::path dir(opt.output_dir);
  write_relevance_json(f, dir / "relevance.json");
  ::relevo::detail::write_file(dir / "relevance_curve.csv", relevance_curve_csv(f, lo, hi, opt.curve_points));

  out << "control points:\n";
  for (const auto& p : f.points()) {
    out << "  y = " << detail::shortest(p.y) << ", phi = " << detail::shortest(p.phi) << "\n";
  }
  detail::print_anchors(out, f);
  out << "wrote " << (dir / "relevance.json").string() << " and " << (dir / "relevance_curve.csv").string() << "\n";
  return f;
}

// ---------------------------------------------------------------------------

struct SeraOptions {
  std::string predictions_path;
  std::optional<std::string> relevance_path;
  bool uniform = false;
  double step = 0.001;
  std::optional<std::string> curves_path;
};

struct SeraRow {
  std::string model;
  double sera = 0.0;
};

/// Scores every model in a predictions file and prints them best first.
inline std::vector<SeraRow> cmd_sera(const SeraOptions& opt, std::ostream& out) {
  if (opt.uniform == opt.relevance_path.has_value())
    throw Error(ErrorCode::usage, "choose exactly one of --relevance or --uniform");
  if (!(opt.step > 0.0 && opt.step <= 0.5)) throw Error(ErrorCode::invalid_config, "--step must lie in (0, 0.5]");
  const PredictionSet preds = read_predictions_csv(opt.predictions_path);
  const RelevanceFunction f = opt.uniform ? uniform_relevance() : read_relevance_json(*opt.relevance_path);
  const auto curves = sera_all(preds, f, opt.step);

  std::map<std::string, double> areas;
  for (const auto& [id, c] : curves) areas[id] = c.area;
  std::vector<SeraRow> rows;
  for (const auto& id : rank_models(areas)) rows.push_back({id, areas[id]});

  out << "rank,model,sera\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << (i + 1) << "," << rows[i].model << "," << detail::shortest(rows[i].sera) << "\n";
  if (opt.curves_path) ::relevo::detail::write_file(*opt.curves_path, sera_curves_csv(curves));
  return rows;
}

// ---------------------------------------------------------------------------

enum class MethodChoice { convolution, elastic, both };

inline MethodChoice parse_method_choice(const std::string& s) {
  if (s == "conv" || s == "convolution") return MethodChoice::convolution;
  if (s == "elastic") return MethodChoice::elastic;
  if (s == "both") return MethodChoice::both;
  throw Error(ErrorCode::usage, "--method must be conv, elastic or both");
}

struct SweepOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> predictions_path;
  std::optional<std::string> relevance_path;
  std::optional<std::string> points;
  bool automatic = false;
  std::optional<std::string> data_path;
  std::optional<std::string> target;
  std::optional<MethodChoice> method;
  std::optional<int> steps;
  std::optional<double> half_range;
  std::optional<std::string> tail;
  bool one_sided = false;
  std::optional<double> sera_step;
  std::optional<std::size_t> threads;
  std::optional<std::string> output_dir;
};

namespace detail {

// Command-line flags win over config file values.
inline RunConfig merge_sweep_options(const SweepOptions& opt) {
  RunConfig cfg = opt.config_path ? read_run_config(*opt.config_path) : RunConfig{};
  const int sources = static_cast<int>(opt.relevance_path.has_value()) + static_cast<int>(opt.points.has_value()) +
                      static_cast<int>(opt.automatic);
  if (sources > 1) throw Error(ErrorCode::usage, "choose only one of --relevance, --points or --auto");
  if (opt.relevance_path) {
    cfg.relevance_source = RelevanceSource::file;
    cfg.relevance_path = opt.relevance_path;
  }
  if (opt.points) {
    cfg.relevance_source = RelevanceSource::inline_points;
    cfg.relevance_points = parse_points_spec(*opt.points);
  }
  if (opt.automatic) cfg.relevance_source = RelevanceSource::automatic;
  if (opt.predictions_path) cfg.predictions_path = opt.predictions_path;
  if (opt.data_path) cfg.data_path = opt.data_path;
  if (opt.target) cfg.target = opt.target;
  if (opt.method) {
    switch (*opt.method) {
      case MethodChoice::convolution: cfg.methods = {SweepMethod::convolution}; break;
      case MethodChoice::elastic: cfg.methods = {SweepMethod::elastic}; break;
      case MethodChoice::both: cfg.methods = {SweepMethod::convolution, SweepMethod::elastic}; break;
    }
  }
  if (opt.steps) cfg.steps = *opt.steps;
  if (opt.half_range) cfg.half_range = opt.half_range;
  if (opt.tail) cfg.tail = parse_tail(*opt.tail);
  if (opt.one_sided) cfg.one_sided = true;
  if (opt.sera_step) cfg.sera_step = *opt.sera_step;
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.output_dir) cfg.output_dir = opt.output_dir;
  cfg.validate();
  if (!cfg.predictions_path) throw Error(ErrorCode::usage, "sweep needs --predictions");
  if (!cfg.relevance_source) throw Error(ErrorCode::usage, "sweep needs one of --relevance, --points or --auto");
  return cfg;
}

inline void print_sweep_summary(std::ostream& out, const SweepReport& report) {
  for (const auto& m : report.methods) {
    out << to_string(m.config.method) << ": reference best = " << m.reference_best
        << ", rank shift probability = " << fixed(m.rank_shift_probability, 3) << " (" << m.shifted << "/"
        << m.neighbours << " neighbouring scenarios)\n";
    const auto skipped = m.skipped();
    if (!skipped.empty()) {
      out << "  skipped " << skipped.size() << " scenario(s):";
      for (const auto* s : skipped) out << " " << s->index;
      out << "\n";
    }
  }
}

}  // namespace detail

/// Runs the configured sweeps over a predictions file and writes the report.
inline SweepReport cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  const RunConfig cfg = detail::merge_sweep_options(opt);
  const PredictionSet preds = read_predictions_csv(*cfg.predictions_path);

  // The training target drives the automatic relevance and the default sweep
  // range. Without a dataset the predictions' true values stand in for it.
  std::vector<double> training_target(preds.y_true().begin(), preds.y_true().end());
  if (cfg.data_path) training_target = read_dataset_csv(*cfg.data_path, cfg.target.value_or("y")).target;

  std::optional<RelevanceFunction> f;
  switch (*cfg.relevance_source) {
    case RelevanceSource::file: f.emplace(read_relevance_json(*cfg.relevance_path)); break;
    case RelevanceSource::inline_points: f.emplace(cfg.relevance_points); break;
    case RelevanceSource::automatic:
      f.emplace(auto_control_points(Sample(training_target), {cfg.center_quantile}));
      break;
  }

  const double sigma = stddev(training_target);
  if (!cfg.half_range && !(sigma > 0.0))
    throw Error(ErrorCode::invalid_config, "training target has zero spread; set --half-range");
  const SweepReport report = run_sweeps(preds, *f, cfg.sweep_configs(sigma), cfg.sera_step, cfg.threads);
  const std::string dir = cfg.output_dir.value_or("relevo-out");
  write_report(report, dir);
  detail::print_sweep_summary(out, report);
  out << "wrote report to " << dir << "\n";
  return report;
}

// ---------------------------------------------------------------------------

struct DemoOptions {
  std::string data_path;
  std::string target = "y";
  std::uint64_t seed = 1;
  std::size_t folds = 10;
  int steps = 19;
  double sera_step = 0.001;
  std::size_t threads = 1;
  std::optional<Tail> tail;
  std::string output_dir = "relevo-demo";
};

/// End to end: automatic relevance, SERA-driven model selection for each
/// baseline learner over k-fold CV, then both sweeps on the out-of-fold
/// predictions.
inline SweepReport cmd_demo(const DemoOptions& opt, std::ostream& out) {
  if (opt.steps < 3 || opt.steps % 2 == 0)
    throw Error(ErrorCode::invalid_config, "steps must be an odd integer >= 3 (got " + std::to_string(opt.steps) + ")");
  if (!(opt.sera_step > 0.0 && opt.sera_step <= 0.5))
    throw Error(ErrorCode::invalid_config, "sera step must lie in (0, 0.5]");
  const Dataset data = read_dataset_csv(opt.data_path, opt.target);
  if (data.features.cols() == 0) throw Error(ErrorCode::invalid_argument, "dataset has no feature columns");
  const RelevanceFunction f(auto_control_points(Sample(data.target)));
  const CvPlan plan = make_cv_plan(data.size(), opt.seed, opt.folds);

  PredictionSet preds(data.target);
  Json selection = Json::object();
  for (const auto& learner : {mean_learner(), ols_learner(), knn_learner()}) {
    const Selection sel = select_by_sera(data, learner, f, plan, opt.sera_step);
    Json params = Json::object();
    for (const auto& [k, v] : sel.best) params[k] = v;
    selection[learner.name] = Json{{"params", params}, {"sera", sel.best_sera}, {"grid_sera", sel.grid_sera}};
    out << "selected " << learner.name << " " << params.dump() << " (out-of-fold SERA " << detail::shortest(sel.best_sera)
        << ")\n";
    preds.add_model(learner.name, sel.predictions);
  }

  SweepConfig base;
  base.steps = opt.steps;
  base.half_range = stddev(data.target);
  base.tail = opt.tail;
  SweepConfig conv = base;
  conv.method = SweepMethod::convolution;
  SweepConfig elastic = base;
  elastic.method = SweepMethod::elastic;
  const SweepReport report = run_sweeps(preds, f, {conv, elastic}, opt.sera_step, opt.threads);

  const std::filesystem::path dir(opt.output_dir);
  write_report(report, dir);
  write_relevance_json(f, dir / "relevance.json");
  write_predictions_csv(preds, dir / "predictions.csv");
  ::relevo::detail::write_file(dir / "selection.json", selection.dump(2) + "\n");

  detail::print_anchors(out, f);
  detail::print_sweep_summary(out, report);
  out << "wrote report to " << dir.string() << "\n";
  return report;
}

}  // namespace relevo::commands
