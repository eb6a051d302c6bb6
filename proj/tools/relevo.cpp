// relevo: relevance functions, SERA scoring and ranking robustness sweeps.
//
//   relevo relevance --data d.csv --target y --auto
//   relevo relevance --points "50:0,150:1"
//   relevo sera --predictions p.csv --relevance relevance.json
//   relevo sweep --predictions p.csv --relevance relevance.json --method both
//   relevo demo --data d.csv --target y --seed 1
//
// Errors go to stderr as a single line `error[E_CODE]: message`.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "relevo/commands.hpp"
#include "relevo/error.hpp"

namespace {

int fail(relevo::ErrorCode code, const std::string& message) {
  std::cerr << "error[" << relevo::code_name(code) << "]: " << message << "\n";
  return code == relevo::ErrorCode::usage ? 2 : 1;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("RELEVO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace relevo::commands;

  CLI::App app{"Relevance functions, SERA and ranking robustness for imbalanced regression"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // relevance
  RelevanceOptions rel;
  std::string rel_data;
  std::string rel_points;
  auto* cmd_rel = app.add_subcommand("relevance", "Build a relevance function and sample its curve");
  cmd_rel->add_option("--data", rel_data, "Dataset CSV (header row)");
  cmd_rel->add_option("--target", rel.target, "Target column in the dataset");
  cmd_rel->add_flag("--auto", rel.automatic, "Derive control points from the adjusted boxplot");
  cmd_rel->add_option("--points", rel_points, "Control points y:phi[:dphi], comma separated");
  cmd_rel->add_option("--center-quantile", rel.center_quantile, "Quantile of the phi=0 anchor in --auto mode")
      ->check(CLI::Range(0.0, 1.0));
  cmd_rel->add_option("--samples", rel.curve_points, "Points in the sampled curve CSV");
  cmd_rel->add_option("--out", rel.output_dir, "Output directory");

  // sera
  SeraOptions sera;
  std::string sera_rel;
  std::string sera_curves;
  auto* cmd_sera_app = app.add_subcommand("sera", "Score models in a predictions CSV with SERA");
  cmd_sera_app->add_option("--predictions", sera.predictions_path, "Predictions CSV (y_true,<model>,...)")->required();
  cmd_sera_app->add_option("--relevance", sera_rel, "Relevance JSON");
  cmd_sera_app->add_flag("--uniform", sera.uniform, "Use phi = 1 everywhere (SERA = SSE)");
  cmd_sera_app->add_option("--step", sera.step, "Integration step in t");
  cmd_sera_app->add_option("--curves", sera_curves, "Write SER curves CSV here");

  // sweep
  SweepOptions sweep;
  std::string sw_config, sw_pred, sw_rel, sw_points, sw_data, sw_target, sw_method, sw_tail, sw_out;
  int sw_steps = 19;
  double sw_half_range = 0.0;
  double sw_sera_step = 0.001;
  std::size_t sw_threads = default_threads();
  auto* cmd_sweep_app = app.add_subcommand("sweep", "Convolution / elastic robustness sweeps");
  cmd_sweep_app->add_option("--config", sw_config, "Run configuration JSON (flags override it)");
  cmd_sweep_app->add_option("--predictions", sw_pred, "Predictions CSV (y_true,<model>,...)");
  cmd_sweep_app->add_option("--relevance", sw_rel, "Relevance JSON");
  cmd_sweep_app->add_option("--points", sw_points, "Control points y:phi[:dphi], comma separated");
  cmd_sweep_app->add_flag("--auto", sweep.automatic, "Automatic relevance from the training target");
  cmd_sweep_app->add_option("--data", sw_data, "Training dataset CSV (sigma and --auto use its target)");
  cmd_sweep_app->add_option("--target", sw_target, "Target column in --data");
  auto* method_opt = cmd_sweep_app->add_option("--method", sw_method, "conv, elastic or both")->default_str("both");
  auto* steps_opt = cmd_sweep_app->add_option("--steps", sw_steps, "Scenarios per method (odd)");
  auto* range_opt = cmd_sweep_app->add_option("--half-range", sw_half_range, "Largest offset in target units")
                        ->default_str("sigma of training target");
  auto* tail_opt = cmd_sweep_app->add_option("--tail", sw_tail, "Tail to sweep: right or left (default: inferred)");
  cmd_sweep_app->add_flag("--one-sided", sweep.one_sided, "Offsets 0..half-range only");
  auto* sstep_opt = cmd_sweep_app->add_option("--sera-step", sw_sera_step, "SERA integration step in t");
  auto* threads_opt = cmd_sweep_app->add_option("--threads", sw_threads, "Worker threads (env RELEVO_THREADS)");
  cmd_sweep_app->add_option("--out", sw_out, "Output directory")->default_str("relevo-out");

  // demo
  DemoOptions demo;
  std::string demo_tail;
  demo.threads = default_threads();
  auto* cmd_demo_app = app.add_subcommand("demo", "End-to-end run: auto relevance, CV baselines, both sweeps");
  cmd_demo_app->add_option("--data", demo.data_path, "Dataset CSV")->required();
  cmd_demo_app->add_option("--target", demo.target, "Target column");
  cmd_demo_app->add_option("--seed", demo.seed, "Cross-validation seed");
  cmd_demo_app->add_option("--folds", demo.folds, "Cross-validation folds");
  cmd_demo_app->add_option("--steps", demo.steps, "Scenarios per sweep method (odd)");
  cmd_demo_app->add_option("--sera-step", demo.sera_step, "SERA integration step in t");
  cmd_demo_app->add_option("--tail", demo_tail, "Tail to sweep when the relevance has two");
  cmd_demo_app->add_option("--threads", demo.threads, "Worker threads (env RELEVO_THREADS)");
  cmd_demo_app->add_option("--out", demo.output_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(relevo::ErrorCode::usage, e.what());
  }

  try {
    if (*cmd_rel) {
      if (!rel_data.empty()) rel.data_path = rel_data;
      if (!rel_points.empty()) rel.points = rel_points;
      cmd_relevance(rel, std::cout);
    } else if (*cmd_sera_app) {
      if (!sera_rel.empty()) sera.relevance_path = sera_rel;
      if (!sera_curves.empty()) sera.curves_path = sera_curves;
      cmd_sera(sera, std::cout);
    } else if (*cmd_sweep_app) {
      if (!sw_config.empty()) sweep.config_path = sw_config;
      if (!sw_pred.empty()) sweep.predictions_path = sw_pred;
      if (!sw_rel.empty()) sweep.relevance_path = sw_rel;
      if (!sw_points.empty()) sweep.points = sw_points;
      if (!sw_data.empty()) sweep.data_path = sw_data;
      if (!sw_target.empty()) sweep.target = sw_target;
      if (method_opt->count()) sweep.method = parse_method_choice(sw_method);
      if (steps_opt->count()) sweep.steps = sw_steps;
      if (range_opt->count()) sweep.half_range = sw_half_range;
      if (tail_opt->count()) sweep.tail = sw_tail;
      if (sstep_opt->count()) sweep.sera_step = sw_sera_step;
      if (threads_opt->count() || std::getenv("RELEVO_THREADS")) sweep.threads = sw_threads;
      if (!sw_out.empty()) sweep.output_dir = sw_out;
      cmd_sweep(sweep, std::cout);
    } else if (*cmd_demo_app) {
      if (!demo_tail.empty()) demo.tail = relevo::parse_tail(demo_tail);
      cmd_demo(demo, std::cout);
    }
  } catch (const relevo::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(relevo::ErrorCode::invalid_argument, e.what());
  }
  return 0;
}
