#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "composolve/io.hpp"
#include "composolve/metrics.hpp"
#include "composolve/solvers.hpp"

namespace composolve::app {

// ---------------------------------------------------------------------------
// Experiment configuration (JSON; see schema/experiment.schema.json).

struct ProblemSpec {
  std::string kind;            // portfolio | policy_eval | linquad | lasso
  std::filesystem::path file;  // load instead of generating when non-empty
  std::size_t n = 200;         // portfolio periods, lasso rows
  std::size_t N = 50;          // portfolio assets, lasso columns
  double kappa_cov = 2.0;
  std::size_t S = 50;
  std::size_t num_actions = 10;
  double gamma = kDefaultDiscount;
  LinQuadSpec linquad;
  double noise = 0.1;  // lasso target noise
  std::uint64_t data_seed = 1;
};

struct SolverSpec {
  std::string name;   // vrsc_pg | scpg | prox_svrg | prox_full_gradient
  std::string label;  // CSV file prefix; defaults to name
  double eta = 0.1;   // step; alpha0 for scpg
  // Non-empty: tune eta over the grid first, by smallest final gap on the
  // tune seed. Gaps below the rounding floor tie; fewer queries to it wins.
  std::vector<double> eta_grid;
  std::size_t m = 100;
  std::size_t epochs = 0;  // 0: until the budget runs out
  std::size_t A = 5;
  std::size_t B = 5;
  std::size_t b1 = 5;
  SamplingMode sampling = SamplingMode::with_replacement;
  double beta0 = 1.0;
  double exp_alpha = 0.75;
  double exp_beta = 0.5;
  std::size_t iters = 0;  // scpg / prox_full_gradient; 0: until the budget runs out
  double tol = 0.0;       // prox_full_gradient
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::optional<Regularizer> regularizer;  // falls back to the problem file's, then zero
  std::vector<SolverSpec> solvers;
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t tune_seed = 0;
  std::uint64_t max_queries = 0;
  double max_wall_seconds = 0.0;
  std::size_t trace_stride = 1;
  ReferenceSettings reference;
  std::filesystem::path output_dir = "out";
  std::string raw_json;  // the document as given, echoed into the summary
};

/// Throws DomainError on an invalid document. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Generates (or loads) the configured instance.
ProblemInstance build_problem(const ProblemSpec& spec);

/// The regularizer in effect for a config and its instance.
Regularizer effective_regularizer(const ExperimentConfig& cfg, const ProblemInstance& inst);

// ---------------------------------------------------------------------------
// Trace CSV.

inline constexpr std::string_view kTraceCsvHeader =
    "epoch,inner_iter,wall_ms,q_inner_val,q_inner_jac,q_outer_grad,objective,gap,grad_map_sq,"
    "composite_grad_sq";

/// Header plus one row per record, %.17g floats, '\n' line endings.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);
/// Throws DomainError naming `source` on a header mismatch, a malformed
/// row, or an empty trace.
std::vector<TraceRecord> parse_trace_csv(std::string_view text, const std::string& source);

// ---------------------------------------------------------------------------
// Commands.

/// Writes the problem file; returns its path.
std::filesystem::path cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct TuneRecord {
  std::string label;
  double eta = 0.0;
  double final_gap = 0.0;  // +inf when the run diverged
  bool chosen = false;
};

struct RunRecord {
  std::string label;
  std::string solver;
  std::uint64_t seed = 0;
  double eta = 0.0;
  std::string status;  // completed | converged | query_budget | wall_budget | diverged
  std::string error;
  double final_gap = 0.0;
  double min_gap = 0.0;
  double min_grad_map_sq = 0.0;
  std::uint64_t queries = 0;
  std::filesystem::path csv;
  std::vector<TraceRecord> trace;
};

struct RunSummary {
  ReferenceOptimum reference;
  std::vector<TuneRecord> tuning;
  std::vector<RunRecord> runs;
};

/// Relative gap below which tuning treats final gaps as equal.
inline constexpr double kTuneGapFloor = 1e-12;

/// Runs every (solver, seed) pair, writing <label>_seed<k>.csv per run and
/// summary.json. A diverged run is recorded and the sweep continues.
RunSummary cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs one solver spec on an instance with the given seed and step.
SolveResult run_solver(const SolverSpec& spec, const ProblemInstance& inst, const Regularizer& h,
                       double eta, std::uint64_t seed, const TraceOptions& opts);

enum class XAxis { queries, wall };
enum class YAxis { gap, gradnorm };

std::optional<XAxis> parse_x_axis(std::string_view s);
std::optional<YAxis> parse_y_axis(std::string_view s);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline constexpr double kPlotFloor = 1e-16;

struct PlotOutput {
  std::string svg;
  std::vector<std::string> warnings;
};

/// Standalone SVG with a log-scale y axis, one polyline per series and a
/// legend. Values below kPlotFloor are clipped to it with a warning.
PlotOutput render_svg(const std::vector<PlotSeries>& series, XAxis x, YAxis y);

/// Reads the CSVs, renders and writes `svg_path`.
PlotOutput cmd_plot(const std::vector<std::filesystem::path>& csvs, XAxis x, YAxis y,
                    const std::filesystem::path& svg_path);

/// CSVs listed in <out_dir>/summary.json.
std::vector<std::filesystem::path> summary_csvs(const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Verification suite.

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Fault injection for testing the suite itself.
struct CheckHooks {
  /// Replaces Regularizer::prox_into in the prox checks.
  std::function<void(const Regularizer&, std::span<const double>, double, std::span<double>)> prox;
  /// Applied to every measured query count before comparison.
  std::function<QueryCounts(QueryCounts)> measured_counts;
};

struct CheckSettings {
  bool full = false;  // include the long head-to-head runs
  std::uint64_t seed = 2024;
  std::vector<std::string> only;  // run only checks whose name starts with one of these
};

CheckSettings parse_check_settings(std::string_view json_text);

std::vector<CheckResult> cmd_check(const CheckSettings& settings, const CheckHooks& hooks = {});

/// One line per check: "[PASS] name: detail (t s)".
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace composolve::app
