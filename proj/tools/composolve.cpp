// composolve: generate problems, run solver sweeps, plot traces, run the
// verification suite.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "composolve/app.hpp"
#include "composolve/errors.hpp"
#include "composolve/io.hpp"

namespace fs = std::filesystem;
using namespace composolve;

namespace {

fs::path output_dir(const std::string& flag, const app::ExperimentConfig& cfg) {
  return flag.empty() ? cfg.output_dir : fs::path(flag);
}

int run_gen(const std::string& config, const std::string& out) {
  const app::ExperimentConfig cfg = app::load_config(config);
  const fs::path path = app::cmd_gen(cfg, output_dir(out, cfg));
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_run(const std::string& config, const std::string& out) {
  const app::ExperimentConfig cfg = app::load_config(config);
  const fs::path dir = output_dir(out, cfg);
  const app::RunSummary summary = app::cmd_run(cfg, dir);
  std::printf("reference: H* = %.12g, ||G_eta(x*)|| = %.3g (%s)\n", summary.reference.objective,
              summary.reference.residual, summary.reference.verified ? "verified" : "UNVERIFIED");
  for (const app::TuneRecord& t : summary.tuning) {
    std::printf("tune %-20s eta=%-8g final_gap=%-12.4g%s\n", t.label.c_str(), t.eta, t.final_gap,
                t.chosen ? "  <- chosen" : "");
  }
  for (const app::RunRecord& r : summary.runs) {
    std::printf("%-20s seed=%-4llu eta=%-8g %-12s queries=%-10llu final_gap=%.4g\n",
                r.label.c_str(), static_cast<unsigned long long>(r.seed), r.eta, r.status.c_str(),
                static_cast<unsigned long long>(r.queries), r.final_gap);
  }
  std::cout << "wrote " << (dir / "summary.json").string() << "\n";
  return 0;
}

int run_plot(const std::string& config, const std::string& out, const std::string& x_flag,
             const std::string& y_flag, const std::vector<std::string>& csv_flags) {
  const auto x = app::parse_x_axis(x_flag);
  const auto y = app::parse_y_axis(y_flag);
  if (!x) throw DomainError("--x-axis must be queries or wall");
  if (!y) throw DomainError("--y must be gap or gradnorm");

  std::vector<fs::path> csvs(csv_flags.begin(), csv_flags.end());
  fs::path dir = out;
  if (!config.empty()) {
    const app::ExperimentConfig cfg = app::load_config(config);
    if (csvs.empty()) csvs = app::summary_csvs(cfg.output_dir);
    if (dir.empty()) dir = cfg.output_dir;
  }
  if (dir.empty()) dir = ".";
  const fs::path svg = dir / ("plot_" + y_flag + "_vs_" + x_flag + ".svg");
  const app::PlotOutput result = app::cmd_plot(csvs, *x, *y, svg);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << svg.string() << "\n";
  return 0;
}

int run_check(const std::string& config) {
  app::CheckSettings settings;
  if (!config.empty()) settings = app::parse_check_settings(read_text_file(config));
  const std::vector<app::CheckResult> results = app::cmd_check(settings);
  std::cout << app::format_report(results);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Variance-reduced stochastic compositional proximal gradient toolkit"};
  cli.require_subcommand(1);

  std::string config, out, x_axis = "queries", y_axis = "gap";
  std::vector<std::string> csvs;

  CLI::App* gen = cli.add_subcommand("gen", "Write the configured problem instance as JSON");
  gen->add_option("--config", config, "Experiment config (JSON)")->required();
  gen->add_option("--out", out, "Output directory (default: config output_dir)");

  CLI::App* run = cli.add_subcommand("run", "Run every (solver, seed) pair and write traces");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (default: config output_dir)");

  CLI::App* plot = cli.add_subcommand("plot", "Render convergence curves as SVG");
  plot->add_option("--config", config, "Experiment config whose run summary lists the CSVs");
  plot->add_option("--out", out, "Directory for the SVG");
  plot->add_option("--x-axis", x_axis, "queries | wall")->check(CLI::IsMember({"queries", "wall"}));
  plot->add_option("--y", y_axis, "gap | gradnorm")->check(CLI::IsMember({"gap", "gradnorm"}));
  plot->add_option("--csv", csvs, "Trace CSV (repeatable; overrides the run summary)");

  CLI::App* check = cli.add_subcommand("check", "Run the built-in verification suite");
  check->add_option("--config", config, "Check settings (JSON)");
  check->add_option("--out", out, "Unused; accepted for symmetry");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*gen) return run_gen(config, out);
    if (*run) return run_run(config, out);
    if (*plot) {
      if (config.empty() && csvs.empty()) throw DomainError("plot: give --config or --csv");
      return run_plot(config, out, x_axis, y_axis, csvs);
    }
    if (*check) return run_check(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
