#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "composolve/app.hpp"
#include "composolve/errors.hpp"
#include "composolve/kernels.hpp"

namespace composolve::app {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%" PRIu64, v);
  out += buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  if (tmp == "nan" || tmp == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (tmp == "inf") return std::numeric_limits<double>::infinity();
  if (tmp == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tmp.size() || tmp.empty()) throw DomainError(where + ": bad number '" + tmp + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  if (tmp.empty() || tmp.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError(where + ": bad count '" + tmp + "'");
  }
  return std::stoull(tmp);
}

double final_gap_of(const std::vector<TraceRecord>& trace) {
  if (trace.empty()) return std::numeric_limits<double>::infinity();
  const double g = trace.back().gap;
  return std::isfinite(g) ? g : std::numeric_limits<double>::infinity();
}

double min_gap_of(const std::vector<TraceRecord>& trace) {
  double best = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : trace) {
    if (std::isfinite(r.gap)) best = std::min(best, r.gap);
  }
  return best;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  for (const TraceRecord& r : trace) {
    append_uint(out, r.epoch);
    out += ',';
    append_uint(out, r.inner_iter);
    out += ',';
    append_double(out, r.wall_ms);
    out += ',';
    append_uint(out, r.q_inner_val);
    out += ',';
    append_uint(out, r.q_inner_jac);
    out += ',';
    append_uint(out, r.q_outer_grad);
    out += ',';
    append_double(out, r.objective);
    out += ',';
    append_double(out, r.gap);
    out += ',';
    append_double(out, r.grad_map_sq);
    out += ',';
    append_double(out, r.composite_grad_sq);
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> parse_trace_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DomainError(source + ": empty CSV");
  if (lines.front() != kTraceCsvHeader) {
    throw DomainError(source + ": unexpected header '" + std::string(lines.front()) + "'");
  }
  std::vector<TraceRecord> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = source + ":" + std::to_string(k + 1);
    const std::vector<std::string_view> f = split(lines[k], ',');
    if (f.size() != 10) throw DomainError(where + ": expected 10 fields");
    TraceRecord r;
    r.epoch = parse_uint(f[0], where);
    r.inner_iter = parse_uint(f[1], where);
    r.wall_ms = parse_double(f[2], where);
    r.q_inner_val = parse_uint(f[3], where);
    r.q_inner_jac = parse_uint(f[4], where);
    r.q_outer_grad = parse_uint(f[5], where);
    r.objective = parse_double(f[6], where);
    r.gap = parse_double(f[7], where);
    r.grad_map_sq = parse_double(f[8], where);
    r.composite_grad_sq = parse_double(f[9], where);
    rows.push_back(r);
  }
  if (rows.empty()) throw DomainError(source + ": CSV has no data rows");
  return rows;
}

std::filesystem::path cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  if (!cfg.problem.file.empty()) {
    throw DomainError("gen: the config loads its problem from a file; nothing to generate");
  }
  ProblemInstance inst = build_problem(cfg.problem);
  inst.regularizer = cfg.regularizer;
  const std::filesystem::path path = out_dir / (cfg.name + ".problem.json");
  write_problem_file(path, inst);
  return path;
}

SolveResult run_solver(const SolverSpec& spec, const ProblemInstance& inst, const Regularizer& h,
                       double eta, std::uint64_t seed, const TraceOptions& opts) {
  const CompositionProblem& p = *inst.composition;
  constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max() / 4;
  if (spec.name == "vrsc_pg") {
    VrscpgConfig c;
    c.eta = eta;
    c.m = spec.m;
    c.epochs = spec.epochs > 0 ? spec.epochs : kUnbounded;
    c.A = spec.A;
    c.B = spec.B;
    c.b1 = spec.b1;
    c.sampling = spec.sampling;
    if (spec.sampling == SamplingMode::full_pass) {
      c.A = c.B = p.n2();
      c.b1 = p.n1();
    }
    c.seed = seed;
    return vrsc_pg(p, h, c, opts);
  }
  if (spec.name == "scpg") {
    ScpgConfig c;
    c.alpha0 = eta;
    c.beta0 = spec.beta0;
    c.exp_alpha = spec.exp_alpha;
    c.exp_beta = spec.exp_beta;
    c.iters = spec.iters > 0 ? spec.iters : kUnbounded;
    c.seed = seed;
    return scpg_baseline(p, h, c, opts);
  }
  if (spec.name == "prox_svrg") {
    if (!inst.finite_sum) throw DomainError("prox_svrg needs a finite-sum (lasso) problem");
    ProxSvrgConfig c;
    c.eta = eta;
    c.m = spec.m;
    c.epochs = spec.epochs > 0 ? spec.epochs : kUnbounded;
    c.seed = seed;
    return prox_svrg(*inst.finite_sum, h, c, opts);
  }
  if (spec.name == "prox_full_gradient") {
    ProxFullGradientConfig c;
    c.eta = eta;
    c.iters = spec.iters > 0 ? spec.iters : kUnbounded;
    c.tol = spec.tol;
    return prox_full_gradient(p, h, c, opts);
  }
  throw DomainError("unknown solver '" + spec.name + "'");
}

RunSummary cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const ProblemInstance inst = build_problem(cfg.problem);
  const Regularizer h = effective_regularizer(cfg, inst);

  RunSummary summary;
  summary.reference = compute_reference_optimum(*inst.composition, h, cfg.reference);

  TraceOptions opts;
  opts.stride = cfg.trace_stride;
  opts.x_star = summary.reference;
  opts.max_queries = cfg.max_queries;
  opts.max_wall_seconds = cfg.max_wall_seconds;

  auto attempt = [&](const SolverSpec& spec, double eta, std::uint64_t seed, RunRecord& rec) {
    rec.label = spec.label;
    rec.solver = spec.name;
    rec.seed = seed;
    rec.eta = eta;
    try {
      SolveResult r = run_solver(spec, inst, h, eta, seed, opts);
      rec.status = std::string(to_string(r.stop));
      rec.queries = r.counts.total();
      rec.trace = std::move(r.trace);
    } catch (const DivergedError& e) {
      rec.status = "diverged";
      rec.error = e.what();
      rec.queries = e.partial().counts.total();
      rec.trace = e.partial().trace;
    }
    rec.final_gap = rec.status == "diverged" ? std::numeric_limits<double>::infinity()
                                             : final_gap_of(rec.trace);
    rec.min_gap = min_gap_of(rec.trace);
    rec.min_grad_map_sq = trace_min_grad_map_sq(rec.trace);
  };

  for (const SolverSpec& spec : cfg.solvers) {
    double eta = spec.eta;
    if (!spec.eta_grid.empty()) {
      // Final gaps at the rounding floor are ties; the faster step wins them.
      const double floor = kTuneGapFloor * std::max(1.0, std::fabs(summary.reference.objective));
      auto key = [&](const RunRecord& rec) {
        if (rec.final_gap <= floor) {
          for (const TraceRecord& t : rec.trace) {
            if (t.gap <= floor) return std::pair{0.0, static_cast<double>(t.queries())};
          }
        }
        return std::pair{1.0, rec.final_gap};
      };
      std::size_t best = 0;
      std::pair<double, double> best_key{2.0, 0.0};
      std::vector<TuneRecord> tried;
      for (std::size_t k = 0; k < spec.eta_grid.size(); ++k) {
        RunRecord rec;
        attempt(spec, spec.eta_grid[k], cfg.tune_seed, rec);
        tried.push_back({spec.label, spec.eta_grid[k], rec.final_gap, false});
        if (key(rec) < best_key) {
          best_key = key(rec);
          best = k;
        }
      }
      tried[best].chosen = true;
      eta = spec.eta_grid[best];
      summary.tuning.insert(summary.tuning.end(), tried.begin(), tried.end());
    }
    for (std::uint64_t seed : cfg.seeds) {
      RunRecord rec;
      attempt(spec, eta, seed, rec);
      rec.csv = out_dir / (spec.label + "_seed" + std::to_string(seed) + ".csv");
      write_text_file(rec.csv, trace_to_csv(rec.trace));
      summary.runs.push_back(std::move(rec));
    }
  }

  json doc;
  doc["name"] = cfg.name;
  doc["config"] = json::parse(cfg.raw_json);
  doc["regularizer"] = h.describe();
  doc["reference"] = {{"x_star", summary.reference.x.values()},
                      {"objective", summary.reference.objective},
                      {"residual", summary.reference.residual},
                      {"eta", summary.reference.eta},
                      {"verified", summary.reference.verified}};
  json runs = json::array();
  for (const RunRecord& r : summary.runs) {
    runs.push_back({{"label", r.label},
                    {"solver", r.solver},
                    {"seed", r.seed},
                    {"eta", r.eta},
                    {"status", r.status},
                    {"error", r.error},
                    {"final_gap", finite_or_null(r.final_gap)},
                    {"min_gap", finite_or_null(r.min_gap)},
                    {"min_grad_map_sq", finite_or_null(r.min_grad_map_sq)},
                    {"queries", r.queries},
                    {"csv", r.csv.filename().string()}});
  }
  doc["runs"] = runs;
  json tuning = json::array();
  for (const TuneRecord& t : summary.tuning) {
    tuning.push_back({{"label", t.label},
                      {"eta", t.eta},
                      {"final_gap", finite_or_null(t.final_gap)},
                      {"chosen", t.chosen}});
  }
  doc["tuning"] = tuning;
  doc["versions"] = {{"composolve", kVersion},
                     {"kernels", std::string(kernels::active().name)},
                     {"compiler", __VERSION__}};
  write_text_file(out_dir / "summary.json", doc.dump(2) + "\n");
  return summary;
}

std::vector<std::filesystem::path> summary_csvs(const std::filesystem::path& out_dir) {
  const json doc = json::parse(read_text_file(out_dir / "summary.json"), nullptr, false);
  if (doc.is_discarded() || !doc.contains("runs")) {
    throw DomainError((out_dir / "summary.json").string() + ": not a run summary");
  }
  std::vector<std::filesystem::path> out;
  for (const json& r : doc["runs"]) out.push_back(out_dir / r.value("csv", ""));
  return out;
}

}  // namespace composolve::app
