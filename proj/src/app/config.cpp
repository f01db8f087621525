#include <json.hpp>

#include "composolve/app.hpp"
#include "composolve/errors.hpp"

namespace composolve::app {
namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw DomainError(std::string("config: field '") + key + "' has the wrong type");
  }
}

std::size_t count_or(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  if (!obj[key].is_number_unsigned()) {
    throw DomainError(std::string("config: field '") + key + "' must be a nonnegative integer");
  }
  return obj[key].get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return (base / path).lexically_normal();
}

ProblemSpec parse_problem(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw DomainError("config: 'problem' must be an object");
  ProblemSpec p;
  if (j.contains("file")) {
    p.file = resolve(base, get_or<std::string>(j, "file", ""));
    p.kind = get_or<std::string>(j, "kind", "");
    return p;
  }
  p.kind = get_or<std::string>(j, "kind", "");
  if (p.kind != "portfolio" && p.kind != "policy_eval" && p.kind != "linquad" &&
      p.kind != "lasso") {
    throw DomainError("config: problem.kind must be portfolio, policy_eval, linquad or lasso");
  }
  const json params = j.contains("params") ? j["params"] : json::object();
  if (!params.is_object()) throw DomainError("config: problem.params must be an object");
  p.n = count_or(params, "n", p.n);
  p.N = count_or(params, "N", p.N);
  p.kappa_cov = get_or<double>(params, "kappa_cov", p.kappa_cov);
  p.S = count_or(params, "S", p.S);
  p.num_actions = count_or(params, "num_actions", p.num_actions);
  p.gamma = get_or<double>(params, "gamma", p.gamma);
  p.noise = get_or<double>(params, "noise", p.noise);
  p.linquad.n1 = count_or(params, "n1", p.linquad.n1);
  p.linquad.n2 = count_or(params, "n2", p.linquad.n2);
  p.linquad.dim_y = count_or(params, "M", p.linquad.dim_y);
  p.linquad.dim_x = count_or(params, "N", p.linquad.dim_x);
  p.linquad.map_noise = get_or<double>(params, "map_noise", p.linquad.map_noise);
  p.linquad.target_noise = get_or<double>(params, "target_noise", p.linquad.target_noise);
  p.linquad.map_scale = get_or<double>(params, "map_scale", p.linquad.map_scale);
  p.data_seed = get_or<std::uint64_t>(j, "data_seed", p.data_seed);
  return p;
}

SolverSpec parse_solver(const json& j) {
  if (!j.is_object()) throw DomainError("config: each solver must be an object");
  SolverSpec s;
  s.name = get_or<std::string>(j, "name", "");
  if (s.name != "vrsc_pg" && s.name != "scpg" && s.name != "prox_svrg" &&
      s.name != "prox_full_gradient") {
    throw DomainError("config: unknown solver '" + s.name + "'");
  }
  s.label = get_or<std::string>(j, "label", s.name);
  s.eta = get_or<double>(j, s.name == "scpg" ? "alpha0" : "eta", s.eta);
  if (j.contains("eta_grid")) s.eta_grid = get_or<std::vector<double>>(j, "eta_grid", {});
  s.m = count_or(j, "m", s.m);
  s.epochs = count_or(j, "epochs", s.epochs);
  s.A = count_or(j, "A", s.A);
  s.B = count_or(j, "B", s.B);
  s.b1 = count_or(j, "b1", s.b1);
  const std::string sampling = get_or<std::string>(j, "sampling", "with_replacement");
  if (sampling == "with_replacement") {
    s.sampling = SamplingMode::with_replacement;
  } else if (sampling == "full_pass") {
    s.sampling = SamplingMode::full_pass;
  } else {
    throw DomainError("config: sampling must be with_replacement or full_pass");
  }
  s.beta0 = get_or<double>(j, "beta0", s.beta0);
  s.exp_alpha = get_or<double>(j, "exp_alpha", s.exp_alpha);
  s.exp_beta = get_or<double>(j, "exp_beta", s.exp_beta);
  s.iters = count_or(j, "iters", s.iters);
  s.tol = get_or<double>(j, "tol", s.tol);

  if (!(s.eta > 0.0)) throw DomainError("config: solver '" + s.label + "' needs a positive step");
  for (double e : s.eta_grid) {
    if (!(e > 0.0)) throw DomainError("config: eta_grid entries must be positive");
  }
  if (s.m == 0 || s.A == 0 || s.B == 0 || s.b1 == 0) {
    throw DomainError("config: solver '" + s.label + "' needs m, A, B, b1 >= 1");
  }
  return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DomainError("config: top level must be an object");

  ExperimentConfig cfg;
  cfg.raw_json = doc.dump();
  cfg.name = get_or<std::string>(doc, "name", cfg.name);
  if (!doc.contains("problem")) throw DomainError("config: missing 'problem'");
  cfg.problem = parse_problem(doc["problem"], base_dir);

  if (doc.contains("regularizer")) {
    const json& r = doc["regularizer"];
    const std::string kind = get_or<std::string>(r, "kind", "zero");
    if (kind == "zero") {
      cfg.regularizer = Regularizer::zero();
    } else if (kind == "l1") {
      cfg.regularizer = Regularizer::l1(get_or<double>(r, "lambda", 0.0));
    } else {
      throw DomainError("config: regularizer.kind must be zero or l1");
    }
  }

  if (doc.contains("solvers")) {
    if (!doc["solvers"].is_array()) throw DomainError("config: 'solvers' must be an array");
    for (const json& s : doc["solvers"]) cfg.solvers.push_back(parse_solver(s));
  }
  for (std::size_t a = 0; a < cfg.solvers.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.solvers.size(); ++b) {
      if (cfg.solvers[a].label == cfg.solvers[b].label) {
        throw DomainError("config: duplicate solver label '" + cfg.solvers[a].label + "'");
      }
    }
  }

  if (doc.contains("seeds")) cfg.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", {});
  if (cfg.seeds.empty()) throw DomainError("config: at least one seed is required");
  cfg.tune_seed = get_or<std::uint64_t>(doc, "tune_seed", cfg.tune_seed);

  const json budget = doc.contains("budget") ? doc["budget"] : json::object();
  cfg.max_queries = get_or<std::uint64_t>(budget, "max_queries", 0);
  cfg.max_wall_seconds = get_or<double>(budget, "max_wall_seconds", 0.0);
  if (cfg.max_wall_seconds < 0.0) throw DomainError("config: budget.max_wall_seconds < 0");
  if (cfg.max_queries == 0 && cfg.max_wall_seconds == 0.0) {
    throw DomainError("config: budget needs max_queries or max_wall_seconds");
  }

  const json trace = doc.contains("trace") ? doc["trace"] : json::object();
  cfg.trace_stride = count_or(trace, "stride", cfg.trace_stride);

  const json ref = doc.contains("reference") ? doc["reference"] : json::object();
  cfg.reference.tol = get_or<double>(ref, "tol", cfg.reference.tol);
  cfg.reference.max_iters = count_or(ref, "max_iters", cfg.reference.max_iters);
  cfg.reference.eta = get_or<double>(ref, "eta", cfg.reference.eta);

  cfg.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "out"));

  for (const SolverSpec& s : cfg.solvers) {
    const bool lasso = cfg.problem.kind == "lasso";
    if (s.name == "prox_svrg" && !lasso && cfg.problem.file.empty()) {
      throw DomainError("config: prox_svrg runs on lasso problems only");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_config(text, path.parent_path());
  } catch (const DomainError& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

ProblemInstance build_problem(const ProblemSpec& spec) {
  if (!spec.file.empty()) {
    ProblemInstance inst = read_problem_file(spec.file);
    if (!spec.kind.empty() && spec.kind != inst.kind) {
      throw DomainError("problem file '" + spec.file.string() + "' holds a " + inst.kind +
                        " instance, config says " + spec.kind);
    }
    return inst;
  }
  RngStream rng(spec.data_seed);
  if (spec.kind == "portfolio") {
    return wrap(make_portfolio(gen_gaussian_rewards(spec.n, spec.N, spec.kappa_cov, rng)));
  }
  if (spec.kind == "policy_eval") {
    MdpData mdp = gen_mdp(spec.S, spec.num_actions, rng);
    return wrap(make_policy_eval(std::move(mdp.transitions), std::move(mdp.rewards), spec.gamma));
  }
  if (spec.kind == "linquad") return wrap(gen_linquad(spec.linquad, rng));
  if (spec.kind == "lasso") return wrap(gen_lasso(spec.n, spec.N, spec.noise, rng));
  throw DomainError("build_problem: unknown kind '" + spec.kind + "'");
}

Regularizer effective_regularizer(const ExperimentConfig& cfg, const ProblemInstance& inst) {
  if (cfg.regularizer) return *cfg.regularizer;
  if (inst.regularizer) return *inst.regularizer;
  return Regularizer::zero();
}

}  // namespace composolve::app
