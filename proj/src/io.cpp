#include "composolve/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "composolve/errors.hpp"

namespace composolve {
namespace {

using nlohmann::json;

// Keeps a lasso problem alive alongside its composition view.
struct LassoHolder {
  explicit LassoHolder(LassoProblem p) : base(std::move(p)), view(base) {}
  LassoProblem base;
  FiniteSumComposition view;
};

json flat_array(std::span<const double> values) { return json(std::vector<double>(values.begin(), values.end())); }

std::size_t dim(const json& dims, const char* key) {
  if (!dims.contains(key) || !dims[key].is_number_unsigned()) {
    throw DomainError(std::string("problem file: dims.") + key + " must be a nonnegative integer");
  }
  return dims[key].get<std::size_t>();
}

std::vector<double> numbers(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw DomainError(std::string("problem file: missing array '") + key + "'");
  }
  std::vector<double> out;
  out.reserve(doc[key].size());
  for (const json& v : doc[key]) {
    if (!v.is_number()) throw DomainError(std::string("problem file: non-numeric entry in ") + key);
    out.push_back(v.get<double>());
  }
  if (out.size() != expected) {
    throw DomainError(std::string("problem file: array '") + key + "' has " +
                      std::to_string(out.size()) + " entries, expected " +
                      std::to_string(expected));
  }
  return out;
}

Matrix matrix(const json& doc, const char* key, std::size_t rows, std::size_t cols) {
  return Matrix::from(rows, cols, numbers(doc, key, rows * cols));
}

json regularizer_json(const Regularizer& h) {
  if (h.is_zero()) return json{{"kind", "zero"}};
  return json{{"kind", "l1"}, {"lambda", h.lambda()}};
}

Regularizer regularizer_from(const json& r) {
  const std::string kind = r.value("kind", "zero");
  if (kind == "zero") return Regularizer::zero();
  if (kind == "l1") {
    if (!r.contains("lambda") || !r["lambda"].is_number()) {
      throw DomainError("regularizer: l1 requires a numeric lambda");
    }
    return Regularizer::l1(r["lambda"].get<double>());
  }
  throw DomainError("regularizer: unknown kind '" + kind + "'");
}

}  // namespace

ProblemInstance wrap(PortfolioProblem p) {
  return {"portfolio", std::make_shared<const PortfolioProblem>(std::move(p)), nullptr, {}};
}

ProblemInstance wrap(PolicyEvalProblem p) {
  return {"policy_eval", std::make_shared<const PolicyEvalProblem>(std::move(p)), nullptr, {}};
}

ProblemInstance wrap(LinQuadProblem p) {
  return {"linquad", std::make_shared<const LinQuadProblem>(std::move(p)), nullptr, {}};
}

ProblemInstance wrap(LassoProblem p) {
  auto holder = std::make_shared<const LassoHolder>(std::move(p));
  ProblemInstance inst;
  inst.kind = "lasso";
  inst.composition = std::shared_ptr<const CompositionProblem>(holder, &holder->view);
  inst.finite_sum = std::shared_ptr<const FiniteSumProblem>(holder, &holder->base);
  return inst;
}

std::string problem_to_json(const ProblemInstance& inst) {
  json doc;
  doc["kind"] = inst.kind;
  if (inst.kind == "portfolio") {
    const auto& p = dynamic_cast<const PortfolioProblem&>(*inst.composition);
    doc["dims"] = {{"n", p.rewards().rows()}, {"N", p.rewards().cols()}};
    doc["rewards"] = flat_array(p.rewards().flat());
  } else if (inst.kind == "policy_eval") {
    const auto& p = dynamic_cast<const PolicyEvalProblem&>(*inst.composition);
    doc["dims"] = {{"S", p.num_states()}};
    doc["gamma"] = p.gamma();
    doc["transitions"] = flat_array(p.transitions().flat());
    doc["rewards"] = flat_array(p.rewards().flat());
  } else if (inst.kind == "linquad") {
    const auto& p = dynamic_cast<const LinQuadProblem&>(*inst.composition);
    doc["dims"] = {{"n1", p.n1()}, {"n2", p.n2()}, {"M", p.dim_y()}, {"N", p.dim_x()}};
    std::vector<double> maps, offsets, targets;
    for (const Matrix& q : p.inner_maps()) maps.insert(maps.end(), q.flat().begin(), q.flat().end());
    for (const Vector& c : p.inner_offsets()) offsets.insert(offsets.end(), c.begin(), c.end());
    for (const Vector& b : p.outer_targets()) targets.insert(targets.end(), b.begin(), b.end());
    doc["inner_maps"] = maps;
    doc["inner_offsets"] = offsets;
    doc["outer_targets"] = targets;
  } else if (inst.kind == "lasso") {
    const auto& p = dynamic_cast<const LassoProblem&>(*inst.finite_sum);
    doc["dims"] = {{"n", p.n()}, {"N", p.dim()}};
    doc["design"] = flat_array(p.design().flat());
    doc["targets"] = flat_array(p.targets().span());
  } else {
    throw DomainError("problem_to_json: unknown kind '" + inst.kind + "'");
  }
  if (inst.regularizer) doc["regularizer"] = regularizer_json(*inst.regularizer);
  return doc.dump() + "\n";
}

ProblemInstance problem_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("problem file: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw DomainError("problem file: missing 'kind'");
  }
  if (!doc.contains("dims") || !doc["dims"].is_object()) {
    throw DomainError("problem file: missing 'dims'");
  }
  const std::string kind = doc["kind"];
  const json& dims = doc["dims"];

  ProblemInstance inst;
  if (kind == "portfolio") {
    const std::size_t n = dim(dims, "n"), N = dim(dims, "N");
    inst = wrap(PortfolioProblem(matrix(doc, "rewards", n, N)));
  } else if (kind == "policy_eval") {
    const std::size_t S = dim(dims, "S");
    if (!doc.contains("gamma") || !doc["gamma"].is_number()) {
      throw DomainError("problem file: policy_eval requires 'gamma'");
    }
    inst = wrap(PolicyEvalProblem(matrix(doc, "transitions", S, S), matrix(doc, "rewards", S, S),
                                  doc["gamma"].get<double>()));
  } else if (kind == "linquad") {
    const std::size_t n1 = dim(dims, "n1"), n2 = dim(dims, "n2");
    const std::size_t M = dim(dims, "M"), N = dim(dims, "N");
    const std::vector<double> maps = numbers(doc, "inner_maps", n2 * M * N);
    const std::vector<double> offsets = numbers(doc, "inner_offsets", n2 * M);
    const std::vector<double> targets = numbers(doc, "outer_targets", n1 * M);
    std::vector<Matrix> q;
    std::vector<Vector> c, b;
    for (std::size_t j = 0; j < n2; ++j) {
      q.push_back(Matrix::from(M, N, {maps.begin() + j * M * N, maps.begin() + (j + 1) * M * N}));
      c.push_back(Vector::from({offsets.begin() + j * M, offsets.begin() + (j + 1) * M}));
    }
    for (std::size_t i = 0; i < n1; ++i) {
      b.push_back(Vector::from({targets.begin() + i * M, targets.begin() + (i + 1) * M}));
    }
    inst = wrap(LinQuadProblem(std::move(q), std::move(c), std::move(b)));
  } else if (kind == "lasso") {
    const std::size_t n = dim(dims, "n"), N = dim(dims, "N");
    inst = wrap(LassoProblem(matrix(doc, "design", n, N), Vector::from(numbers(doc, "targets", n))));
  } else {
    throw DomainError("problem file: unknown kind '" + kind + "'");
  }
  if (doc.contains("regularizer")) inst.regularizer = regularizer_from(doc["regularizer"]);
  return inst;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory for '" + path.string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void write_problem_file(const std::filesystem::path& path, const ProblemInstance& inst) {
  write_text_file(path, problem_to_json(inst));
}

ProblemInstance read_problem_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return problem_from_json(text);
  } catch (const DomainError& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

}  // namespace composolve
