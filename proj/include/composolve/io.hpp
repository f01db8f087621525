#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "composolve/problems.hpp"
#include "composolve/regularizers.hpp"

namespace composolve {

/// A loaded or generated problem. `composition` is always set; lasso
/// instances also expose the underlying finite sum.
struct ProblemInstance {
  std::string kind;  // portfolio | policy_eval | linquad | lasso
  std::shared_ptr<const CompositionProblem> composition;
  std::shared_ptr<const FiniteSumProblem> finite_sum;
  std::optional<Regularizer> regularizer;
};

ProblemInstance wrap(PortfolioProblem p);
ProblemInstance wrap(PolicyEvalProblem p);
ProblemInstance wrap(LinQuadProblem p);
ProblemInstance wrap(LassoProblem p);

/// Problem file layout (one JSON object):
///   kind          "portfolio" | "policy_eval" | "linquad" | "lasso"
///   dims          sizes, e.g. {"n": 200, "N": 50}
///   <arrays>      row-major number arrays named per kind
///   gamma         policy_eval only
///   regularizer   optional {"kind": "zero" | "l1", "lambda": ...}
/// Doubles are written in shortest round-trip form, so a load reproduces
/// the data bit for bit.
std::string problem_to_json(const ProblemInstance& inst);
/// Throws DomainError on malformed or invalid content.
ProblemInstance problem_from_json(std::string_view text);

/// Throws IoError naming the path.
void write_problem_file(const std::filesystem::path& path, const ProblemInstance& inst);
ProblemInstance read_problem_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace composolve
