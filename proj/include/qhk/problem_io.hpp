#pragma once

#include <optional>
#include <string>

#include "qhk/chambers.hpp"
#include "qhk/he_solver.hpp"

namespace qhk {

// A parsed problem file. The model is structurally complete but not yet
// validated; call validate_model on it.
struct Problem {
  QBundleModel model;
  bool has_params = false;
  StabilityParams params;
  int n_theta = 64;
  int n_phi = 128;
  Rational volume{1};
  SolveConfig solver;
  std::string solver_json;  // overrides as given, re-emitted verbatim in canonical form
  std::optional<std::string> box;
};

// Throws InvalidInput (malformed JSON or schema) and the quiver errors
// (DuplicateId, DanglingEndpoint). Parameter values never pass through
// floating point.
Problem parse_problem(const std::string& text);
std::string read_text_file(const std::string& path);  // IoFailure
Problem load_problem(const std::string& path);

// Canonical JSON; parse(serialize(p)) == p and serialize is idempotent.
std::string serialize_problem(const Problem& p);

// Throws InvalidInput when the problem has no params block.
const StabilityParams& require_params(const Problem& p);

}  // namespace qhk
