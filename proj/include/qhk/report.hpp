#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qhk/problem_io.hpp"
#include "qhk/props.hpp"

namespace qhk {

inline constexpr const char* kToolVersion = QHK_VERSION;

enum ExitCode { kExitOk = 0, kExitInvalid = 2, kExitNoConvergence = 3, kExitPropertyFailure = 4 };

struct Artifact {
  std::string name;
  std::string content;
};

// A finished command: machine payload plus side files. Deterministic given
// the input text and flags; wall-clock timings are deliberately left out.
struct Report {
  std::string command;
  std::string input_digest;  // sha256 of the input bytes, hex
  std::string payload_json;  // the command-specific object
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;

  std::string to_json() const;    // schema "qhk-report/1"
  std::string render_human() const;
};

std::string sha256_hex(const std::string& bytes);

// Throws InvalidInput for documents that are not qhk reports.
Report report_from_json(const std::string& text);

struct SolveOptions {
  std::optional<double> tol, eps_ratio, eps_floor, blowup_threshold;
  std::optional<int> max_newton, n_theta, n_phi;
  bool dump_fields = false;
};

// Each runner takes the raw problem text (for the digest) and throws Error
// for input it cannot use.
Report run_validate(const std::string& text);
Report run_stability(const std::string& text);
Report run_chambers(const std::string& text, const std::optional<std::string>& box);
Report run_solve(const std::string& text, const SolveOptions& opt);
Report run_props_command(const PropsOptions& opt);

}  // namespace qhk
