#pragma once

#include <cstdint>
#include <string>

namespace qhk {

struct PropsOptions {
  std::uint64_t seed = 1;
  long count = 10000;
  int max_vertices = 4;
  int max_rank = 4;
  double gap_tol = 1e-10;
  double adjoint_tol = 1e-10;
};

struct PropsSummary {
  long instances = 0;
  double moment_log_min = 0;
  double power_bracket_min = 0;  // over varsigma in {1/4, 1/2, 1}
  double adjoint_max = 0;
  double moment_hermitian_max = 0;
  long failures = 0;
  std::string first_failure;  // JSON dump of the offending instance, empty if none
};

PropsSummary run_props(const PropsOptions& opt);

}  // namespace qhk
