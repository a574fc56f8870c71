#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhk/sphere_grid.hpp"
#include "qhk/stability.hpp"

namespace qhk {

struct SolveConfig {
  double tol = 1e-8;             // sup residual at epsilon = 0
  double eps_start = 1.0;
  double eps_ratio = 0.5;
  double eps_floor = 1e-8;
  double level_tol = 1e-6;       // sup residual accepted at intermediate epsilon
  int max_newton = 50;
  double blowup_threshold = 40;
  double envelope_slack = 1.05;
  int envelope_levels = 3;
  double collapse_threshold = 1e-3;
  int cg_max_iter = 2000;
  double cg_rtol = 1e-11;
  std::optional<double> c_delta;  // skip calibration when set
};

// Throws InvalidInput for a schedule that does not decrease.
void check_config(const SolveConfig& cfg);

// Everything the residual needs, precomputed on the grid.
struct HeSystem {
  ModelPtr model;
  StabilityParams params;
  SphereGrid grid;
  Rational gamma_exact;
  double gamma = 0;
  double lambda = 0;
  double c_delta = 0.5;
  std::vector<double> sigma, tau, k0;
  struct Arrow {
    std::size_t tail, head;
    GridField w;
  };
  std::vector<Arrow> arrows;

  std::size_t num_vertices() const { return sigma.size(); }
};

// Throws FixtureUnsupported (Hopf) or RankUnsupported (rank >= 2 somewhere).
HeSystem prepare_system(const ModelPtr& model, const StabilityParams& params, const SphereGrid& grid,
                        double c_delta = 0.5);

struct ScalarMetricState {
  std::vector<GridField> u;
  double epsilon = 1.0;
  double mean_sum_u = 0;  // quadrature of sum_i u_i, recorded after normalizing
};

ScalarMetricState zero_state(const HeSystem& sys, double epsilon);
// Shift every u_i by the same constant so that quadrature(sum u_i) = 0.
void normalize(const HeSystem& sys, ScalarMetricState& state);

std::vector<GridField> assemble_residual(const HeSystem& sys, const ScalarMetricState& state,
                                         bool include_eps_term = true);
// Linearization applied to per-vertex grid fields (no spectral projection).
std::vector<GridField> apply_jacobian(const HeSystem& sys, const ScalarMetricState& state,
                                      const std::vector<GridField>& du);

double residual_sup(const std::vector<GridField>& r);

struct NewtonStepReport {
  double residual_before = 0;  // sup norms on the grid
  double residual_after = 0;
  double step_sup = 0;
  double damping = 0;
  int cg_iterations = 0;
};

// One damped Newton step at state.epsilon (which may be 0 for a polish).
// Throws LinearSolveFailure / LineSearchFailure.
NewtonStepReport newton_step(const HeSystem& sys, ScalarMetricState& state, const SolveConfig& cfg);

// Lanczos estimate of the extreme eigenvalues of the projected linearization.
std::pair<double, double> ritz_extremes(const HeSystem& sys, const ScalarMetricState& state, int steps,
                                        std::uint64_t seed = 7);

struct CalibrationRecord {
  double c_delta = 0.5;
  double ritz_min_plus = 0, ritz_min_minus = 0;
  bool plus_positive = false, minus_positive = false;
  bool plus_solves = false, minus_solves = false;
};

// Fixes the sign of the Laplacian term: the linearization must be positive
// definite on a single-vertex probe, and the stable nonconstant instance must
// solve. Throws CalibrationAmbiguous when the two checks do not single out
// one sign. Cached per grid shape.
CalibrationRecord calibrate(const SphereGrid& grid);

struct Diagnostics {
  std::vector<double> m;       // sup |u_i|
  double mK = 0;               // |Q0| * sum_i sup |K_i|
  std::vector<double> margin;  // mK / eps - m_i
};

Diagnostics diagnostics(const HeSystem& sys, const ScalarMetricState& state);

enum class Outcome { Converged, BlowUp, Stalled };
const char* outcome_name(Outcome o);

struct TraceEntry {
  double epsilon = 0;
  std::vector<double> max_abs_u;
  std::vector<double> sup_u;
  double residual = 0;
  int newton_iterations = 0;
  double envelope = 0;  // mK / eps
  bool within_envelope = true;
};

struct ArrowIdentity {
  std::string arrow;
  double lhs = 0, rhs = 0, residual = 0;  // residual is relative when the sides are not tiny
};

struct VerifyBlock {
  std::vector<double> residual_sup, residual_l2;  // per vertex, epsilon = 0
  double gamma_identity = 0;
  std::vector<ArrowIdentity> arrow_identity;
  double envelope_min_margin = 0;  // min over the trace of slack * mK/eps - m_i
  bool passed = false;
};

struct ThetaProjector {
  std::vector<std::size_t> support;    // deepest cluster of sup u
  std::vector<std::size_t> collapsed;  // sup of the rescaled metric below the threshold
  std::vector<double> scale;           // exp(sup u_i - max_k sup u_k)
  double idempotent_residual = 0;
  double selfadjoint_residual = 0;
  double closure_residual = 0;  // sum of integrated |phi_a|^2 leaving the support
  bool proper = false;
  bool arrow_closed = false;
  SlopeReport slope_sub, slope_total;
  bool slope_ok = false;  // mu(F) >= mu(E)
  std::vector<std::size_t> max_slope_support;
  bool matches_max_slope = false;
};

struct SolveReport {
  Outcome outcome = Outcome::Stalled;
  std::string note;
  CalibrationRecord calibration;
  double lambda = 0;
  Rational gamma;
  double mK = 0;
  std::vector<double> residual_sup, residual_l2;  // final state, epsilon term dropped
  std::vector<TraceEntry> trace;
  std::optional<VerifyBlock> verification;
  std::optional<ThetaProjector> destabilizer;
};

struct SolveResult {
  ScalarMetricState state;
  SolveReport report;
};

SolveResult continuity_solve(const ModelPtr& model, const StabilityParams& params, const SphereGrid& grid,
                             const SolveConfig& cfg = {});

// Throws PreconditionViolated unless the run blew up, NoCollapseDetected
// when no vertex separates from the top level.
ThetaProjector extract_destabilizer(const HeSystem& sys, const ScalarMetricState& state, Outcome outcome,
                                    const SolveConfig& cfg);

// Scalar form of the integration-by-parts identity for every arrow.
std::vector<ArrowIdentity> arrow_identities(const HeSystem& sys, const ScalarMetricState& state);

// Throws PreconditionViolated unless the run converged.
VerifyBlock verify_he(const HeSystem& sys, const ScalarMetricState& state, Outcome outcome,
                      const std::vector<TraceEntry>& trace, const SolveConfig& cfg);

}  // namespace qhk
