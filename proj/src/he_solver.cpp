#include "qhk/he_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include "qhk/endo.hpp"

namespace qhk {

void check_config(const SolveConfig& c) {
  if (!(c.tol > 0)) throw Error(ErrorCode::InvalidInput, "tolerance must be positive");
  if (!(c.eps_ratio > 0 && c.eps_ratio < 1)) throw Error(ErrorCode::InvalidInput, "epsilon ratio must lie in (0,1)");
  if (!(c.eps_floor > 0 && c.eps_floor <= c.eps_start))
    throw Error(ErrorCode::InvalidInput, "epsilon floor must lie in (0, start]");
  if (c.max_newton < 1) throw Error(ErrorCode::InvalidInput, "max Newton iterations must be >= 1");
  if (!(c.blowup_threshold > 0)) throw Error(ErrorCode::InvalidInput, "blow-up threshold must be positive");
  if (!(c.collapse_threshold > 0 && c.collapse_threshold < 1))
    throw Error(ErrorCode::InvalidInput, "collapse threshold must lie in (0,1)");
}

HeSystem prepare_system(const ModelPtr& model, const StabilityParams& params, const SphereGrid& grid,
                        double c_delta) {
  const auto& m = model->model();
  if (m.base != Fixture::P1) throw Error(ErrorCode::FixtureUnsupported, "the solver runs on the P1 fixture only");
  if (!m.rank_one()) throw Error(ErrorCode::RankUnsupported, "the solver needs rank 1 at every vertex");
  check_params(m, params);

  HeSystem sys;
  sys.model = model;
  sys.params = params;
  sys.grid = grid;
  sys.gamma_exact = deg_slope_full(*model, params).slope;
  sys.gamma = sys.gamma_exact.get_d();
  sys.lambda = 2 * M_PI / grid.volume();
  sys.c_delta = c_delta;
  for (std::size_t i = 0; i < m.quiver.num_vertices(); ++i) {
    sys.sigma.push_back(params.sigma[i].get_d());
    sys.tau.push_back(params.tau[i].get_d());
    sys.k0.push_back(2 * M_PI * static_cast<double>(m.vertex_deg_plus(i)) / grid.volume());
  }
  for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
    const auto& arr = m.quiver.arrow(a);
    if (m.arrow_data[a].is_zero()) continue;
    long d = m.vertex_deg_plus(arr.head) - m.vertex_deg_plus(arr.tail);
    sys.arrows.push_back({arr.tail, arr.head, section_density(grid, m.arrow_data[a].at(0, 0), d)});
  }
  return sys;
}

ScalarMetricState zero_state(const HeSystem& sys, double epsilon) {
  ScalarMetricState s;
  s.u.assign(sys.num_vertices(), sys.grid.constant(0.0));
  s.epsilon = epsilon;
  return s;
}

void normalize(const HeSystem& sys, ScalarMetricState& s) {
  double total = 0;
  for (const auto& u : s.u) total += sys.grid.quadrature(u);
  double shift = total / (static_cast<double>(s.u.size()) * sys.grid.volume());
  for (auto& u : s.u) u.array() -= shift;
  total = 0;
  for (const auto& u : s.u) total += sys.grid.quadrature(u);
  s.mean_sum_u = total;
}

namespace {

std::vector<GridField> couplings(const HeSystem& sys, const ScalarMetricState& s) {
  std::vector<GridField> rho;
  for (const auto& a : sys.arrows) rho.push_back(a.w.cwiseProduct((s.u[a.head] - s.u[a.tail]).array().exp().matrix()));
  return rho;
}

double max_abs(const std::vector<GridField>& f) {
  double m = 0;
  for (const auto& x : f) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

double residual_sup(const std::vector<GridField>& r) { return max_abs(r); }

std::vector<GridField> assemble_residual(const HeSystem& sys, const ScalarMetricState& s, bool include_eps) {
  const std::size_t n = sys.num_vertices();
  std::vector<GridField> R(n);
  for (std::size_t i = 0; i < n; ++i) {
    R[i] = sys.sigma[i] * (sys.grid.constant(sys.k0[i]) + sys.c_delta * sys.grid.laplacian(s.u[i]));
    R[i].array() -= sys.lambda * (sys.tau[i] + sys.gamma * sys.sigma[i]);
    if (include_eps && s.epsilon != 0) R[i] += s.epsilon * s.u[i];
  }
  auto rho = couplings(sys, s);
  for (std::size_t k = 0; k < sys.arrows.size(); ++k) {
    R[sys.arrows[k].head] += rho[k];
    R[sys.arrows[k].tail] -= rho[k];
  }
  return R;
}

std::vector<GridField> apply_jacobian(const HeSystem& sys, const ScalarMetricState& s,
                                      const std::vector<GridField>& du) {
  const std::size_t n = sys.num_vertices();
  std::vector<GridField> J(n);
  for (std::size_t i = 0; i < n; ++i) J[i] = sys.sigma[i] * sys.c_delta * sys.grid.laplacian(du[i]) + s.epsilon * du[i];
  auto rho = couplings(sys, s);
  for (std::size_t k = 0; k < sys.arrows.size(); ++k) {
    const auto& a = sys.arrows[k];
    GridField d = rho[k].cwiseProduct(du[a.head] - du[a.tail]);
    J[a.head] += d;
    J[a.tail] -= d;
  }
  return J;
}

namespace {

// The linearization in stacked spectral coefficients, restricted to the
// complement of the common constant mode.
struct Galerkin {
  const HeSystem& sys;
  std::size_t nv, nc;
  double eps;
  std::vector<GridField> rho;
  Eigen::VectorXd precond;

  Galerkin(const HeSystem& s, const ScalarMetricState& st)
      : sys(s), nv(s.num_vertices()), nc(s.grid.num_coeffs()), eps(st.epsilon), rho(couplings(s, st)) {
    const auto& lam = sys.grid.eigenvalues();
    precond.resize(static_cast<Eigen::Index>(nv * nc));
    std::vector<double> dbar(nv, 0.0);
    for (std::size_t k = 0; k < sys.arrows.size(); ++k) {
      double mean = sys.grid.quadrature(rho[k]) / sys.grid.volume();
      dbar[sys.arrows[k].head] += mean;
      dbar[sys.arrows[k].tail] += mean;
    }
    for (std::size_t i = 0; i < nv; ++i) {
      for (std::size_t c = 0; c < nc; ++c) {
        double d = std::abs(sys.sigma[i] * sys.c_delta * lam[c] + dbar[i] + eps);
        precond[block(i) + c] = 1.0 / std::max(d, 1e-14);
      }
    }
  }

  Eigen::Index block(std::size_t i) const { return static_cast<Eigen::Index>(i * nc); }

  void project(Eigen::VectorXd& x) const {
    double mean = 0;
    for (std::size_t i = 0; i < nv; ++i) mean += x[block(i)];
    mean /= static_cast<double>(nv);
    for (std::size_t i = 0; i < nv; ++i) x[block(i)] -= mean;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const auto& lam = sys.grid.eigenvalues();
    std::vector<GridField> du(nv);
    for (std::size_t i = 0; i < nv; ++i)
      du[i] = sys.grid.synthesize(x.segment(block(i), static_cast<Eigen::Index>(nc)));
    std::vector<GridField> g(nv, sys.grid.constant(0.0));
    for (std::size_t k = 0; k < sys.arrows.size(); ++k) {
      const auto& a = sys.arrows[k];
      GridField d = rho[k].cwiseProduct(du[a.head] - du[a.tail]);
      g[a.head] += d;
      g[a.tail] -= d;
    }
    Eigen::VectorXd y(x.size());
    for (std::size_t i = 0; i < nv; ++i) {
      auto xi = x.segment(block(i), static_cast<Eigen::Index>(nc));
      y.segment(block(i), static_cast<Eigen::Index>(nc)) =
          sys.grid.analyze(g[i]) + (sys.sigma[i] * sys.c_delta * lam.array() + eps).matrix().cwiseProduct(xi);
    }
    project(y);
    return y;
  }

  Eigen::VectorXd coeffs(const std::vector<GridField>& f) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(nv * nc));
    for (std::size_t i = 0; i < nv; ++i) c.segment(block(i), static_cast<Eigen::Index>(nc)) = sys.grid.analyze(f[i]);
    return c;
  }

  // Preconditioned CG; throws on nonpositive curvature or stagnation.
  Eigen::VectorXd solve(Eigen::VectorXd b, double rtol, int max_iter, int& iters) const {
    project(b);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    iters = 0;
    const double bnorm = b.norm();
    if (bnorm == 0) return x;
    Eigen::VectorXd r = b, z = precond.cwiseProduct(r);
    project(z);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (iters = 1; iters <= max_iter; ++iters) {
      Eigen::VectorXd Ap = apply(p);
      double pAp = p.dot(Ap);
      if (!(pAp > 0)) throw Error(ErrorCode::LinearSolveFailure, "linearization is not positive definite");
      double alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      if (r.norm() <= rtol * bnorm) return x;
      z = precond.cwiseProduct(r);
      project(z);
      double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    throw Error(ErrorCode::LinearSolveFailure, "conjugate gradient did not converge");
  }
};

}  // namespace

NewtonStepReport newton_step(const HeSystem& sys, ScalarMetricState& s, const SolveConfig& cfg) {
  NewtonStepReport rep;
  auto R = assemble_residual(sys, s);
  rep.residual_before = residual_sup(R);
  Galerkin G(sys, s);
  Eigen::VectorXd r = G.coeffs(R);
  G.project(r);
  const double r0 = r.norm();
  if (r0 == 0) {
    rep.residual_after = rep.residual_before;
    return rep;
  }
  Eigen::VectorXd delta = G.solve(-r, cfg.cg_rtol, cfg.cg_max_iter, rep.cg_iterations);

  std::vector<GridField> du(G.nv);
  for (std::size_t i = 0; i < G.nv; ++i)
    du[i] = sys.grid.synthesize(delta.segment(G.block(i), static_cast<Eigen::Index>(G.nc)));
  rep.step_sup = max_abs(du);

  for (double t = 1.0; t >= 1.0 / 4096; t *= 0.5) {
    ScalarMetricState trial = s;
    for (std::size_t i = 0; i < G.nv; ++i) trial.u[i] += t * du[i];
    normalize(sys, trial);
    if (!std::isfinite(max_abs(trial.u))) continue;
    auto Rt = assemble_residual(sys, trial);
    Eigen::VectorXd rt = G.coeffs(Rt);
    G.project(rt);
    double rn = rt.norm();
    if (std::isfinite(rn) && (rn <= (1 - 1e-4 * t) * r0 || rn < 1e-13 * std::max(1.0, r0))) {
      s = std::move(trial);
      rep.damping = t;
      rep.residual_after = residual_sup(Rt);
      return rep;
    }
  }
  throw Error(ErrorCode::LineSearchFailure, "no sufficient decrease along the Newton direction");
}

std::pair<double, double> ritz_extremes(const HeSystem& sys, const ScalarMetricState& s, int steps,
                                        std::uint64_t seed) {
  Galerkin G(sys, s);
  std::mt19937_64 rng(seed);
  const auto N = static_cast<Eigen::Index>(G.nv * G.nc);
  Eigen::VectorXd v(N);
  for (Eigen::Index k = 0; k < N; ++k) v[k] = 2 * uniform01(rng) - 1;
  G.project(v);
  v.normalize();
  steps = static_cast<int>(std::min<Eigen::Index>(steps, N - 1));
  std::vector<Eigen::VectorXd> V{v};
  Eigen::VectorXd alpha(steps), beta(steps);
  int k = 0;
  for (; k < steps; ++k) {
    Eigen::VectorXd w = G.apply(V[k]);
    alpha[k] = w.dot(V[k]);
    for (const auto& q : V) w -= w.dot(q) * q;  // full reorthogonalization
    beta[k] = w.norm();
    if (beta[k] < 1e-12 || k + 1 == steps) {
      ++k;
      break;
    }
    V.push_back(w / beta[k]);
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Diagnostics diagnostics(const HeSystem& sys, const ScalarMetricState& s) {
  Diagnostics d;
  const std::size_t n = sys.num_vertices();
  std::vector<GridField> K(n);
  for (std::size_t i = 0; i < n; ++i)
    K[i] = sys.grid.constant(sys.sigma[i] * sys.k0[i] - sys.lambda * (sys.tau[i] + sys.gamma * sys.sigma[i]));
  for (const auto& a : sys.arrows) {
    K[a.head] += a.w;
    K[a.tail] -= a.w;
  }
  double sum = 0;
  for (const auto& k : K) sum += k.cwiseAbs().maxCoeff();
  d.mK = static_cast<double>(n) * sum;
  for (std::size_t i = 0; i < n; ++i) {
    d.m.push_back(s.u[i].cwiseAbs().maxCoeff());
    d.margin.push_back(s.epsilon > 0 ? d.mK / s.epsilon - d.m.back() : INFINITY);
  }
  return d;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::BlowUp: return "BlowUp";
    case Outcome::Stalled: return "Stalled";
  }
  return "?";
}

std::vector<ArrowIdentity> arrow_identities(const HeSystem& sys, const ScalarMetricState& s) {
  std::vector<ArrowIdentity> out;
  const auto& m = sys.model->model();
  auto rho = couplings(sys, s);
  std::vector<GridField> kappa;
  for (std::size_t i = 0; i < sys.num_vertices(); ++i)
    kappa.push_back(sys.grid.constant(sys.k0[i]) + sys.c_delta * sys.grid.laplacian(s.u[i]));
  std::size_t k = 0;
  for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
    if (m.arrow_data[a].is_zero()) continue;
    const auto& A = sys.arrows[k];
    const GridField& r = rho[k++];
    ArrowIdentity id;
    id.arrow = m.quiver.arrow(a).id;
    id.lhs = sys.grid.quadrature((kappa[A.head] - kappa[A.tail]).cwiseProduct(r));
    auto [gt, gp] = sys.grid.gradient(r);
    GridField integrand(r.size());
    for (Eigen::Index n = 0; n < r.size(); ++n)
      integrand[n] = r[n] > 1e-300 ? (gt[n] * gt[n] + gp[n] * gp[n]) / (2 * r[n]) : 0.0;
    id.rhs = sys.grid.quadrature(integrand);
    double scale = std::max(std::abs(id.lhs), std::abs(id.rhs));
    id.residual = scale > 1e-12 ? std::abs(id.lhs - id.rhs) / scale : std::abs(id.lhs - id.rhs);
    out.push_back(id);
  }
  return out;
}

VerifyBlock verify_he(const HeSystem& sys, const ScalarMetricState& s, Outcome outcome,
                      const std::vector<TraceEntry>& trace, const SolveConfig& cfg) {
  if (outcome != Outcome::Converged)
    throw Error(ErrorCode::PreconditionViolated, "verification needs a converged run");
  VerifyBlock v;
  auto R = assemble_residual(sys, s, false);
  GridField total = sys.grid.constant(0.0);
  for (const auto& r : R) {
    v.residual_sup.push_back(r.cwiseAbs().maxCoeff());
    v.residual_l2.push_back(std::sqrt(sys.grid.quadrature(r.cwiseProduct(r))));
    total += r;
  }
  v.gamma_identity = sys.grid.quadrature(total);
  v.arrow_identity = arrow_identities(sys, s);
  v.envelope_min_margin = INFINITY;
  for (const auto& t : trace)
    for (double mu : t.max_abs_u) v.envelope_min_margin = std::min(v.envelope_min_margin, cfg.envelope_slack * t.envelope - mu);
  v.passed = residual_sup(R) < cfg.tol && std::abs(v.gamma_identity) < 1e-8 && v.envelope_min_margin >= 0;
  for (const auto& a : v.arrow_identity) v.passed = v.passed && a.residual < 1e-4;
  return v;
}

ThetaProjector extract_destabilizer(const HeSystem& sys, const ScalarMetricState& s, Outcome outcome,
                                    const SolveConfig& cfg) {
  if (outcome != Outcome::BlowUp) throw Error(ErrorCode::PreconditionViolated, "destabilizer needs a blow-up");
  const auto& m = sys.model->model();
  const std::size_t n = sys.num_vertices();
  ThetaProjector th;
  std::vector<double> top(n);
  for (std::size_t i = 0; i < n; ++i) top[i] = s.u[i].maxCoeff();
  const double M = *std::max_element(top.begin(), top.end());
  const double gap = std::log(1.0 / cfg.collapse_threshold);
  for (std::size_t i = 0; i < n; ++i) {
    th.scale.push_back(std::exp(top[i] - M));
    if (th.scale.back() < cfg.collapse_threshold) th.collapsed.push_back(i);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return top[a] < top[b]; });
  std::vector<bool> in(n, false);
  in[order[0]] = true;
  for (std::size_t k = 1; k < n && top[order[k]] - top[order[k - 1]] <= gap; ++k) in[order[k]] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) th.support.push_back(i);
  if (th.support.size() == n) throw Error(ErrorCode::NoCollapseDetected, "no vertex separates from the top level");

  th.proper = !th.support.empty() && th.support.size() < n;
  th.arrow_closed = is_arrow_closed(m, in);
  for (const auto& a : sys.arrows)
    if (in[a.tail] && !in[a.head]) th.closure_residual += sys.grid.quadrature(a.w);
  auto sub = support_subobject(m, in);
  th.slope_sub = deg_slope(*sys.model, sub, sys.params);
  th.slope_total = deg_slope_full(*sys.model, sys.params);
  th.slope_ok = th.slope_sub.slope >= th.slope_total.slope;
  th.max_slope_support = max_slope_subobject(*sys.model, sys.params).sub.support();
  th.matches_max_slope = th.max_slope_support == th.support;
  return th;
}

namespace {

QBundleModel probe_nonconstant_model() {
  QBundleModel m;
  m.base = Fixture::P1;
  m.quiver = build_quiver({"i", "j"}, {{"a", "i", "j"}});
  m.vertex_data = {{{Summand::line(0)}}, {{Summand::line(1)}}};
  m.arrow_data = {ArrowData::single(Section({{Rational(0), Rational(0)}, {Rational(1), Rational(0)}}))};
  return m;
}

}  // namespace

CalibrationRecord calibrate(const SphereGrid& grid) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::string>, CalibrationRecord> cache;
  auto key = std::make_tuple(grid.n_theta(), grid.n_phi(), to_string(grid.volume_exact()));
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  CalibrationRecord rec;
  // Single trivial vertex, no arrows: the linearization is sigma c Delta + eps.
  QBundleModel single;
  single.quiver = build_quiver({"v"}, {});
  single.vertex_data = {{{Summand::line(0)}}};
  auto single_model = validate_or_throw(single);
  StabilityParams p1{{Rational(1, 2)}, {Rational(1)}, {Rational(0)}};
  for (double c : {0.5, -0.5}) {
    auto sys = prepare_system(single_model, p1, grid, c);
    auto st = zero_state(sys, 1e-3);
    double lo = ritz_extremes(sys, st, 20).first;
    (c > 0 ? rec.ritz_min_plus : rec.ritz_min_minus) = lo;
    (c > 0 ? rec.plus_positive : rec.minus_positive) = lo > 0;
  }

  auto probe = validate_or_throw(probe_nonconstant_model());
  StabilityParams p2{{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(1)}, {Rational(0), Rational(2)}};
  auto small = make_sphere_grid(16, 32, Rational(1));
  for (double c : {0.5, -0.5}) {
    SolveConfig cfg;
    cfg.c_delta = c;
    cfg.max_newton = 30;
    bool ok = false;
    try {
      auto res = continuity_solve(probe, p2, small, cfg);
      ok = res.report.outcome == Outcome::Converged && res.report.verification && res.report.verification->passed;
    } catch (const Error&) {
      ok = false;
    }
    (c > 0 ? rec.plus_solves : rec.minus_solves) = ok;
  }

  bool plus = rec.plus_positive && rec.plus_solves;
  bool minus = rec.minus_positive && rec.minus_solves;
  if (plus == minus)
    throw Error(ErrorCode::CalibrationAmbiguous, std::string("both signs ") + (plus ? "pass" : "fail") +
                                                     " the positivity and solvability checks");
  rec.c_delta = plus ? 0.5 : -0.5;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, rec);
  return rec;
}

SolveResult continuity_solve(const ModelPtr& model, const StabilityParams& params, const SphereGrid& grid,
                             const SolveConfig& cfg) {
  check_config(cfg);
  SolveResult out;
  SolveReport& rep = out.report;
  if (cfg.c_delta) {
    rep.calibration.c_delta = *cfg.c_delta;
  } else {
    rep.calibration = calibrate(grid);
  }
  HeSystem sys = prepare_system(model, params, grid, rep.calibration.c_delta);
  rep.lambda = sys.lambda;
  rep.gamma = sys.gamma_exact;
  ScalarMetricState& s = out.state;
  s = zero_state(sys, cfg.eps_start);
  rep.mK = diagnostics(sys, s).mK;

  auto blown = [&] { return max_abs(s.u) > cfg.blowup_threshold; };
  int violations = 0;
  bool done = false;
  for (double eps = cfg.eps_start; !done; eps *= cfg.eps_ratio) {
    if (eps <= cfg.eps_floor) {
      eps = cfg.eps_floor;
      done = true;
    }
    s.epsilon = eps;
    TraceEntry te;
    te.epsilon = eps;
    double res = residual_sup(assemble_residual(sys, s));
    try {
      while (res >= cfg.level_tol && te.newton_iterations < cfg.max_newton && !blown()) {
        res = newton_step(sys, s, cfg).residual_after;
        ++te.newton_iterations;
      }
    } catch (const Error& e) {
      if (!blown()) {
        rep.outcome = Outcome::Stalled;
        rep.note = std::string("epsilon ") + std::to_string(eps) + ": " + e.what();
        break;
      }
    }
    te.residual = res;
    te.envelope = rep.mK / eps;
    for (const auto& u : s.u) {
      te.max_abs_u.push_back(u.cwiseAbs().maxCoeff());
      te.sup_u.push_back(u.maxCoeff());
      te.within_envelope = te.within_envelope && te.max_abs_u.back() <= cfg.envelope_slack * te.envelope;
    }
    rep.trace.push_back(te);
    violations = te.within_envelope ? 0 : violations + 1;
    if (blown()) {
      rep.outcome = Outcome::BlowUp;
      rep.note = "sup |u| exceeded the blow-up threshold";
      break;
    }
    if (violations >= cfg.envelope_levels) {
      rep.outcome = Outcome::BlowUp;
      rep.note = "sup |u| left the 1/epsilon envelope";
      break;
    }
    if (res >= cfg.level_tol) {
      rep.outcome = Outcome::Stalled;
      rep.note = "Newton did not reach the level tolerance at epsilon " + std::to_string(eps);
      break;
    }
    if (done) rep.outcome = Outcome::Converged;  // provisional until the polish below
  }

  if (rep.outcome == Outcome::Converged) {
    // Drop the perturbation and polish at epsilon = 0.
    s.epsilon = 0;
    double res = residual_sup(assemble_residual(sys, s, false));
    int it = 0;
    try {
      while (res >= cfg.tol && it < cfg.max_newton) {
        res = newton_step(sys, s, cfg).residual_after;
        ++it;
      }
    } catch (const Error& e) {
      rep.note = std::string("final polish: ") + e.what();
    }
    if (res >= cfg.tol) {
      rep.outcome = Outcome::Stalled;
      if (rep.note.empty()) rep.note = "residual above tolerance after the final polish";
    }
  }

  for (const auto& r : assemble_residual(sys, s, false)) {
    rep.residual_sup.push_back(r.cwiseAbs().maxCoeff());
    rep.residual_l2.push_back(std::sqrt(grid.quadrature(r.cwiseProduct(r))));
  }
  if (rep.outcome == Outcome::Converged) rep.verification = verify_he(sys, s, rep.outcome, rep.trace, cfg);
  if (rep.outcome == Outcome::BlowUp) {
    try {
      rep.destabilizer = extract_destabilizer(sys, s, rep.outcome, cfg);
    } catch (const Error& e) {
      rep.note += std::string("; ") + e.what();
    }
  }
  return out;
}

}  // namespace qhk
