#include <doctest.h>
#include <qhk/endo.hpp>
#include <qhk/he_solver.hpp>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace qhk;
using namespace qhk_test;

namespace {

const SphereGrid& grid16() {
  static SphereGrid g = make_sphere_grid(16, 32);
  return g;
}

ScalarMetricState random_state(const HeSystem& sys, std::mt19937_64& rng, double eps) {
  auto st = zero_state(sys, eps);
  const auto& g = sys.grid;
  for (auto& u : st.u) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(g.num_coeffs());
    for (std::size_t k = 0; k < g.num_coeffs() && g.coeff_l(k) <= 4; ++k) c[k] = 2 * uniform01(rng) - 1;
    u = g.synthesize(c);
  }
  normalize(sys, st);
  return st;
}

}  // namespace

TEST_CASE("closed-form constant solution has zero residual") {
  auto model = validate_or_throw(constant_instance());
  auto p = params2(Rational(1), Rational(1), Rational(-1), Rational(1));
  auto sys = prepare_system(model, p, grid16());
  CHECK(sys.gamma_exact == 0);
  CHECK(sys.lambda == doctest::Approx(2 * M_PI));
  auto st = zero_state(sys, 0);
  st.u[0] = grid16().constant(-0.5 * std::log(2 * M_PI));
  st.u[1] = grid16().constant(0.5 * std::log(2 * M_PI));
  CHECK(residual_sup(assemble_residual(sys, st)) < 1e-10);
  // direct evaluation of |Q0| * sum sup|K|: K = -+1 -+ 2 pi (-+1)
  auto d = diagnostics(sys, zero_state(sys, 1));
  CHECK(d.mK == doctest::Approx(2 * (2 * (2 * M_PI - 1))).epsilon(1e-12));
  // already solved: Newton does not move
  SolveConfig cfg;
  st.epsilon = 1e-6;
  auto rep = newton_step(sys, st, cfg);
  CHECK(rep.step_sup < 1e-6);
}

TEST_CASE("Hopf fixture and higher rank are refused by the solver") {
  auto model = validate_or_throw(hopf_line(1));
  try {
    prepare_system(model, params2(Rational(1), Rational(1), Rational(0), Rational(1)), grid16());
    FAIL("expected FixtureUnsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FixtureUnsupported);
  }
}

TEST_CASE("Jacobian matches finite differences and is symmetric") {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  auto p = params2(Rational(1), Rational(2), Rational(0), Rational(3));
  auto sys = prepare_system(model, p, grid16());
  std::mt19937_64 rng(3);
  auto st = random_state(sys, rng, 0.3);
  auto du = random_state(sys, rng, 0.3).u;
  auto dv = random_state(sys, rng, 0.3).u;
  auto J = apply_jacobian(sys, st, du);
  const double h = 1e-6;
  auto plus = st, minus = st;
  for (std::size_t i = 0; i < du.size(); ++i) {
    plus.u[i] += h * du[i];
    minus.u[i] -= h * du[i];
  }
  auto rp = assemble_residual(sys, plus), rm = assemble_residual(sys, minus);
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < du.size(); ++i) {
    err = std::max(err, ((rp[i] - rm[i]) / (2 * h) - J[i]).cwiseAbs().maxCoeff());
    scale = std::max(scale, J[i].cwiseAbs().maxCoeff());
  }
  CHECK(err < 1e-5 * scale);
  // symmetric in the sigma-free area pairing
  auto Jv = apply_jacobian(sys, st, dv);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < du.size(); ++i) {
    a += sys.grid.inner(dv[i], J[i]);
    b += sys.grid.inner(du[i], Jv[i]);
  }
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("gamma identity at random normalized states") {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  auto p = params2(Rational(1), Rational(1), Rational(0), Rational(2));
  auto sys = prepare_system(model, p, grid16());
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    auto st = random_state(sys, rng, 0.5);
    CHECK(std::abs(st.mean_sum_u) < 1e-12);
    auto r = assemble_residual(sys, st, true);
    double total = 0;
    for (const auto& ri : r) total += sys.grid.quadrature(ri);
    CHECK(std::abs(total) < 1e-10);
  }
}

TEST_CASE("one Newton step halves the residual on the constant instance") {
  auto model = validate_or_throw(constant_instance());
  auto p = params2(Rational(1), Rational(1), Rational(-1), Rational(1));
  auto sys = prepare_system(model, p, grid16());
  auto st = zero_state(sys, 1e-6);
  SolveConfig cfg;
  auto rep = newton_step(sys, st, cfg);
  CHECK(rep.residual_after <= 0.5 * rep.residual_before);
}

TEST_CASE("calibration picks the positive Laplacian sign") {
  auto rec = calibrate(grid16());
  CHECK(rec.c_delta == 0.5);
  CHECK(rec.plus_positive);
  CHECK_FALSE(rec.minus_positive);
  CHECK(rec.plus_solves);
}

TEST_CASE("background FS metric: both sides of the arrow identity equal pi") {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  auto p = params2(Rational(1), Rational(1), Rational(0), Rational(2));
  auto g = make_sphere_grid(32, 64);
  auto sys = prepare_system(model, p, g);
  auto ids = arrow_identities(sys, zero_state(sys, 0));
  REQUIRE(ids.size() == 1);
  CHECK(ids[0].lhs == doctest::Approx(M_PI).epsilon(1e-10));
  CHECK(ids[0].rhs == doctest::Approx(M_PI).epsilon(1e-6));
}

TEST_CASE("continuity solve of the constant instance") {
  auto model = validate_or_throw(constant_instance());
  auto p = params2(Rational(1), Rational(1), Rational(-1), Rational(1));
  auto res = continuity_solve(model, p, make_sphere_grid(32, 64));
  REQUIRE(res.report.outcome == Outcome::Converged);
  GridField diff = res.state.u[1] - res.state.u[0];
  CHECK((diff.array() - std::log(2 * M_PI)).abs().maxCoeff() < 1e-8);
  REQUIRE(res.report.verification);
  CHECK(res.report.verification->passed);
  auto sys = prepare_system(model, p, make_sphere_grid(32, 64));
  CHECK_THROWS_AS(extract_destabilizer(sys, res.state, Outcome::Converged, SolveConfig{}), Error);
}

TEST_CASE("unstable constant instance blows up along {j}") {
  auto model = validate_or_throw(constant_instance());
  auto p = params2(Rational(1), Rational(1), Rational(1), Rational(-1));
  auto res = continuity_solve(model, p, grid16());
  REQUIRE(res.report.outcome == Outcome::BlowUp);
  REQUIRE(res.report.destabilizer);
  const auto& th = *res.report.destabilizer;
  CHECK(th.support == std::vector<std::size_t>{1});
  CHECK(th.proper);
  CHECK(th.arrow_closed);
  CHECK(th.slope_ok);
  CHECK(th.matches_max_slope);
  auto sys = prepare_system(model, p, grid16());
  CHECK_THROWS_AS(verify_he(sys, res.state, Outcome::BlowUp, res.report.trace, SolveConfig{}), Error);
}

TEST_CASE("solver configuration checks") {
  SolveConfig c;
  c.eps_ratio = 1.5;
  CHECK_THROWS_AS(check_config(c), Error);
  c = SolveConfig{};
  c.tol = -1;
  CHECK_THROWS_AS(check_config(c), Error);
}
