// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
#include <qhk/chambers.hpp>
#include <qhk/endo.hpp>
#include <qhk/he_solver.hpp>
#include <qhk/props.hpp>
#include <qhk/sphere_grid.hpp>
#include <qhk/stability.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "support.hpp"

using namespace qhk;
using namespace qhk_test;

namespace {

constexpr double kDegreeTol = 1e-10;
constexpr double kSolveTol = 1e-8;
constexpr double kGammaTol = 1e-10;
constexpr double kGapTol = -1e-10;
constexpr double kAdjointTol = 1e-10;
constexpr double kIdentityTol = 1e-4;
constexpr double kIdentityFineTol = 1e-5;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

StabilityParams stable_nonconstant_params() { return params2(Rational(1), Rational(1), Rational(0), Rational(2)); }

// The stable nonconstant solve is shared by criteria 8 and 12.
const SolveResult& nonconstant_solve(int nt, int np) {
  static std::map<std::pair<int, int>, SolveResult> cache;
  auto key = std::make_pair(nt, np);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto model = validate_or_throw(two_vertex_p1(0, 1));
    it = cache.emplace(key, continuity_solve(model, stable_nonconstant_params(), make_sphere_grid(nt, np))).first;
  }
  return it->second;
}

Verdict c1() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int n = 0, bad = 0;
  for (long d = 0; d <= 3; ++d) {
    auto model = validate_or_throw(two_vertex_p1(0, d));
    for (int k = 0; k < 200; ++k, ++n) {
      Rational si = random_rational(rng, 1, 6, 4), sj = random_rational(rng, 1, 6, 4);
      Rational ti = random_rational(rng, -8, 8, 5), tj = random_rational(rng, -8, 8, 5);
      auto p = params2(si, sj, ti, tj);
      bool pred = si * sj * d < si * tj - sj * ti;
      auto kind = classify(*model, p).kind;
      bool stable = kind == Classification::Stable;
      if (stable != pred || kind != brute_classify(model->model(), p)) ++bad;
    }
  }
  double t = seconds_since(t0);
  return {bad == 0 && n >= 500 && t < 5, fmt("%.0f tuples, %.0f mismatches, %.3f s", n, bad, t)};
}

Verdict c2() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  int n = 0, bad = 0, unequal = 0;
  for (long m = -3; m <= 3; ++m) {
    auto model = validate_or_throw(hopf_line(m));
    for (int k = 0; k < 100; ++k) {
      Rational ai(1 + static_cast<long>(rng() % 9), 10), aj(1 + static_cast<long>(rng() % 9), 10);
      ai.canonicalize();
      aj.canonicalize();
      Rational si = random_rational(rng, 1, 6, 4), sj = random_rational(rng, 1, 6, 4);
      Rational ti = random_rational(rng, -8, 8, 5), tj = random_rational(rng, -8, 8, 5);
      auto p = params2(si, sj, ti, tj, ai, aj);
      bool pred = 2 * m * si * sj * (aj - ai) < si * tj - sj * ti;
      if ((classify(*model, p).kind == Classification::Stable) != pred) ++bad;
      unequal += ai != aj;
      ++n;
    }
  }
  double t = seconds_since(t0);
  return {bad == 0 && n >= 500 && unequal > 0 && t < 5,
          fmt("%.0f tuples (%.0f with unequal alpha), %.0f mismatches", n, unequal, bad) + fmt(", %.3f s", t)};
}

Verdict c3() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  int n = 0, bad = 0, stable = 0;
  for (int k = 0; k < 1200; ++k) {
    long mp = 1 + static_cast<long>(rng() % 4), mm = 2 + static_cast<long>(rng() % 4);
    auto model = validate_or_throw(hopf_eprime(mp, mm));
    Rational aj(1 + static_cast<long>(rng() % 9), 10);
    aj.canonicalize();
    Rational si = random_rational(rng, 1, 6, 4), sj = random_rational(rng, 1, 6, 4);
    Rational ti = random_rational(rng, -8, 8, 5), tj = random_rational(rng, -8, 8, 5);
    auto p = params2(si, sj, ti, tj, Rational(1, 2), aj);
    Rational A = aj * mp - (1 - aj) * mm;
    bool pred = (si + sj) * sj * A < sj * ti - si * tj && sj * sj * A < -sj * ti + si * tj &&
                si * sj * A > 2 * (sj * ti - si * tj);
    bool got = classify(*model, p).kind == Classification::Stable;
    bad += got != pred;
    stable += got;
    ++n;
  }
  double t = seconds_since(t0);
  return {bad == 0 && n >= 1000 && t < 5,
          fmt("%.0f tuples (%.0f stable), %.0f mismatches", n, stable, bad) + fmt(", %.3f s", t)};
}

Verdict c4() {
  auto t0 = std::chrono::steady_clock::now();
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  std::vector<Rational> alpha{Rational(1, 2), Rational(1, 2)}, sigma{Rational(1), Rational(1)};
  auto ws = wall_set(*model, alpha, sigma);
  bool one_wall = ws.walls.size() == 1 && ws.walls[0].normal == std::vector<Rational>{Rational(1), Rational(-1)} &&
                  ws.walls[0].offset == Rational(-1);
  auto arr = arrange_2d(ws, parse_box("[-3,3]x[-3,3]"));
  bool match = true;
  for (const auto& c : arr.cells) {
    auto kind = classify_sample(*model, alpha, sigma, c.representative);
    bool pred = Rational(1) < c.representative[1] - c.representative[0];
    match = match && (kind == Classification::Stable) == pred;
  }
  double t = seconds_since(t0);
  return {one_wall && arr.cells.size() == 2 && match && t < 1,
          fmt("%.0f wall(s), %.0f cells, %.4f s", ws.walls.size(), arr.cells.size(), t)};
}

Verdict c5() {
  auto g = make_sphere_grid(64, 128);
  double worst = 0;
  for (long m = -5; m <= 5; ++m)
    worst = std::max(worst, std::abs(g.quadrature(background_curvature(g, m)) / (2 * M_PI) - m));
  return {worst < kDegreeTol, fmt("max |degree - m| = %.2e", worst)};
}

Verdict c6() {
  auto t0 = std::chrono::steady_clock::now();
  auto model = validate_or_throw(constant_instance());
  auto p = params2(Rational(1), Rational(1), Rational(-1), Rational(1));
  auto res = continuity_solve(model, p, make_sphere_grid(64, 128));
  double t = seconds_since(t0);
  double res_sup = 0;
  for (double r : res.report.residual_sup) res_sup = std::max(res_sup, r);
  GridField diff = res.state.u[1] - res.state.u[0];
  double dev = (diff.array() - std::log(2 * M_PI)).abs().maxCoeff();
  bool ok = res.report.outcome == qhk::Outcome::Converged && res_sup < kSolveTol && dev < kSolveTol && t < 30;
  return {ok, std::string(outcome_name(res.report.outcome)) +
                  fmt(", residual %.2e, |u_j - u_i - log 2pi| %.2e, %.2f s", res_sup, dev, t)};
}

Verdict c7() {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  auto g = make_sphere_grid(64, 128);
  auto sys = prepare_system(model, stable_nonconstant_params(), g);
  std::mt19937_64 rng(107);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    auto st = zero_state(sys, uniform01(rng));
    for (auto& u : st.u) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(g.num_coeffs());
      for (std::size_t q = 0; q < g.num_coeffs(); ++q)
        if (g.coeff_l(q) <= 8) c[q] = (2 * uniform01(rng) - 1) / (1 + g.coeff_l(q));
      u = g.synthesize(c);
    }
    normalize(sys, st);
    double total = 0;
    for (const auto& r : assemble_residual(sys, st)) total += g.quadrature(r);
    worst = std::max(worst, std::abs(total));
  }
  return {worst < kGammaTol, fmt("max |integral of sum R_i| over 100 states = %.2e", worst)};
}

Verdict c8() {
  const auto& res = nonconstant_solve(64, 128);
  double worst = 1e300;
  bool all = !res.report.trace.empty();
  for (const auto& e : res.report.trace) {
    for (double m : e.max_abs_u) worst = std::min(worst, 1.05 * e.envelope - m);
    all = all && e.within_envelope;
  }
  return {all && worst >= 0, fmt("%.0f levels, min slack 1.05 mK/eps - m_i = %.3g", res.report.trace.size(), worst)};
}

Verdict c9() {
  auto t0 = std::chrono::steady_clock::now();
  PropsOptions o;
  o.seed = 109;
  o.count = 10000;
  o.gap_tol = -kGapTol;
  o.adjoint_tol = kAdjointTol;
  auto s = run_props(o);
  double t = seconds_since(t0);
  bool ok = s.failures == 0 && s.instances >= 10000 && s.moment_log_min >= kGapTol && s.power_bracket_min >= kGapTol &&
            s.adjoint_max < kAdjointTol && t < 60;
  return {ok, fmt("%.0f instances, min gaps %.2e / %.2e", s.instances, s.moment_log_min, s.power_bracket_min) +
                  fmt(", adjoint %.2e, %.2f s", s.adjoint_max, t)};
}

// Random rank-one P1 models on 2 or 3 vertices with equal sigma whose
// classification is Unstable with a unique slope maximizer.
std::vector<std::pair<ModelPtr, StabilityParams>> random_unstable(int count) {
  std::vector<std::pair<ModelPtr, StabilityParams>> out;
  std::mt19937_64 rng(110);
  while (static_cast<int>(out.size()) < count) {
    int n = 2 + static_cast<int>(rng() % 2);
    std::vector<std::string> names{"i", "j", "k"};
    names.resize(n);
    std::vector<long> deg(n);
    for (auto& d : deg) d = static_cast<long>(rng() % 3);
    QBundleModel m;
    m.base = Fixture::P1;
    std::vector<ArrowSpec> arrows;
    for (int a = 0; a + 1 < n; ++a) {
      int t = a, h = a + 1;
      if (deg[h] < deg[t]) std::swap(t, h);
      arrows.push_back({"a" + std::to_string(a), names[t], names[h]});
      std::vector<ComplexRational> c(static_cast<std::size_t>(deg[h] - deg[t] + 1), {Rational(0), Rational(0)});
      c.back() = {Rational(1), Rational(0)};
      m.arrow_data.push_back(ArrowData::single(Section(std::move(c))));
    }
    m.quiver = build_quiver(names, arrows);
    for (int i = 0; i < n; ++i) m.vertex_data.push_back({{Summand::line(deg[i])}});
    auto model = validate_or_throw(m);
    StabilityParams p;
    for (int i = 0; i < n; ++i) {
      p.alpha.push_back(Rational(1, 2));
      p.sigma.push_back(Rational(1));
      p.tau.push_back(random_rational(rng, -4, 4, 2));
    }
    if (classify(*model, p).kind != Classification::Unstable) continue;
    auto best = max_slope_subobject(*model, p);
    int ties = 0;
    for (const auto& s : enumerate_subobjects(*model)) ties += deg_slope(*model, s, p).slope == best.slope.slope;
    if (ties != 1) continue;
    out.emplace_back(model, p);
  }
  return out;
}

Verdict c10() {
  auto t0 = std::chrono::steady_clock::now();
  auto cases = random_unstable(10);
  cases.insert(cases.begin(), {validate_or_throw(constant_instance()),
                               params2(Rational(1), Rational(1), Rational(1), Rational(-1))});
  auto g = make_sphere_grid(32, 64);
  int good = 0;
  std::string first_bad;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    auto res = continuity_solve(cases[k].first, cases[k].second, g);
    const auto& d = res.report.destabilizer;
    bool ok = res.report.outcome == qhk::Outcome::BlowUp && d && d->proper && !d->support.empty() &&
              d->arrow_closed && d->slope_ok && d->matches_max_slope;
    good += ok;
    if (!ok && first_bad.empty()) first_bad = fmt(" (first failure: case %.0f)", k);
  }
  double t = seconds_since(t0);
  return {good == static_cast<int>(cases.size()) && t < 300,
          fmt("%.0f/%.0f instances, %.1f s", good, cases.size(), t) + first_bad};
}

Verdict c11() {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  auto g = make_sphere_grid(64, 128);
  int agree = 0, total = 0;
  double slowest = 0;
  for (Rational ti : {Rational(-1, 3), Rational(0), Rational(1, 3)}) {
    for (Rational tj : {Rational(1, 2), Rational(3, 2), Rational(5, 2)}) {
      if (tj - ti == 1) continue;
      auto p = params2(Rational(1), Rational(1), ti, tj);
      bool stable = classify(*model, p).kind == Classification::Stable;
      auto t0 = std::chrono::steady_clock::now();
      auto res = continuity_solve(model, p, g);
      slowest = std::max(slowest, seconds_since(t0));
      bool converged = res.report.outcome == qhk::Outcome::Converged;
      agree += stable == converged;
      ++total;
    }
  }
  return {agree == 9 && total == 9 && slowest < 60, fmt("%.0f/%.0f agree, slowest solve %.2f s", agree, total, slowest)};
}

double identity_residual(int nt, int np) {
  const auto& res = nonconstant_solve(nt, np);
  if (res.report.outcome != qhk::Outcome::Converged || !res.report.verification) return INFINITY;
  double worst = 0;
  for (const auto& a : res.report.verification->arrow_identity) worst = std::max(worst, a.residual);
  return worst;
}

Verdict c12() {
  double coarse = identity_residual(64, 128);
  double fine = identity_residual(128, 256);
  return {coarse < kIdentityTol && fine < kIdentityFineTol,
          fmt("relative residual %.2e at 64x128, %.2e at 128x256", coarse, fine)};
}

}  // namespace

int main() {
  std::vector<std::function<Verdict()>> crits{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};
  int failed = 0;
  for (std::size_t k = 0; k < crits.size(); ++k) {
    Verdict o;
    try {
      o = crits[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(crits.size()) - failed, crits.size());
  return failed == 0 ? 0 : 1;
}
