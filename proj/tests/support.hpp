#pragma once

#include <qhk/he_solver.hpp>
#include <qhk/quiver.hpp>
#include <qhk/stability.hpp>

#include <random>
#include <string>

namespace qhk_test {

using qhk::Rational;

inline qhk::Section poly(std::initializer_list<int> coeffs) {
  std::vector<qhk::ComplexRational> c;
  for (int x : coeffs) c.push_back({Rational(x), Rational(0)});
  return qhk::Section(std::move(c));
}

// i -> j on P1 with O(mi) -> O(mj); the arrow is z^(mj-mi) or zero.
inline qhk::QBundleModel two_vertex_p1(long mi, long mj, bool nonzero = true) {
  qhk::QBundleModel m;
  m.base = qhk::Fixture::P1;
  m.quiver = qhk::build_quiver({"i", "j"}, {{"a", "i", "j"}});
  m.vertex_data = {{{qhk::Summand::line(mi)}}, {{qhk::Summand::line(mj)}}};
  qhk::Section s = qhk::Section::zero();
  if (nonzero) {
    std::vector<qhk::ComplexRational> c(static_cast<std::size_t>(mj - mi + 1), {Rational(0), Rational(0)});
    c.back() = {Rational(1), Rational(0)};
    s = qhk::Section(std::move(c));
  }
  m.arrow_data = {qhk::ArrowData::single(s)};
  return m;
}

inline qhk::QBundleModel hopf_line(long m) {
  qhk::QBundleModel q;
  q.base = qhk::Fixture::HopfTable;
  q.quiver = qhk::build_quiver({"i", "j"}, {{"a", "i", "j"}});
  q.vertex_data = {{{qhk::Summand::lplus(m)}}, {{qhk::Summand::lplus(m)}}};
  q.arrow_data = {qhk::ArrowData::single(poly({1}))};
  return q;
}

// L~ -> V with V modelled by summands of bidegree (0,0) and (-mp, mm); the
// three declared subobjects are the only proper ones.
inline qhk::QBundleModel hopf_eprime(long mp, long mm) {
  qhk::QBundleModel q;
  q.base = qhk::Fixture::HopfTable;
  q.quiver = qhk::build_quiver({"i", "j"}, {{"a", "i", "j"}});
  qhk::Summand triv{0, 0, qhk::SummandType::Plain, 0};
  qhk::Summand quot{-mp, mm, qhk::SummandType::Plain, 0};
  q.vertex_data = {{{triv}}, {{triv, quot}}};
  qhk::ArrowData a;
  a.rows = 2;
  a.cols = 1;
  a.blocks = {poly({1}), qhk::Section::zero()};
  q.arrow_data = {a};
  auto decl = [](std::string name, std::vector<int> r, std::vector<long> dp, std::vector<long> dm) {
    qhk::SubobjectSpec s;
    s.name = std::move(name);
    s.rank = std::move(r);
    s.deg_plus = std::move(dp);
    s.deg_minus = std::move(dm);
    s.provenance = qhk::Provenance::Declared;
    return s;
  };
  q.declared_subobjects = std::vector<qhk::SubobjectSpec>{decl("(i)", {1, 1}, {0, 0}, {0, 0}),
                                                          decl("(ii)", {0, 1}, {0, 0}, {0, 0}),
                                                          decl("(iii)", {0, 2}, {0, -mp}, {0, mm})};
  return q;
}

// Two O(0) vertices joined by the constant section 1.
inline qhk::QBundleModel constant_instance() { return two_vertex_p1(0, 0); }

inline qhk::StabilityParams params2(Rational si, Rational sj, Rational ti, Rational tj, Rational ai = Rational(1, 2),
                                    Rational aj = Rational(1, 2)) {
  return {{ai, aj}, {si, sj}, {ti, tj}};
}

// Small positive rational p/q with q in 1..qmax.
inline Rational random_rational(std::mt19937_64& rng, int pmin, int pmax, int qmax) {
  std::uniform_int_distribution<int> P(pmin, pmax), Qd(1, qmax);
  Rational r(P(rng), Qd(rng));
  r.canonicalize();
  return r;
}

// Independent slope of a vertex subset for rank-one models.
inline Rational brute_slope(const qhk::QBundleModel& m, const qhk::StabilityParams& p, unsigned mask) {
  Rational deg(0), rk(0);
  for (std::size_t i = 0; i < m.quiver.num_vertices(); ++i) {
    if (!(mask >> i & 1u)) continue;
    const auto& s = m.vertex_data[i].summands[0];
    deg += p.alpha[i] * p.sigma[i] * s.deg_plus + (1 - p.alpha[i]) * p.sigma[i] * s.deg_minus - p.tau[i];
    rk += p.sigma[i];
  }
  return deg / rk;
}

// Stable / semistable / unstable from a plain loop over subsets closed under
// nonzero arrows.
inline qhk::Classification brute_classify(const qhk::QBundleModel& m, const qhk::StabilityParams& p) {
  const unsigned n = static_cast<unsigned>(m.quiver.num_vertices());
  const unsigned full = (1u << n) - 1;
  Rational total = brute_slope(m, p, full);
  bool any = false, equal = false;
  for (unsigned mask = 1; mask < full; ++mask) {
    bool closed = true;
    for (std::size_t a = 0; a < m.quiver.num_arrows(); ++a) {
      const auto& ar = m.quiver.arrow(a);
      if (!m.arrow_data[a].is_zero() && (mask >> ar.tail & 1u) && !(mask >> ar.head & 1u)) closed = false;
    }
    if (!closed) continue;
    any = true;
    Rational s = brute_slope(m, p, mask);
    if (s > total) return qhk::Classification::Unstable;
    if (s == total) equal = true;
  }
  if (!any) return qhk::Classification::VacuouslyStable;
  return equal ? qhk::Classification::StrictlySemistable : qhk::Classification::Stable;
}

}  // namespace qhk_test
