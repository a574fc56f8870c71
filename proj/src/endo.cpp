#include "qhk/endo.hpp"

#include <cmath>

#include "qhk/error.hpp"

namespace qhk {

namespace {

using Cx = std::complex<double>;

void check_shapes(const PointShape& s, const ArrowMapPoint& phi) {
  if (phi.phi.size() != s.num_arrows()) throw Error(ErrorCode::InvalidInput, "one matrix per arrow expected");
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    if (phi.phi[a].rows() != s.rank[s.head[a]] || phi.phi[a].cols() != s.rank[s.tail[a]])
      throw Error(ErrorCode::InvalidInput, "arrow map " + std::to_string(a) + " has the wrong shape");
  }
}

void check_endo(const PointShape& s, const std::vector<CMatrix>& f) {
  if (f.size() != s.num_vertices()) throw Error(ErrorCode::InvalidInput, "one matrix per vertex expected");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i].rows() != s.rank[i] || f[i].cols() != s.rank[i])
      throw Error(ErrorCode::InvalidInput, "endomorphism at vertex " + std::to_string(i) + " has the wrong size");
}

CMatrix solve(const CMatrix& A, const CMatrix& B) { return A.partialPivLu().solve(B); }

// f H-self-adjoint <=> H f Hermitian.
bool is_h_hermitian(const CMatrix& f, const CMatrix& H, double tol) {
  CMatrix S = H * f;
  return (S - S.adjoint()).norm() <= tol * std::max(1.0, S.norm());
}

}  // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

HermitianMetricPoint make_metric(const PointShape& shape, std::vector<CMatrix> H) {
  check_endo(shape, H);
  for (std::size_t i = 0; i < H.size(); ++i) {
    if ((H[i] - H[i].adjoint()).norm() > 1e-12 * std::max(1.0, H[i].norm()))
      throw Error(ErrorCode::SingularMetric, "metric at vertex " + std::to_string(i) + " is not Hermitian");
    Eigen::LLT<CMatrix> llt(H[i]);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::SingularMetric, "metric at vertex " + std::to_string(i) + " is not positive definite");
  }
  return {std::move(H)};
}

EndoPoint make_endo(const PointShape& shape, std::vector<CMatrix> f, const HermitianMetricPoint& H,
                    bool claim_hermitian, bool claim_positive) {
  check_endo(shape, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if ((claim_hermitian || claim_positive) && !is_h_hermitian(f[i], H.H[i], 1e-10))
      throw Error(ErrorCode::InvalidInput, "endomorphism at vertex " + std::to_string(i) + " is not H-self-adjoint");
    if (claim_positive) {
      Eigen::LLT<CMatrix> llt(H.H[i] * f[i]);
      if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositive, "endomorphism at vertex " + std::to_string(i) + " is not positive");
    }
  }
  return {std::move(f), claim_hermitian || claim_positive, claim_positive};
}

ArrowMapPoint adjoint_wrt(const PointShape& s, const ArrowMapPoint& phi, const HermitianMetricPoint& H) {
  check_shapes(s, phi);
  ArrowMapPoint out;
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    const CMatrix& Ht = H.H[s.tail[a]];
    Eigen::FullPivLU<CMatrix> lu(Ht);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularMetric, "singular tail metric");
    out.phi.push_back(lu.solve(phi.phi[a].adjoint() * H.H[s.head[a]]));
  }
  return out;
}

ArrowMapPoint twisted_adjoint(const PointShape& s, const ArrowMapPoint& phi, const EndoPoint& f,
                              const HermitianMetricPoint& H) {
  check_endo(s, f.f);
  auto star = adjoint_wrt(s, phi, H);
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    Eigen::FullPivLU<CMatrix> lu(f.f[s.tail[a]]);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularTwist, "twist at the tail is singular");
    star.phi[a] = lu.solve(star.phi[a] * f.f[s.head[a]]);
  }
  return star;
}

ArrowMapPoint bracket(const PointShape& s, const EndoPoint& A, const ArrowMapPoint& phi) {
  check_shapes(s, phi);
  check_endo(s, A.f);
  ArrowMapPoint out;
  for (std::size_t a = 0; a < s.num_arrows(); ++a)
    out.phi.push_back(A.f[s.head[a]] * phi.phi[a] - phi.phi[a] * A.f[s.tail[a]]);
  return out;
}

CMatrix herm_function(const CMatrix& f, const CMatrix& H, HermOp op, double varsigma) {
  Eigen::LLT<CMatrix> llt(H);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMetric, "metric is not positive definite");
  const CMatrix L = llt.matrixL();
  // fhat = L^dagger f L^{-dagger} is Hermitian.
  CMatrix fhat = L.adjoint() * f * L.adjoint().inverse();
  fhat = (fhat + fhat.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(fhat);
  Eigen::VectorXd ev = es.eigenvalues();
  Eigen::VectorXcd g(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (op != HermOp::Exp && ev[k] <= 0) throw Error(ErrorCode::NotPositive, "eigenvalue is not positive");
    double v = op == HermOp::Exp ? std::exp(ev[k]) : op == HermOp::Log ? std::log(ev[k]) : std::pow(ev[k], varsigma);
    g[k] = v;
  }
  CMatrix ghat = es.eigenvectors() * g.asDiagonal() * es.eigenvectors().adjoint();
  return L.adjoint().inverse() * ghat * L.adjoint();
}

EndoPoint herm_log_exp_pow(const EndoPoint& f, HermOp op, const HermitianMetricPoint& H, double varsigma,
                           bool allow_any_power) {
  if (op == HermOp::Pow && !allow_any_power && !(varsigma > 0 && varsigma <= 1))
    throw Error(ErrorCode::InvalidInput, "power must lie in (0,1]");
  EndoPoint out;
  for (std::size_t i = 0; i < f.f.size(); ++i) out.f.push_back(herm_function(f.f[i], H.H[i], op, varsigma));
  out.hermitian_wrt_H = true;
  out.positive_definite = op != HermOp::Log;
  return out;
}

double endo_inner(const CMatrix& X, const CMatrix& Y, const CMatrix& H) {
  return (X * solve(H, Y.adjoint() * H)).trace().real();
}

double hom_inner(const CMatrix& X, const CMatrix& Y, const CMatrix& Hs, const CMatrix& Ht) {
  return (X * solve(Hs, Y.adjoint() * Ht)).trace().real();
}

CMatrix moment_term(const PointShape& s, std::size_t i, const ArrowMapPoint& phi, const EndoPoint& f,
                    const HermitianMetricPoint& H) {
  auto star = twisted_adjoint(s, phi, f, H);
  CMatrix out = CMatrix::Zero(s.rank[i], s.rank[i]);
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    if (s.head[a] == i) out += phi.phi[a] * star.phi[a];
    if (s.tail[a] == i) out -= star.phi[a] * phi.phi[a];
  }
  return out;
}

namespace {

EndoPoint identity_endo(const PointShape& s) {
  EndoPoint id;
  for (int r : s.rank) id.f.push_back(CMatrix::Identity(r, r));
  id.hermitian_wrt_H = id.positive_definite = true;
  return id;
}

}  // namespace

double moment_log_gap(const PointShape& s, const EndoPoint& f, const ArrowMapPoint& phi, const HermitianMetricPoint& H) {
  auto logf = herm_log_exp_pow(f, HermOp::Log, H);
  auto id = identity_endo(s);
  double gap = 0;
  for (std::size_t i = 0; i < s.num_vertices(); ++i) {
    gap += endo_inner(moment_term(s, i, phi, f, H), logf.f[i], H.H[i]);
    gap -= endo_inner(moment_term(s, i, phi, id, H), logf.f[i], H.H[i]);
  }
  return gap;
}

double power_bracket_gap(const PointShape& s, const EndoPoint& f, double varsigma, const ArrowMapPoint& phi,
                       const HermitianMetricPoint& H) {
  auto fs = herm_log_exp_pow(f, HermOp::Pow, H, varsigma);
  auto fhalf = herm_log_exp_pow(f, HermOp::Pow, H, -varsigma / 2, true);
  auto star = adjoint_wrt(s, phi, H);
  auto twisted = twisted_adjoint(s, phi, f, H);
  auto id = identity_endo(s);
  double lhs = 0, rhs = 0;
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    const std::size_t t = s.tail[a], h = s.head[a];
    // [phi^*, f^s] as a map E_h -> E_t.
    CMatrix br = star.phi[a] * fs.f[h] - fs.f[t] * star.phi[a];
    lhs += hom_inner(twisted.phi[a], br, H.H[h], H.H[t]);
    CMatrix w = fhalf.f[t] * br;
    rhs += hom_inner(w, w, H.H[h], H.H[t]);
  }
  for (std::size_t i = 0; i < s.num_vertices(); ++i)
    rhs += endo_inner(moment_term(s, i, phi, id, H), fs.f[i], H.H[i]);
  return lhs - rhs;
}

double adjoint_identity_residual(const PointShape& s, const ArrowMapPoint& phi, const HermitianMetricPoint& H,
                                 std::mt19937_64& rng, int samples) {
  auto star = adjoint_wrt(s, phi, H);
  auto rnd = [&](int n) {
    CVector v(n);
    for (int k = 0; k < n; ++k) v[k] = Cx(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
    return v;
  };
  double worst = 0;
  for (std::size_t a = 0; a < s.num_arrows(); ++a) {
    for (int k = 0; k < samples; ++k) {
      CVector u = rnd(s.rank[s.tail[a]]), v = rnd(s.rank[s.head[a]]);
      // H(x, y) = y^dagger H x
      Cx lhs = v.dot(H.H[s.head[a]] * (phi.phi[a] * u));
      Cx rhs = (star.phi[a] * v).dot(H.H[s.tail[a]] * u);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

int commutant_dimension(const PointShape& s, const ArrowMapPoint& phi, const HermitianMetricPoint& H, double tol) {
  check_shapes(s, phi);
  // A_i = H_i^{-1} S_i with S_i Hermitian; real basis of Hermitian matrices.
  std::vector<std::pair<std::size_t, CMatrix>> basis;
  for (std::size_t i = 0; i < s.num_vertices(); ++i) {
    const int r = s.rank[i];
    for (int p = 0; p < r; ++p) {
      for (int q = p; q < r; ++q) {
        CMatrix E = CMatrix::Zero(r, r);
        E(p, q) = E(q, p) = 1;
        basis.emplace_back(i, solve(H.H[i], E));
        if (p != q) {
          CMatrix F = CMatrix::Zero(r, r);
          F(p, q) = Cx(0, 1);
          F(q, p) = Cx(0, -1);
          basis.emplace_back(i, solve(H.H[i], F));
        }
      }
    }
  }
  Eigen::Index rows = 0;
  for (std::size_t a = 0; a < s.num_arrows(); ++a) rows += 2 * phi.phi[a].size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(rows, 1), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    Eigen::Index row = 0;
    for (std::size_t a = 0; a < s.num_arrows(); ++a) {
      CMatrix val = CMatrix::Zero(phi.phi[a].rows(), phi.phi[a].cols());
      if (s.head[a] == basis[b].first) val += basis[b].second * phi.phi[a];
      if (s.tail[a] == basis[b].first) val -= phi.phi[a] * basis[b].second;
      for (Eigen::Index k = 0; k < val.size(); ++k) {
        M(row++, static_cast<Eigen::Index>(b)) = val.data()[k].real();
        M(row++, static_cast<Eigen::Index>(b)) = val.data()[k].imag();
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  double scale = sv.size() ? std::max(1.0, sv[0]) : 1.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > tol * scale) ++rank;
  return static_cast<int>(basis.size()) - rank;
}

RandomInstance random_instance(std::mt19937_64& rng, int max_vertices, int max_rank) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1)); };
  auto cmat = [&](int r, int c) {
    CMatrix M(r, c);
    for (Eigen::Index k = 0; k < M.size(); ++k) M.data()[k] = Cx(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1);
    return M;
  };
  // exp of a random Hermitian matrix with spectrum in [-spread, spread].
  auto pd = [&](int r, double spread) {
    Eigen::HouseholderQR<CMatrix> qr(cmat(r, r));
    CMatrix Q = qr.householderQ();
    Eigen::VectorXcd d(r);
    for (int k = 0; k < r; ++k) d[k] = std::exp(spread * (2 * uniform01(rng) - 1));
    CMatrix S = Q * d.asDiagonal() * Q.adjoint();
    return CMatrix((S + S.adjoint()) * 0.5);
  };

  RandomInstance inst;
  const int n = pick(1, max_vertices);
  for (int i = 0; i < n; ++i) inst.shape.rank.push_back(pick(1, max_rank));
  const int na = pick(1, 5);
  for (int a = 0; a < na; ++a) {
    inst.shape.tail.push_back(static_cast<std::size_t>(pick(0, n - 1)));
    inst.shape.head.push_back(static_cast<std::size_t>(pick(0, n - 1)));
  }
  std::vector<CMatrix> H, f;
  for (int i = 0; i < n; ++i) H.push_back(pd(inst.shape.rank[i], 1.0));
  inst.H = make_metric(inst.shape, std::move(H));
  for (int i = 0; i < n; ++i) {
    CMatrix S = pd(inst.shape.rank[i], 2.0);
    f.push_back(solve(inst.H.H[i], S));  // H f = S Hermitian positive
  }
  inst.f = make_endo(inst.shape, std::move(f), inst.H, true, true);
  for (std::size_t a = 0; a < inst.shape.num_arrows(); ++a)
    inst.phi.phi.push_back(cmat(inst.shape.rank[inst.shape.head[a]], inst.shape.rank[inst.shape.tail[a]]));
  return inst;
}

}  // namespace qhk
