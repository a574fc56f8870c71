#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace qhk {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Vertex ranks and arrows (tail -> head) of a quiver at a single point.
struct PointShape {
  std::vector<int> rank;
  std::vector<std::size_t> tail;
  std::vector<std::size_t> head;
  std::size_t num_vertices() const { return rank.size(); }
  std::size_t num_arrows() const { return tail.size(); }
};

struct HermitianMetricPoint {
  std::vector<CMatrix> H;
};

struct EndoPoint {
  std::vector<CMatrix> f;
  bool hermitian_wrt_H = false;
  bool positive_definite = false;
};

// Per arrow, head-rank x tail-rank (or the reverse for adjoints).
struct ArrowMapPoint {
  std::vector<CMatrix> phi;
};

// Throws SingularMetric unless every H_i is Hermitian (1e-12) and Cholesky succeeds.
HermitianMetricPoint make_metric(const PointShape& shape, std::vector<CMatrix> H);
// Verifies the claimed flags against H; throws NotPositive / InvalidInput.
EndoPoint make_endo(const PointShape& shape, std::vector<CMatrix> f, const HermitianMetricPoint& H,
                    bool claim_hermitian, bool claim_positive);

// phi* = H_t^{-1} phi^dagger H_h, one per arrow (tail-rank x head-rank).
ArrowMapPoint adjoint_wrt(const PointShape& shape, const ArrowMapPoint& phi, const HermitianMetricPoint& H);
// f_t^{-1} phi^{*H} f_h, i.e. the adjoint for the metric H f. Throws SingularTwist.
ArrowMapPoint twisted_adjoint(const PointShape& shape, const ArrowMapPoint& phi, const EndoPoint& f,
                              const HermitianMetricPoint& H);
// A_h phi - phi A_t.
ArrowMapPoint bracket(const PointShape& shape, const EndoPoint& A, const ArrowMapPoint& phi);

enum class HermOp { Log, Exp, Pow };
// Functional calculus for H-self-adjoint endomorphisms. Log and Pow need
// positivity (NotPositive otherwise); Pow needs 0 < varsigma <= 1 unless
// allow_any_power is set (used for round trips).
EndoPoint herm_log_exp_pow(const EndoPoint& f, HermOp op, const HermitianMetricPoint& H, double varsigma = 1.0,
                           bool allow_any_power = false);
CMatrix herm_function(const CMatrix& f, const CMatrix& H, HermOp op, double varsigma = 1.0);

// Re Tr(X Y^{*H}) on End(E_i).
double endo_inner(const CMatrix& X, const CMatrix& Y, const CMatrix& H);
// Re Tr(X Y^*) for maps from a space with metric Hs to one with metric Ht,
// where Y^* = Hs^{-1} Y^dagger Ht.
double hom_inner(const CMatrix& X, const CMatrix& Y, const CMatrix& Hs, const CMatrix& Ht);

// sum_{h(a)=i} phi_a phi_a^{*Hf} - sum_{t(a)=i} phi_a^{*Hf} phi_a.
CMatrix moment_term(const PointShape& shape, std::size_t vertex, const ArrowMapPoint& phi, const EndoPoint& f,
                    const HermitianMetricPoint& H);

// sum_i <moment(f) - moment(Id), log f_i>. Nonnegative; on lines it is
// |phi|^2 (e^s - 1) s with s the log ratio across the arrow.
double moment_log_gap(const PointShape& shape, const EndoPoint& f, const ArrowMapPoint& phi,
                      const HermitianMetricPoint& H);
// For 0 < varsigma <= 1: sum_a <twisted phi*, [phi*, f^varsigma]> minus
// sum_a |f_t^{-varsigma/2} [phi*, f^varsigma]|^2 + sum_i <moment(Id), f_i^varsigma>.
double power_bracket_gap(const PointShape& shape, const EndoPoint& f, double varsigma, const ArrowMapPoint& phi,
                         const HermitianMetricPoint& H);

// max over random u, v of |H_h(phi u, v) - H_t(u, phi* v)|.
double adjoint_identity_residual(const PointShape& shape, const ArrowMapPoint& phi, const HermitianMetricPoint& H,
                                 std::mt19937_64& rng, int samples = 4);

// Real dimension of {A : A_i H-self-adjoint, [A, phi] = 0}.
int commutant_dimension(const PointShape& shape, const ArrowMapPoint& phi, const HermitianMetricPoint& H,
                        double tol = 1e-9);

// Uniform in [0,1) from the raw 64-bit stream (identical on every platform).
double uniform01(std::mt19937_64& rng);

struct RandomInstance {
  PointShape shape;
  HermitianMetricPoint H;
  EndoPoint f;
  ArrowMapPoint phi;
};

// Up to max_vertices vertices, ranks <= max_rank, up to 5 arrows (loops allowed).
RandomInstance random_instance(std::mt19937_64& rng, int max_vertices = 4, int max_rank = 4);

}  // namespace qhk
