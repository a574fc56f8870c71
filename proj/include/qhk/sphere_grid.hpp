#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>

#include "qhk/quiver.hpp"
#include "qhk/rational.hpp"

namespace qhk {

// Values at the grid nodes, theta-major (node = k * n_phi + j).
using GridField = Eigen::VectorXd;

// Round sphere of prescribed total area with a Gauss-Legendre (in cos theta)
// by equispaced-longitude grid, and the real spherical-harmonic transform
// up to l = n_theta - 1, |m| <= min(l, n_phi/2 - 1).
//
// Coefficients are taken against real harmonics that are orthonormal on the
// unit sphere, so the area inner product is R^2 times the Euclidean one.
// Copies share immutable tables and FFT plans.
class SphereGrid {
 public:
  int n_theta() const;
  int n_phi() const;
  std::size_t size() const;
  const Rational& volume_exact() const;
  double volume() const;
  double radius() const;

  int lmax() const;
  int mmax() const;
  std::size_t num_coeffs() const;
  // Per coefficient: l, m, and 0/1 for the cos/sin part.
  int coeff_l(std::size_t c) const;
  int coeff_m(std::size_t c) const;
  int coeff_part(std::size_t c) const;
  // l(l+1)/R^2: the spectrum of the nonnegative Laplacian.
  const Eigen::VectorXd& eigenvalues() const;

  double theta(std::size_t node) const;
  double phi(std::size_t node) const;
  const Eigen::VectorXd& area_weights() const;

  Eigen::VectorXd analyze(const GridField& u) const;
  GridField synthesize(const Eigen::VectorXd& coeffs) const;
  // Nonnegative Laplacian of the band-limited projection of u.
  GridField laplacian(const GridField& u) const;
  // (1/R) d/dtheta and (1/(R sin theta)) d/dphi of the projection of u.
  std::pair<GridField, GridField> gradient(const GridField& u) const;
  double quadrature(const GridField& f) const;
  double inner(const GridField& f, const GridField& g) const;
  GridField constant(double c) const;
  // Band-limited interpolation onto another grid.
  GridField resample_to(const SphereGrid& target, const GridField& u) const;

  struct Impl;

 private:
  friend SphereGrid make_sphere_grid(int, int, const Rational&);
  std::shared_ptr<const Impl> impl_;
};

// Throws TooCoarse for n_theta < 8 or n_phi < 8, InvalidInput for volume <= 0.
SphereGrid make_sphere_grid(int n_theta, int n_phi, const Rational& total_volume = Rational(1));

// Throws TransformFailure on non-finite input.
GridField laplacian_apply(const SphereGrid& grid, const GridField& u);
double quadrature(const SphereGrid& grid, const GridField& f);

// |p(z)|^2 / (1+|z|^2)^d with z = tan(theta/2) e^{i phi}; evaluated in
// homogeneous form so both poles are regular. Throws DegreeMismatch.
GridField section_density(const SphereGrid& grid, const Section& poly, long d);

// Constant curvature 2 pi m / volume of the round metric on O(m).
GridField background_curvature(const SphereGrid& grid, long m);

enum class HopfLine { Lplus, Lminus };
enum class HopfSide { plus, minus };
long hopf_degree(HopfLine type, long m, HopfSide side);

// theta,phi,value rows.
std::string field_csv(const SphereGrid& grid, const GridField& f);

}  // namespace qhk
