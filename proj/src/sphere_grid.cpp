#include "qhk/sphere_grid.hpp"

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <vector>

#include "qhk/error.hpp"

namespace qhk {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

}  // namespace

struct SphereGrid::Impl {
  int nt = 0, np = 0, L = 0, M = 0, nfreq = 0;
  Rational vol_exact;
  double vol = 0, R = 0;
  std::vector<double> x, sint, theta, gw;  // per colatitude ring
  Eigen::VectorXd area;                    // per node
  std::vector<int> cl, cm, cp;             // per coefficient
  std::vector<std::size_t> moff;           // first coefficient of each m
  Eigen::VectorXd eig;
  // Legendre tables per ring: P[k][lmoff[m] + l - m].
  std::vector<std::size_t> lmoff;
  std::size_t nlm = 0;
  std::vector<double> P, dP;
  Plans plans;

  double leg(int k, int l, int m) const { return P[k * nlm + lmoff[m] + (l - m)]; }
  double dleg(int k, int l, int m) const { return dP[k * nlm + lmoff[m] + (l - m)]; }

  // Fourier coefficients per ring, m = 0..nfreq-1; entry (k, m).
  std::vector<std::complex<double>> forward(const GridField& u) const {
    std::vector<double> in(u.data(), u.data() + u.size());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(nt) * nfreq);
    fftw_execute_dft_r2c(plans.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  GridField backward(std::vector<std::complex<double>> spec) const {
    GridField u(static_cast<Eigen::Index>(nt) * np);
    fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(spec.data()), u.data());
    return u;
  }

  // g(k, m) = sum_l c_lm P_l^m(x_k) packed back into FFT input layout.
  GridField synth(const Eigen::VectorXd& c, bool dtheta) const {
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(nt) * nfreq, 0.0);
    const double s0 = 1.0 / std::sqrt(2 * M_PI), s1 = 1.0 / std::sqrt(M_PI);
    for (int k = 0; k < nt; ++k) {
      for (int m = 0; m <= M; ++m) {
        double a = 0, b = 0;
        std::size_t off = moff[m];
        for (int l = m; l <= L; ++l) {
          double p = dtheta ? dleg(k, l, m) : leg(k, l, m);
          if (m == 0) {
            a += c[off + l] * p;
          } else {
            a += c[off + 2 * (l - m)] * p;
            b += c[off + 2 * (l - m) + 1] * p;
          }
        }
        auto& g = spec[static_cast<std::size_t>(k) * nfreq + m];
        g = (m == 0) ? std::complex<double>(a * s0, 0) : std::complex<double>(0.5 * a * s1, -0.5 * b * s1);
      }
    }
    return backward(std::move(spec));
  }
};

int SphereGrid::n_theta() const { return impl_->nt; }
int SphereGrid::n_phi() const { return impl_->np; }
std::size_t SphereGrid::size() const { return static_cast<std::size_t>(impl_->nt) * impl_->np; }
const Rational& SphereGrid::volume_exact() const { return impl_->vol_exact; }
double SphereGrid::volume() const { return impl_->vol; }
double SphereGrid::radius() const { return impl_->R; }
int SphereGrid::lmax() const { return impl_->L; }
int SphereGrid::mmax() const { return impl_->M; }
std::size_t SphereGrid::num_coeffs() const { return impl_->cl.size(); }
int SphereGrid::coeff_l(std::size_t c) const { return impl_->cl[c]; }
int SphereGrid::coeff_m(std::size_t c) const { return impl_->cm[c]; }
int SphereGrid::coeff_part(std::size_t c) const { return impl_->cp[c]; }
const Eigen::VectorXd& SphereGrid::eigenvalues() const { return impl_->eig; }
const Eigen::VectorXd& SphereGrid::area_weights() const { return impl_->area; }

double SphereGrid::theta(std::size_t node) const { return impl_->theta[node / impl_->np]; }
double SphereGrid::phi(std::size_t node) const {
  return 2 * M_PI * static_cast<double>(node % impl_->np) / impl_->np;
}

Eigen::VectorXd SphereGrid::analyze(const GridField& u) const {
  const Impl& g = *impl_;
  auto F = g.forward(u);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_coeffs()));
  const double dphi = 2 * M_PI / g.np;
  const double s0 = 1.0 / std::sqrt(2 * M_PI), s1 = 1.0 / std::sqrt(M_PI);
  for (int k = 0; k < g.nt; ++k) {
    const double w = g.gw[k] * dphi;
    for (int m = 0; m <= g.M; ++m) {
      auto f = F[static_cast<std::size_t>(k) * g.nfreq + m];
      std::size_t off = g.moff[m];
      for (int l = m; l <= g.L; ++l) {
        double p = w * g.leg(k, l, m);
        if (m == 0) {
          c[off + l] += p * f.real() * s0;
        } else {
          c[off + 2 * (l - m)] += p * f.real() * s1;
          c[off + 2 * (l - m) + 1] -= p * f.imag() * s1;
        }
      }
    }
  }
  return c;
}

GridField SphereGrid::synthesize(const Eigen::VectorXd& c) const { return impl_->synth(c, false); }

GridField SphereGrid::laplacian(const GridField& u) const {
  Eigen::VectorXd c = analyze(u);
  return synthesize(c.cwiseProduct(impl_->eig));
}

std::pair<GridField, GridField> SphereGrid::gradient(const GridField& u) const {
  const Impl& g = *impl_;
  Eigen::VectorXd c = analyze(u);
  GridField gt = g.synth(c, true) / g.R;
  // d/dphi: (A cos + B sin) -> m (B cos - A sin).
  Eigen::VectorXd cphi = Eigen::VectorXd::Zero(c.size());
  for (std::size_t i = 0; i < num_coeffs(); ++i) {
    int m = g.cm[i];
    if (m == 0) continue;
    if (g.cp[i] == 0) cphi[i] = m * c[i + 1];
    else cphi[i] = -m * c[i - 1];
  }
  GridField gp = g.synth(cphi, false);
  for (int k = 0; k < g.nt; ++k) gp.segment(static_cast<Eigen::Index>(k) * g.np, g.np) /= (g.R * g.sint[k]);
  return {gt, gp};
}

double SphereGrid::quadrature(const GridField& f) const { return impl_->area.dot(f); }

double SphereGrid::inner(const GridField& f, const GridField& h) const {
  return impl_->area.dot(f.cwiseProduct(h));
}

GridField SphereGrid::constant(double c) const {
  return GridField::Constant(static_cast<Eigen::Index>(size()), c);
}

GridField SphereGrid::resample_to(const SphereGrid& target, const GridField& u) const {
  Eigen::VectorXd c = analyze(u);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target.num_coeffs()));
  const auto& t = *target.impl_;
  for (std::size_t i = 0; i < num_coeffs(); ++i) {
    int l = impl_->cl[i], m = impl_->cm[i];
    if (l > t.L || m > t.M) continue;
    std::size_t j = t.moff[m] + (m == 0 ? l : 2 * (l - m) + impl_->cp[i]);
    d[j] = c[i];
  }
  return target.synthesize(d);
}

SphereGrid make_sphere_grid(int n_theta, int n_phi, const Rational& total_volume) {
  if (n_theta < 8 || n_phi < 8)
    throw Error(ErrorCode::TooCoarse, "grid " + std::to_string(n_theta) + "x" + std::to_string(n_phi) +
                                          " is below the 8x8 minimum");
  if (total_volume <= 0) throw Error(ErrorCode::InvalidInput, "total volume must be positive");
  auto g = std::make_shared<SphereGrid::Impl>();
  g->nt = n_theta;
  g->np = n_phi;
  g->L = n_theta - 1;
  g->M = std::min(g->L, n_phi / 2 - 1);
  g->nfreq = n_phi / 2 + 1;
  g->vol_exact = total_volume;
  g->vol = total_volume.get_d();
  g->R = std::sqrt(g->vol / (4 * M_PI));

  gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n_theta));
  if (!tab) throw Error(ErrorCode::TransformFailure, "Gauss-Legendre table allocation failed");
  std::vector<std::pair<double, double>> nodes;
  for (int i = 0; i < n_theta; ++i) {
    double xi, wi;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &xi, &wi, tab);
    nodes.emplace_back(xi, wi);
  }
  gsl_integration_glfixed_table_free(tab);
  std::sort(nodes.begin(), nodes.end(), [](auto& a, auto& b) { return a.first > b.first; });  // north first
  for (auto& [xi, wi] : nodes) {
    g->x.push_back(xi);
    g->gw.push_back(wi);
    g->theta.push_back(std::acos(xi));
    g->sint.push_back(std::sqrt((1 - xi) * (1 + xi)));
  }

  const double R2 = g->R * g->R, dphi = 2 * M_PI / n_phi;
  g->area.resize(static_cast<Eigen::Index>(n_theta) * n_phi);
  for (int k = 0; k < n_theta; ++k)
    g->area.segment(static_cast<Eigen::Index>(k) * n_phi, n_phi).setConstant(g->gw[k] * dphi * R2);

  for (int m = 0; m <= g->M; ++m) {
    g->moff.push_back(g->cl.size());
    for (int l = m; l <= g->L; ++l) {
      for (int part = 0; part < (m == 0 ? 1 : 2); ++part) {
        g->cl.push_back(l);
        g->cm.push_back(m);
        g->cp.push_back(part);
      }
    }
  }
  g->eig.resize(static_cast<Eigen::Index>(g->cl.size()));
  for (std::size_t i = 0; i < g->cl.size(); ++i) g->eig[i] = g->cl[i] * (g->cl[i] + 1.0) / R2;

  for (int m = 0; m <= g->M; ++m) {
    g->lmoff.push_back(g->nlm);
    g->nlm += static_cast<std::size_t>(g->L + 1 - m);
  }
  g->P.assign(g->nlm * n_theta, 0.0);
  g->dP.assign(g->nlm * n_theta, 0.0);
  for (int k = 0; k < n_theta; ++k) {
    const double x = g->x[k], s = g->sint[k];
    double pmm = 1.0 / std::sqrt(2.0);
    for (int m = 0; m <= g->M; ++m) {
      if (m > 0) pmm *= std::sqrt((2.0 * m + 1) / (2.0 * m)) * s;
      double* row = &g->P[k * g->nlm + g->lmoff[m]];
      row[0] = pmm;
      if (m + 1 <= g->L) row[1] = std::sqrt(2.0 * m + 3) * x * pmm;
      for (int l = m + 2; l <= g->L; ++l) {
        double a = std::sqrt((4.0 * l * l - 1) / (double(l) * l - double(m) * m));
        double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1));
        row[l - m] = a * (x * row[l - m - 1] - b * row[l - m - 2]);
      }
      double* drow = &g->dP[k * g->nlm + g->lmoff[m]];
      for (int l = m; l <= g->L; ++l) {
        double prev = (l - 1 >= m) ? row[l - 1 - m] : 0.0;
        double coef = (l > m) ? std::sqrt((2.0 * l + 1) * (double(l) * l - double(m) * m) / (2.0 * l - 1)) : 0.0;
        drow[l - m] = (l * x * row[l - m] - coef * prev) / s;
      }
    }
  }

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<double> rin(static_cast<std::size_t>(n_theta) * n_phi);
    std::vector<std::complex<double>> cout(static_cast<std::size_t>(n_theta) * g->nfreq);
    int n[] = {n_phi};
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    g->plans.r2c = fftw_plan_many_dft_r2c(1, n, n_theta, rin.data(), nullptr, 1, n_phi,
                                          reinterpret_cast<fftw_complex*>(cout.data()), nullptr, 1, g->nfreq, flags);
    g->plans.c2r = fftw_plan_many_dft_c2r(1, n, n_theta, reinterpret_cast<fftw_complex*>(cout.data()), nullptr, 1,
                                          g->nfreq, rin.data(), nullptr, 1, n_phi, flags | FFTW_DESTROY_INPUT);
  }
  if (!g->plans.r2c || !g->plans.c2r) throw Error(ErrorCode::TransformFailure, "FFT planning failed");

  SphereGrid grid;
  grid.impl_ = std::move(g);
  return grid;
}

GridField laplacian_apply(const SphereGrid& grid, const GridField& u) {
  if (static_cast<std::size_t>(u.size()) != grid.size())
    throw Error(ErrorCode::TransformFailure, "field size does not match the grid");
  if (!u.allFinite()) throw Error(ErrorCode::TransformFailure, "non-finite field value");
  return grid.laplacian(u);
}

double quadrature(const SphereGrid& grid, const GridField& f) { return grid.quadrature(f); }

GridField section_density(const SphereGrid& grid, const Section& poly, long d) {
  if (!poly.is_zero() && poly.degree() > d)
    throw Error(ErrorCode::DegreeMismatch, "polynomial degree " + std::to_string(poly.degree()) +
                                               " exceeds " + std::to_string(d));
  GridField out = GridField::Zero(static_cast<Eigen::Index>(grid.size()));
  if (poly.is_zero()) return out;
  std::vector<std::complex<double>> c;
  for (const auto& z : poly.coeffs()) c.emplace_back(z.re.get_d(), z.im.get_d());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    double h = grid.theta(node) / 2, ph = grid.phi(node);
    double s = std::sin(h), co = std::cos(h);
    std::complex<double> acc = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
      acc += c[k] * std::pow(s, double(k)) * std::pow(co, double(d - static_cast<long>(k))) *
             std::polar(1.0, double(k) * ph);
    out[static_cast<Eigen::Index>(node)] = std::norm(acc);
  }
  return out;
}

GridField background_curvature(const SphereGrid& grid, long m) {
  return grid.constant(2 * M_PI * static_cast<double>(m) / grid.volume());
}

long hopf_degree(HopfLine type, long m, HopfSide side) {
  bool same = (type == HopfLine::Lplus) == (side == HopfSide::plus);
  return same ? m : -m;
}

std::string field_csv(const SphereGrid& grid, const GridField& f) {
  std::ostringstream os;
  os.precision(17);
  os << "theta,phi,value\n";
  for (std::size_t n = 0; n < grid.size(); ++n)
    os << grid.theta(n) << ',' << grid.phi(n) << ',' << f[static_cast<Eigen::Index>(n)] << '\n';
  return os.str();
}

}  // namespace qhk
