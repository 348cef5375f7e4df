#include "svlaser/observables.hpp"

#include <cmath>
#include <sstream>

#include "svlaser/errors.hpp"
#include "svlaser/log.hpp"

namespace svl {

namespace {

void require_square(const Matrix& rho, const char* who) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << rho.rows() << "x" << rho.cols();
    throw InvalidShapeError(os.str());
  }
}

// Trapezoid weights for n uniformly spaced points with spacing h.
RealVector trapezoid(int n, double h) {
  RealVector w = RealVector::Constant(n, h);
  w(0) *= 0.5;
  w(n - 1) *= 0.5;
  return w;
}

double marginal_variance(const RealVector& axis, const RealVector& marginal) {
  const RealVector w = trapezoid(static_cast<int>(axis.size()), axis(1) - axis(0));
  const double norm = w.dot(marginal);
  if (!(norm > 0.0)) throw UndefinedStatisticError("marginal has no positive weight");
  const double mean = w.dot(marginal.cwiseProduct(axis)) / norm;
  const RealVector dev = (axis.array() - mean).square().matrix();
  return w.dot(marginal.cwiseProduct(dev)) / norm;
}

}  // namespace

cplx expectation(const Matrix& rho, const Matrix& obs) {
  require_square(rho, "expectation");
  if (obs.rows() != rho.rows() || obs.cols() != rho.cols()) {
    std::ostringstream os;
    os << "expectation: state dim " << rho.rows() << " vs observable dim " << obs.rows();
    throw InvalidShapeError(os.str());
  }
  // Tr(rho O) = sum_ij rho_ij O_ji
  return (rho.cwiseProduct(obs.transpose())).sum();
}

cplx expectation(const DensityMatrix& rho, const Operator& obs) { return expectation(rho.matrix(), obs.matrix()); }

QuadratureVariances quadrature_variances(const Matrix& rho) {
  require_square(rho, "quadrature_variances");
  const int d = static_cast<int>(rho.rows());
  // <a> = sum_n sqrt(n) rho_{n, n-1}; <a^2> = sum_n sqrt(n (n-1)) rho_{n, n-2}.
  cplx a = 0.0, a2 = 0.0;
  double n = 0.0;
  for (int k = 1; k < d; ++k) {
    a += std::sqrt(static_cast<double>(k)) * rho(k, k - 1);
    n += k * rho(k, k).real();
    if (k >= 2) a2 += std::sqrt(static_cast<double>(k) * (k - 1)) * rho(k, k - 2);
  }
  // X1^2 = (a^2 + a^dag^2 + 2 a^dag a + 1)/4, X2^2 = -(a^2 + a^dag^2 - 2 a^dag a - 1)/4
  const double tr = rho.trace().real();
  const double x1_sq = (2.0 * a2.real() + 2.0 * n + tr) / 4.0;
  const double x2_sq = (-2.0 * a2.real() + 2.0 * n + tr) / 4.0;
  const double x1 = a.real();
  const double x2 = a.imag();
  return {x1_sq - x1 * x1, x2_sq - x2 * x2};
}

RealVector photon_distribution(const Matrix& rho) {
  require_square(rho, "photon_distribution");
  RealVector p = rho.diagonal().real();
  const double residual = 1.0 - p.sum();
  if (std::abs(residual) > 1e-8) {
    std::ostringstream os;
    os << "photon distribution misses unit sum by " << residual << " (attributed to the truncation tail)";
    log_info(os.str());
  }
  return p;
}

double mean_photon_number(const Matrix& rho) {
  RealVector p = rho.diagonal().real();
  double n = 0.0;
  for (int k = 1; k < p.size(); ++k) n += k * p(k);
  return n;
}

double mandel_q(const Matrix& rho) {
  require_square(rho, "mandel_q");
  RealVector p = rho.diagonal().real();
  double n = 0.0, n2 = 0.0;
  for (int k = 1; k < p.size(); ++k) {
    n += k * p(k);
    n2 += static_cast<double>(k) * k * p(k);
  }
  if (n <= 1e-12) {
    std::ostringstream os;
    os << "Mandel Q is undefined at <n> = " << n;
    throw UndefinedStatisticError(os.str());
  }
  return (n2 - n * n) / n - 1.0;
}

SqueezedVacuumProbe::SqueezedVacuumProbe(int dim, double r) : r_(r) {
  v_ = squeeze(FockSpace(dim), cplx(r, 0.0)).matrix().col(0);
}

double SqueezedVacuumProbe::fidelity(const Matrix& rho) const {
  if (rho.rows() != v_.size()) throw InvalidShapeError("SqueezedVacuumProbe: state dim differs from probe dim");
  return v_.dot(rho * v_).real();
}

double fidelity_to_squeezed_vacuum(const Matrix& rho, double r) {
  require_square(rho, "fidelity_to_squeezed_vacuum");
  return SqueezedVacuumProbe(static_cast<int>(rho.rows()), r).fidelity(rho);
}

void WignerSpec::validate() const {
  if (!(x_max > x_min) || !(p_max > p_min)) throw ConfigError("Wigner grid ranges must be increasing");
  if (resolution < 3) throw ConfigError("Wigner grid needs at least 3 points per axis");
}

double WignerGrid::integral() const {
  const RealVector wx = trapezoid(static_cast<int>(x.size()), x(1) - x(0));
  const RealVector wp = trapezoid(static_cast<int>(p.size()), p(1) - p(0));
  return wx.dot(values * wp);
}

RealVector WignerGrid::x_marginal() const { return values * trapezoid(static_cast<int>(p.size()), p(1) - p(0)); }

RealVector WignerGrid::p_marginal() const {
  return values.transpose() * trapezoid(static_cast<int>(x.size()), x(1) - x(0));
}

double WignerGrid::x_marginal_variance() const { return marginal_variance(x, x_marginal()); }
double WignerGrid::p_marginal_variance() const { return marginal_variance(p, p_marginal()); }

WignerGrid wigner(const Matrix& rho, const WignerSpec& spec) {
  require_square(rho, "wigner");
  spec.validate();
  const int d = static_cast<int>(rho.rows());
  const int m = spec.resolution;
  WignerGrid grid;
  grid.spec = spec;
  grid.x = RealVector::LinSpaced(m, spec.x_min, spec.x_max);
  grid.p = RealVector::LinSpaced(m, spec.p_min, spec.p_max);
  grid.values.resize(m, m);

  // rho_nm (-1)^n, transposed so the contraction with D(2 alpha)_mn is elementwise.
  Matrix signed_t = rho.transpose();
  for (int n = 1; n < d; n += 2) signed_t.col(n) *= -1.0;
  for (int ix = 0; ix < m; ++ix) {
    for (int ip = 0; ip < m; ++ip) {
      const cplx alpha(grid.x(ix), grid.p(ip));
      const Matrix disp = displacement_elements(d, 2.0 * alpha);
      grid.values(ix, ip) = (2.0 / M_PI) * signed_t.cwiseProduct(disp).sum().real();
    }
  }
  const double total = grid.integral();
  if (std::abs(total - 1.0) > 0.02) {
    std::ostringstream os;
    os << "Wigner grid integrates to " << total << "; the state extends beyond the grid";
    log_warning(os.str());
  }
  return grid;
}

std::vector<cplx> coherence_elements(const Matrix& rho, const std::vector<std::pair<int, int>>& pairs) {
  require_square(rho, "coherence_elements");
  const int d = static_cast<int>(rho.rows());
  std::vector<cplx> out;
  out.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= d || j >= d) {
      std::ostringstream os;
      os << "coherence element (" << i << ", " << j << ") outside dim " << d;
      throw IndexError(os.str());
    }
    out.push_back(rho(i, j));
  }
  return out;
}

Matrix reduced_field(const Vector& psi, int atom_levels) {
  if (atom_levels < 1 || psi.size() % atom_levels != 0)
    throw InvalidShapeError("reduced_field: ket length is not a multiple of the atom dimension");
  const Eigen::Index n = psi.size() / atom_levels;
  // Column s holds the field amplitudes of atomic level s.
  Eigen::Map<const Matrix> blocks(psi.data(), n, atom_levels);
  return blocks * blocks.adjoint();
}

double atom_population(const Vector& psi, int atom_levels, int level) {
  if (atom_levels < 1 || psi.size() % atom_levels != 0)
    throw InvalidShapeError("atom_population: ket length is not a multiple of the atom dimension");
  if (level < 0 || level >= atom_levels) throw IndexError("atom_population: level out of range");
  const Eigen::Index n = psi.size() / atom_levels;
  return psi.segment(level * n, n).squaredNorm();
}

}  // namespace svl
