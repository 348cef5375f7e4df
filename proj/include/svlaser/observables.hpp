#pragma once

// Field observables. Functions taking a Matrix expect a field density matrix
// in the Fock basis.

#include <utility>
#include <vector>

#include "svlaser/hilbert.hpp"

namespace svl {

cplx expectation(const Matrix& rho, const Matrix& obs);
cplx expectation(const DensityMatrix& rho, const Operator& obs);

// X1 = (a + a^dag)/2, X2 = (a - a^dag)/(2i).
struct QuadratureVariances {
  double x1;
  double x2;
};
QuadratureVariances quadrature_variances(const Matrix& rho);

RealVector photon_distribution(const Matrix& rho);
double mean_photon_number(const Matrix& rho);

// (<n^2> - <n>^2)/<n> - 1. Throws UndefinedStatisticError for <n> <= 1e-12.
double mandel_q(const Matrix& rho);

// <0|S^dag(r) rho S(r)|0> with S(r)|0> computed once per (dim, r).
class SqueezedVacuumProbe {
 public:
  SqueezedVacuumProbe(int dim, double r);
  double r() const noexcept { return r_; }
  double fidelity(const Matrix& rho) const;
  const Vector& state() const noexcept { return v_; }

 private:
  double r_;
  Vector v_;
};

double fidelity_to_squeezed_vacuum(const Matrix& rho, double r);

struct WignerSpec {
  double x_min = -3.0, x_max = 3.0;
  double p_min = -3.0, p_max = 3.0;
  int resolution = 121;

  void validate() const;
};

// W(x, p) at alpha = x + i p, so the x marginal is the X1 distribution.
struct WignerGrid {
  WignerSpec spec;
  RealVector x;
  RealVector p;
  Eigen::MatrixXd values;  // values(ix, ip)

  // Trapezoidal integral over the grid.
  double integral() const;
  // Integral over p at each x.
  RealVector x_marginal() const;
  RealVector p_marginal() const;
  // Variance of the normalized marginal.
  double x_marginal_variance() const;
  double p_marginal_variance() const;
};

// (2/pi) Tr[rho D(alpha) P D^dag(alpha)] = (2/pi) sum_nm rho_nm D(2 alpha)_mn (-1)^n,
// using exact matrix elements of the untruncated displacement. Warns when the
// grid integral misses 1 by more than 0.02.
WignerGrid wigner(const Matrix& rho, const WignerSpec& spec = {});

std::vector<cplx> coherence_elements(const Matrix& rho, const std::vector<std::pair<int, int>>& pairs);

// Reduced field state and atomic populations of an atom (x) field ket.
Matrix reduced_field(const Vector& psi, int atom_levels);
double atom_population(const Vector& psi, int atom_levels, int level);

}  // namespace svl
