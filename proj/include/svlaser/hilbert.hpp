#pragma once

// Truncated Fock-space linear algebra. Everything is dense: operators are
// square complex matrices over the retained levels |0>..|dim-1>.
//
// Joint atom-field objects use the atom-major convention (atom (x) field):
// the joint basis index of |s>|n> is s * field_dim + n.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace svl {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Tail population above this value fails a run.
inline constexpr double kTailLimit = 1e-6;

class FockSpace {
 public:
  explicit FockSpace(int dim);

  int dim() const noexcept { return dim_; }
  // Number of top levels monitored for truncation loss (10% of dim, at least one).
  int tail_levels() const noexcept;

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_;
};

class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix entries);

  static Operator identity(int dim);
  static Operator zero(int dim);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  bool is_hermitian(double tol = 1e-12) const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);
  friend Operator operator*(cplx s, Operator op) { return op *= s; }
  friend Operator operator*(Operator op, cplx s) { return op *= s; }
  friend Vector operator*(const Operator& op, const Vector& v);

 private:
  Matrix m_;
};

Operator commutator(const Operator& x, const Operator& y);

class StateVector {
 public:
  // Requires a unit vector (within 1e-10); use normalized() otherwise.
  explicit StateVector(Vector amplitudes);

  static StateVector normalized(Vector amplitudes);
  static StateVector basis(int dim, int index);

  int dim() const noexcept { return static_cast<int>(v_.size()); }
  const Vector& amplitudes() const noexcept { return v_; }
  cplx operator[](int i) const { return v_(i); }

  // <this|other>
  cplx inner(const StateVector& other) const;

 private:
  Vector v_;
};

class DensityMatrix {
 public:
  // Validates trace (1e-8), Hermiticity (1e-10) and positivity (-1e-8).
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix basis(int dim, int index);
  // Skips validation; for intermediate integrator states and tests that
  // deliberately build invalid inputs.
  static DensityMatrix unchecked(Matrix entries);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  double trace() const { return m_.trace().real(); }
  double min_eigenvalue() const;

 private:
  struct NoCheck {};
  DensityMatrix(Matrix entries, NoCheck) : m_(std::move(entries)) {}
  Matrix m_;
};

// Standard field operators.
Operator annihilation(const FockSpace& space);
Operator creation(const FockSpace& space);
Operator number(const FockSpace& space);
Operator parity(const FockSpace& space);

// |row><col| on a `levels`-level atom.
Operator atomic_projector(int levels, int row, int col);

enum class AtomLevel : int { g = 0, e = 1, i = 2 };

// Two-level raising/lowering in the {|g>,|e>} basis: sigma_plus = |e><g|.
Operator sigma_plus();
Operator sigma_minus();

Operator tensor(const Operator& left, const Operator& right);
StateVector tensor(const StateVector& left, const StateVector& right);
DensityMatrix tensor(const DensityMatrix& left, const DensityMatrix& right);
Matrix tensor(const Matrix& left, const Matrix& right);

struct TensorDims {
  int atom;
  int field;
};

enum class Subsystem { atom, field };

// Traces out `over`, returning the state of the other factor.
DensityMatrix partial_trace(const DensityMatrix& rho, TensorDims dims, Subsystem over);
Matrix partial_trace(const Matrix& rho, TensorDims dims, Subsystem over);

// exp(op) by scaling and squaring with a Pade approximant.
Operator matrix_exponential(const Operator& op);
Matrix matrix_exponential(const Matrix& m);

// exp(-i H dt) for Hermitian H via its eigendecomposition; unitary to rounding.
Matrix unitary_propagator(const Matrix& hermitian, double dt);

// One step of exact evolution under a time-independent Hamiltonian.
StateVector evolve_step(const Operator& hamiltonian, const StateVector& psi, double dt);
DensityMatrix evolve_step(const Operator& hamiltonian, const DensityMatrix& rho, double dt);

// exp(alpha a^dag - alpha* a) on the truncated space. Warns through the log
// sink when D|0> leaves more than 1e-8 in the top levels.
Operator displacement(const FockSpace& space, cplx alpha);

// exp[(xi* a^2 - xi a^dag^2)/2]; S(r)|0> has <n> = sinh^2 r and is squeezed
// along X1 = (a + a^dag)/2 for real positive r. Elements are those of the
// untruncated operator on the retained levels, so the result is unitary only
// up to the population it moves above the truncation.
Operator squeeze(const FockSpace& space, cplx xi);

// Matrix elements <m|D(beta)|n> of the untruncated displacement operator,
// restricted to the first `dim` levels.
Matrix displacement_elements(int dim, cplx beta);

// Population in the top FockSpace::tail_levels() levels.
double tail_population(const StateVector& psi);
double tail_population(const Matrix& rho);
// For an atom (x) field state, the field tail after tracing out the atom.
double tail_population(const Matrix& rho_joint, TensorDims dims);

double hermiticity_defect(const Matrix& m);
double min_eigenvalue_hermitian(const Matrix& m);

}  // namespace svl
