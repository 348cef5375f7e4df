#include "svlaser/hilbert.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svlaser/errors.hpp"
#include "svlaser/log.hpp"

namespace svl {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidShapeError(os.str());
  }
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw InvalidShapeError(os.str());
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

int tail_levels_for(int dim) { return std::max(1, (dim + 9) / 10); }

void warn_if_truncated(const Operator& op, const char* name) {
  Vector v = op.matrix().col(0);
  double tail = tail_population(StateVector::normalized(v));
  if (tail > 1e-8) {
    std::ostringstream os;
    os << name << ": tail population " << tail << " of the image of |0> exceeds 1e-8 at dim "
       << op.dim() << "; increase the truncation";
    log_warning(os.str());
  }
}

}  // namespace

FockSpace::FockSpace(int dim) : dim_(dim) {
  if (dim < 2) throw InvalidSpaceError("FockSpace requires dim >= 2, got " + std::to_string(dim));
}

int FockSpace::tail_levels() const noexcept { return tail_levels_for(dim_); }

Operator::Operator(Matrix entries) : m_(std::move(entries)) { require_square(m_, "Operator"); }

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }
Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }

bool Operator::is_hermitian(double tol) const { return hermiticity_defect(m_) <= tol; }

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_dim(dim(), rhs.dim(), "Operator +");
  m_ += rhs.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_dim(dim(), rhs.dim(), "Operator -");
  m_ -= rhs.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_dim(lhs.dim(), rhs.dim(), "Operator *");
  return Operator(lhs.m_ * rhs.m_);
}

Vector operator*(const Operator& op, const Vector& v) {
  require_same_dim(op.dim(), static_cast<int>(v.size()), "Operator * vector");
  return op.m_ * v;
}

Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

StateVector::StateVector(Vector amplitudes) : v_(std::move(amplitudes)) {
  if (v_.size() < 1) throw InvalidShapeError("StateVector: empty amplitude vector");
  if (!v_.allFinite()) throw NumericDomainError("StateVector: non-finite amplitude");
  double n = v_.norm();
  if (std::abs(n - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "StateVector: norm " << n << " differs from 1 by more than 1e-10";
    throw NumericDomainError(os.str());
  }
}

StateVector StateVector::normalized(Vector amplitudes) {
  double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericDomainError("StateVector: cannot normalize");
  amplitudes /= n;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(int dim, int index) {
  if (index < 0 || index >= dim) throw IndexError("StateVector::basis: index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

cplx StateVector::inner(const StateVector& other) const {
  require_same_dim(dim(), other.dim(), "StateVector::inner");
  return v_.dot(other.v_);  // Eigen's dot conjugates the left operand
}

DensityMatrix::DensityMatrix(Matrix entries) : m_(std::move(entries)) {
  require_square(m_, "DensityMatrix");
  if (!all_finite(m_)) throw NumericDomainError("DensityMatrix: non-finite entry");
  double tr_err = std::abs(m_.trace() - cplx(1.0));
  if (tr_err > 1e-8) {
    std::ostringstream os;
    os << "DensityMatrix: trace differs from 1 by " << tr_err;
    throw NumericDomainError(os.str());
  }
  double herm = hermiticity_defect(m_);
  if (herm > 1e-10) {
    std::ostringstream os;
    os << "DensityMatrix: Hermiticity defect " << herm;
    throw NumericDomainError(os.str());
  }
  double lmin = min_eigenvalue_hermitian(m_);
  if (lmin < -1e-8) {
    std::ostringstream os;
    os << "DensityMatrix: minimum eigenvalue " << lmin << " below -1e-8";
    throw NumericDomainError(os.str());
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix(v * v.adjoint(), NoCheck{});
}

DensityMatrix DensityMatrix::basis(int dim, int index) {
  return from_pure(StateVector::basis(dim, index));
}

DensityMatrix DensityMatrix::unchecked(Matrix entries) {
  require_square(entries, "DensityMatrix");
  return DensityMatrix(std::move(entries), NoCheck{});
}

double DensityMatrix::min_eigenvalue() const { return min_eigenvalue_hermitian(m_); }

Operator annihilation(const FockSpace& space) {
  const int d = space.dim();
  Matrix m = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(m));
}

Operator creation(const FockSpace& space) { return annihilation(space).adjoint(); }

Operator number(const FockSpace& space) {
  const int d = space.dim();
  Matrix m = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = static_cast<double>(n);
  return Operator(std::move(m));
}

Operator parity(const FockSpace& space) {
  const int d = space.dim();
  Matrix m = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return Operator(std::move(m));
}

Operator atomic_projector(int levels, int row, int col) {
  if (levels < 2) throw InvalidSpaceError("atomic_projector: need at least two levels");
  if (row < 0 || row >= levels || col < 0 || col >= levels)
    throw IndexError("atomic_projector: level index out of range");
  Matrix m = Matrix::Zero(levels, levels);
  m(row, col) = 1.0;
  return Operator(std::move(m));
}

Operator sigma_plus() {
  return atomic_projector(2, static_cast<int>(AtomLevel::e), static_cast<int>(AtomLevel::g));
}

Operator sigma_minus() {
  return atomic_projector(2, static_cast<int>(AtomLevel::g), static_cast<int>(AtomLevel::e));
}

Matrix tensor(const Matrix& left, const Matrix& right) {
  const auto lr = left.rows(), lc = left.cols(), rr = right.rows(), rc = right.cols();
  Matrix out(lr * rr, lc * rc);
  for (Eigen::Index i = 0; i < lr; ++i)
    for (Eigen::Index j = 0; j < lc; ++j) out.block(i * rr, j * rc, rr, rc) = left(i, j) * right;
  return out;
}

Operator tensor(const Operator& left, const Operator& right) {
  return Operator(tensor(left.matrix(), right.matrix()));
}

StateVector tensor(const StateVector& left, const StateVector& right) {
  return StateVector::normalized(tensor(Matrix(left.amplitudes()), Matrix(right.amplitudes())));
}

DensityMatrix tensor(const DensityMatrix& left, const DensityMatrix& right) {
  return DensityMatrix::unchecked(tensor(left.matrix(), right.matrix()));
}

Matrix partial_trace(const Matrix& rho, TensorDims dims, Subsystem over) {
  if (dims.atom < 1 || dims.field < 1) throw InvalidShapeError("partial_trace: empty factor");
  if (rho.rows() != rho.cols() || rho.rows() != static_cast<Eigen::Index>(dims.atom) * dims.field) {
    std::ostringstream os;
    os << "partial_trace: state of dimension " << rho.rows() << " does not factor as "
       << dims.atom << " x " << dims.field;
    throw InvalidShapeError(os.str());
  }
  const int da = dims.atom, df = dims.field;
  if (over == Subsystem::atom) {
    Matrix out = Matrix::Zero(df, df);
    for (int s = 0; s < da; ++s) out += rho.block(s * df, s * df, df, df);
    return out;
  }
  Matrix out(da, da);
  for (int s = 0; s < da; ++s)
    for (int t = 0; t < da; ++t) out(s, t) = rho.block(s * df, t * df, df, df).trace();
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, TensorDims dims, Subsystem over) {
  return DensityMatrix::unchecked(partial_trace(rho.matrix(), dims, over));
}

Matrix matrix_exponential(const Matrix& m) {
  require_square(m, "matrix_exponential");
  if (!all_finite(m)) throw NumericDomainError("matrix_exponential: non-finite entries");
  Matrix out = m.exp();
  if (!all_finite(out)) throw NumericDomainError("matrix_exponential: result overflowed");
  return out;
}

Operator matrix_exponential(const Operator& op) { return Operator(matrix_exponential(op.matrix())); }

Matrix unitary_propagator(const Matrix& hermitian, double dt) {
  require_square(hermitian, "unitary_propagator");
  if (!all_finite(hermitian)) throw NumericDomainError("unitary_propagator: non-finite entries");
  Matrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalFailure("unitary_propagator: eigensolver failed");
  Vector phases = (-kI * dt * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StateVector evolve_step(const Operator& hamiltonian, const StateVector& psi, double dt) {
  require_same_dim(hamiltonian.dim(), psi.dim(), "evolve_step");
  Matrix u = unitary_propagator(hamiltonian.matrix(), dt);
  return StateVector::normalized(u * psi.amplitudes());
}

DensityMatrix evolve_step(const Operator& hamiltonian, const DensityMatrix& rho, double dt) {
  require_same_dim(hamiltonian.dim(), rho.dim(), "evolve_step");
  Matrix u = unitary_propagator(hamiltonian.matrix(), dt);
  return DensityMatrix::unchecked(u * rho.matrix() * u.adjoint());
}

Operator displacement(const FockSpace& space, cplx alpha) {
  Operator a = annihilation(space);
  Operator gen = alpha * a.adjoint() - std::conj(alpha) * a;
  Operator d = matrix_exponential(gen);
  warn_if_truncated(d, "displacement");
  return d;
}

Operator squeeze(const FockSpace& space, cplx xi) {
  // a^2 couples levels two apart, so the truncation edge distorts the top
  // rows of a truncated exponential. Exponentiate on a padded space instead.
  const int d = space.dim();
  FockSpace padded(d + std::max(16, d / 2));
  Operator a = annihilation(padded);
  Operator ad = a.adjoint();
  Operator gen = 0.5 * (std::conj(xi) * (a * a) - xi * (ad * ad));
  Operator s(matrix_exponential(gen.matrix()).topLeftCorner(d, d));
  warn_if_truncated(s, "squeeze");
  return s;
}

Matrix displacement_elements(int dim, cplx beta) {
  if (dim < 1) throw InvalidSpaceError("displacement_elements: dim must be positive");
  Matrix d = Matrix::Zero(dim, dim);
  const double x = std::norm(beta);
  const double mod = std::abs(beta);
  // <n+k|D|n> = f_n^k e^{i k arg beta} and <n|D|n+k> = f_n^k (-e^{-i arg beta})^k with
  // f_n^k = sqrt(n!/(n+k)!) |beta|^k e^{-|beta|^2/2} L_n^(k)(|beta|^2). The Laguerre
  // recurrence is run directly on f so nothing overflows.
  const cplx unit = mod > 0.0 ? beta / mod : cplx(1.0, 0.0);
  const cplx unit_up = -std::conj(unit);
  cplx phase_lo = 1.0, phase_up = 1.0;
  for (int k = 0; k < dim; ++k) {
    if (k > 0) {
      phase_lo *= unit;
      phase_up *= unit_up;
    }
    if (k > 0 && mod == 0.0) break;
    const int count = dim - k;
    const double log_f0 = (k > 0 ? k * std::log(mod) : 0.0) - 0.5 * std::lgamma(k + 1.0) - 0.5 * x;
    double f_prev = std::exp(log_f0);
    double f_cur = count > 1 ? f_prev * (1.0 + k - x) / std::sqrt(k + 1.0) : 0.0;
    for (int n = 0; n < count; ++n) {
      const double f = n == 0 ? f_prev : f_cur;
      d(n + k, n) = f * phase_lo;
      if (k > 0) d(n, n + k) = f * phase_up;
      if (n >= 1 && n + 1 < count) {
        const double nn = n, kk = k;
        const double next = ((2.0 * nn + 1.0 + kk - x) * f_cur * std::sqrt((nn + 1.0) / (nn + kk + 1.0)) -
                             (nn + kk) * f_prev * std::sqrt(nn * (nn + 1.0) / ((nn + kk) * (nn + kk + 1.0)))) /
                            (nn + 1.0);
        f_prev = f_cur;
        f_cur = next;
      }
    }
  }
  return d;
}

double tail_population(const StateVector& psi) {
  const int d = psi.dim();
  const int k = tail_levels_for(d);
  return psi.amplitudes().tail(k).squaredNorm();
}

double tail_population(const Matrix& rho) {
  const int d = static_cast<int>(rho.rows());
  const int k = tail_levels_for(d);
  double sum = 0.0;
  for (int n = d - k; n < d; ++n) sum += rho(n, n).real();
  return sum;
}

double tail_population(const Matrix& rho_joint, TensorDims dims) {
  return tail_population(partial_trace(rho_joint, dims, Subsystem::atom));
}

double hermiticity_defect(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue_hermitian(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue solver failed");
  return es.eigenvalues().minCoeff();
}

}  // namespace svl
