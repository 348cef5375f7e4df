#include "svlaser/algebra.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "svlaser/errors.hpp"

namespace svl {
namespace {

void require_kappa(double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    std::ostringstream os;
    os << "kappa = " << kappa << " outside [0, 1): the Bogoliubov transformation is not canonical";
    throw UnphysicalParameterError(os.str());
  }
}

void check_tail(const StateVector& psi, const char* what) {
  double tail = tail_population(psi);
  if (tail > kTailLimit) {
    std::ostringstream os;
    os << what << ": tail population " << tail << " exceeds " << kTailLimit << " at dim "
       << psi.dim() << "; increase the truncation";
    throw TruncationError(os.str());
  }
}

// Flips the global sign so the first nonzero amplitude is real positive.
Vector fix_phase(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-300) {
      cplx phase = std::conj(v(i)) / std::abs(v(i));
      return v * phase;
    }
  }
  return v;
}

// log of (2k)!!, (2k-1)!! and (2k+1)!! for k >= 0.
double log_even_df(int k) { return k * std::log(2.0) + std::lgamma(k + 1.0); }
double log_odd_df_below(int k) {
  return std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) - std::lgamma(k + 1.0);
}
double log_odd_df_above(int k) { return log_odd_df_below(k + 1); }

using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Vacuum amplitudes from the recursion on `len` levels, unnormalized.
ExtVector vacuum_amplitudes(long double kappa, int len) {
  ExtVector c = ExtVector::Zero(len);
  c(0) = 1.0L;
  for (int n = 1; n + 1 < len; ++n)
    c(n + 1) = -kappa * std::sqrt(static_cast<long double>(n) / (n + 1.0L)) * c(n - 1);
  return c;
}

// A^dag v using the tridiagonal structure. Only the top entry is affected by
// the missing level beyond the end of v.
ExtVector apply_raise(long double kappa, const ExtVector& v) {
  const Eigen::Index len = v.size();
  const long double norm = 1.0L / std::sqrt(1.0L - kappa * kappa);
  ExtVector out(len);
  for (Eigen::Index m = 0; m < len; ++m) {
    long double acc = 0.0L;
    if (m > 0) acc += std::sqrt(static_cast<long double>(m)) * v(m - 1);
    if (m + 1 < len) acc += kappa * std::sqrt(m + 1.0L) * v(m + 1);
    out(m) = norm * acc;
  }
  return out;
}

Vector to_complex(const ExtVector& v) { return v.cast<double>().cast<cplx>(); }

// Ladder states |0>_A .. |n_max>_A. Each application of A^dag pushes the
// edge error one level down, so the work is done on dim + n_max + 2 levels
// and cut back. Near kappa = 1 every step loses roughly a digit to
// cancellation, hence the extended precision.
std::vector<StateVector> ladder_states(const BogoliubovPair& pair, int n_max, const char* what) {
  const int dim = pair.space.dim();
  const int work = dim + n_max + 2;
  const long double kappa = pair.kappa;
  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  ExtVector v = vacuum_amplitudes(kappa, work);
  v /= v.head(dim).norm();
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) {
      v = apply_raise(kappa, v) / std::sqrt(static_cast<long double>(n));
      v /= v.head(dim).norm();
    }
    StateVector s = StateVector::normalized(to_complex(v.head(dim)));
    check_tail(s, what);
    out.push_back(std::move(s));
  }
  return out;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

BogoliubovPair build_bogoliubov(double kappa, const FockSpace& space) {
  require_kappa(kappa);
  Operator a = annihilation(space);
  Operator ad = a.adjoint();
  const double norm = 1.0 / std::sqrt(1.0 - kappa * kappa);
  Operator A = norm * (a + kappa * ad);
  Operator Ad = A.adjoint();
  return BogoliubovPair{kappa, space, std::move(A), std::move(Ad)};
}

double squeeze_parameter(double kappa) {
  require_kappa(kappa);
  return std::atanh(kappa);
}

StateVector generalized_vacuum(const BogoliubovPair& pair) {
  StateVector psi = StateVector::normalized(to_complex(vacuum_amplitudes(pair.kappa, pair.space.dim())));
  check_tail(psi, "generalized_vacuum");
  return psi;
}

StateVector generalized_number_state(const BogoliubovPair& pair, int n) {
  if (n < 0) throw IndexError("generalized_number_state: n must be non-negative");
  if (n >= pair.space.dim()) throw IndexError("generalized_number_state: n exceeds the truncation");
  generalized_vacuum(pair);  // tail check on the vacuum itself
  return ladder_states(pair, n, "generalized_number_state").back();
}

StateVector closed_form_number_state(double kappa, int n, const FockSpace& space) {
  require_kappa(kappa);
  if (n < 0) throw IndexError("closed_form_number_state: n must be non-negative");
  const int d = space.dim();
  if (n >= d) throw IndexError("closed_form_number_state: n exceeds the truncation");

  const bool odd = (n % 2) != 0;
  const int m = n / 2;
  const double log_kappa = kappa > 0.0 ? std::log(kappa) : -std::numeric_limits<double>::infinity();
  Vector v = Vector::Zero(d);

  // Fock level 2j (even) or 2j+1 (odd). Every surviving term carries
  // kappa^(j - m + 2l) with j - m + 2l >= 0, folded into the log magnitude.
  for (int j = 0; 2 * j + (odd ? 1 : 0) < d; ++j) {
    const double log_outer = odd ? 0.5 * (log_odd_df_above(j) - log_even_df(j))
                                 : 0.5 * (log_odd_df_below(j) - log_even_df(j));
    std::vector<double> logs;
    std::vector<int> signs;
    for (int l = 0; l <= m; ++l) {
      if (j + l - m < 0) continue;
      const int kpow = j - m + 2 * l;
      double log_k = 0.0;
      if (kpow > 0) {
        if (kappa == 0.0) continue;
        log_k = kpow * log_kappa;
      }
      double lt = log_binomial(m, l) + log_k + log_even_df(j) - log_even_df(j + l - m);
      lt += odd ? log_odd_df_above(j + l) - log_odd_df_above(j)
                : log_odd_df_below(j + l) - log_odd_df_below(j);
      logs.push_back(lt + log_outer);
      signs.push_back(((j - m + l) % 2 == 0) ? 1 : -1);
    }
    if (logs.empty()) continue;
    double peak = -std::numeric_limits<double>::infinity();
    for (double lt : logs) peak = std::max(peak, lt);
    double sum = 0.0;
    for (std::size_t t = 0; t < logs.size(); ++t) sum += signs[t] * std::exp(logs[t] - peak);
    v(2 * j + (odd ? 1 : 0)) = sum * std::exp(peak);
  }
  // The (1 - kappa^2)^{1/4 or 3/4} / sqrt(n!) prefactor is fixed by normalization.
  StateVector psi = StateVector::normalized(fix_phase(std::move(v)));
  check_tail(psi, "closed_form_number_state");
  return psi;
}

StateVector generalized_coherent(const BogoliubovPair& pair, cplx alpha) {
  StateVector vac = generalized_vacuum(pair);
  if (alpha == cplx(0.0)) return vac;
  Operator gen = alpha * pair.A_dagger - std::conj(alpha) * pair.A;
  Matrix d = matrix_exponential(gen.matrix());
  StateVector out = StateVector::normalized(d * vac.amplitudes());
  check_tail(out, "generalized_coherent");
  return out;
}

GeneralizedBasis build_generalized_basis(const BogoliubovPair& pair, int n_max) {
  if (n_max < 0) throw IndexError("build_generalized_basis: n_max must be non-negative");
  if (n_max >= pair.space.dim()) throw IndexError("build_generalized_basis: n_max exceeds the truncation");
  generalized_vacuum(pair);
  return GeneralizedBasis{pair.kappa, n_max, ladder_states(pair, n_max, "build_generalized_basis")};
}

Matrix gram_matrix(const GeneralizedBasis& basis) {
  const auto count = static_cast<Eigen::Index>(basis.states.size());
  Matrix g(count, count);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < count; ++j)
      g(i, j) = basis.states[static_cast<std::size_t>(i)].inner(basis.states[static_cast<std::size_t>(j)]);
  return g;
}

LadderResiduals ladder_residuals(const BogoliubovPair& pair, const GeneralizedBasis& basis) {
  LadderResiduals r{0.0, 0.0, 0.0};
  const Operator num = pair.A_dagger * pair.A;
  const auto& s = basis.states;
  for (int n = 0; n <= basis.n_max; ++n) {
    const Vector& v = s[static_cast<std::size_t>(n)].amplitudes();
    r.number = std::max(r.number, (num * v - static_cast<double>(n) * v).cwiseAbs().maxCoeff());
    Vector lowered = pair.A * v;
    Vector expected_low = n > 0 ? Vector(std::sqrt(static_cast<double>(n)) * s[static_cast<std::size_t>(n - 1)].amplitudes())
                                : Vector(Vector::Zero(v.size()));
    r.lowering = std::max(r.lowering, (lowered - expected_low).cwiseAbs().maxCoeff());
    if (n < basis.n_max) {
      Vector raised = pair.A_dagger * v;
      Vector expected_up = std::sqrt(n + 1.0) * s[static_cast<std::size_t>(n + 1)].amplitudes();
      r.raising = std::max(r.raising, (raised - expected_up).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

int recommended_dim(double kappa, double tail, int headroom) {
  require_kappa(kappa);
  // Even amplitudes of |0>_A fall off as kappa^j sqrt((2j-1)!!/(2j)!!).
  if (kappa == 0.0) return std::max(2, headroom + 2);
  double log_tail = std::log(tail);
  int j = 0;
  while (true) {
    double lp = 2.0 * (j * std::log(kappa)) + (log_odd_df_below(j) - log_even_df(j));
    if (lp < log_tail) break;
    ++j;
  }
  int dim = 2 * j + headroom;
  return dim + dim / 9 + 1;
}

}  // namespace svl
