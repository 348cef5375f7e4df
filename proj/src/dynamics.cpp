#include "svlaser/dynamics.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svlaser/errors.hpp"
#include "svlaser/log.hpp"

namespace svl {

namespace {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

// Above this 1-norm a Magnus step falls back to the dense eigensolver.
constexpr double kTaylorNormLimit = 0.5;

double one_norm(const SparseMatrix& m) {
  double worst = 0.0;
  for (int c = 0; c < m.outerSize(); ++c) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) sum += std::abs(it.value());
    worst = std::max(worst, sum);
  }
  return worst;
}

// u <- exp(-i k) u by Taylor series; k is sparse, so each term is one
// sparse-dense product. The term count comes from the bound |k|^j / j!.
void taylor_apply(const SparseMatrix& k, double norm, Matrix& u, Matrix& term, Matrix& next) {
  int terms = 1;
  for (double bound = norm; bound > 1e-17 && terms < 40; bound *= norm / (terms + 1)) ++terms;
  term = u;
  for (int j = 1; j <= terms; ++j) {
    next.noalias() = k * term;
    term = (-kI / static_cast<double>(j)) * next;
    u += term;
  }
}

// Fraction of a sample interval tolerated as rounding when placing the last sample.
constexpr double kGridSlack = 1e-9;

long long sample_count(double t_end, double dt) {
  return static_cast<long long>(std::floor(t_end / dt + kGridSlack));
}

void require_run_args(double t_end, double sample_dt) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and non-negative");
  if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw ConfigError("sample interval must be positive");
}

template <class Obs, class State>
void record(std::vector<TimeSeries>& series, const std::vector<Obs>& observers, double t, const State& s) {
  for (std::size_t i = 0; i < observers.size(); ++i) {
    if (auto v = observers[i].fn(s)) series[i].push(t, *v);
  }
}

template <class Obs>
std::vector<TimeSeries> make_series(const std::vector<Obs>& observers) {
  std::vector<TimeSeries> out;
  out.reserve(observers.size());
  for (const auto& o : observers) out.emplace_back(o.label, o.units);
  return out;
}

// Symmetrizes in place and returns the defect that was removed.
double symmetrize(Matrix& rho) {
  double defect = hermiticity_defect(rho);
  Matrix h = 0.5 * (rho + rho.adjoint());
  rho = std::move(h);
  return defect;
}

void check_snapshot(const Matrix& rho, MixedEvolutionStats& st, double t, bool field_tail) {
  st.max_trace_drift = std::max(st.max_trace_drift, std::abs(rho.trace().real() - 1.0));
  double lmin = min_eigenvalue_hermitian(rho);
  st.min_eigenvalue = std::min(st.min_eigenvalue, lmin);
  if (lmin < -1e-6) {
    std::ostringstream os;
    os << "density matrix lost positivity at t = " << t << " (minimum eigenvalue " << lmin
       << "); rerun with a smaller rel_tol or max_step";
    throw NumericalFailure(os.str());
  }
  if (field_tail) st.max_tail = std::max(st.max_tail, tail_population(rho));
}

}  // namespace

void TimeSeries::push(double t, double value) {
  if (!std::isfinite(t) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "TimeSeries '" << label_ << "': non-finite sample (" << t << ", " << value << ")";
    throw NumericDomainError(os.str());
  }
  if (!t_.empty() && !(t > t_.back())) {
    std::ostringstream os;
    os << "TimeSeries '" << label_ << "': time " << t << " does not follow " << t_.back();
    throw InvalidShapeError(os.str());
  }
  t_.push_back(t);
  v_.push_back(value);
}

TimeSeries TimeSeries::rescaled_time(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("time rescaling factor must be positive");
  TimeSeries out(label_, units_);
  out.t_.reserve(t_.size());
  for (double t : t_) out.t_.push_back(t * factor);
  out.v_ = v_;
  return out;
}

HamiltonianSource HamiltonianSource::constant(Operator h) {
  if (!h.is_hermitian(1e-10)) throw InvalidShapeError("constant Hamiltonian is not Hermitian");
  HamiltonianSource s;
  s.kind_ = Kind::constant;
  s.dim_ = h.dim();
  s.constant_ = h.matrix();
  return s;
}

HamiltonianSource HamiltonianSource::periodic(Fill h, int dim, double period) {
  if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("Hamiltonian period must be positive");
  if (dim < 1) throw InvalidSpaceError("Hamiltonian dim must be positive");
  HamiltonianSource s;
  s.kind_ = Kind::periodic;
  s.dim_ = dim;
  s.period_ = period;
  s.fill_ = std::move(h);
  return s;
}

HamiltonianSource HamiltonianSource::time_dependent(Fill h, int dim) {
  if (dim < 1) throw InvalidSpaceError("Hamiltonian dim must be positive");
  HamiltonianSource s;
  s.kind_ = Kind::time_dependent;
  s.dim_ = dim;
  s.fill_ = std::move(h);
  return s;
}

void HamiltonianSource::at(double t, Matrix& out) const {
  if (kind_ == Kind::constant) {
    out = constant_;
    return;
  }
  fill_(t, out);
}

Matrix magnus4_propagator(const HamiltonianSource& h, double t0, double t1, double max_step) {
  const int d = h.dim();
  if (!(t1 >= t0)) throw ConfigError("magnus4_propagator: t1 < t0");
  if (!(max_step > 0.0)) throw ConfigError("magnus4_propagator: max_step must be positive");
  const long long n = std::max(1LL, static_cast<long long>(std::ceil((t1 - t0) / max_step - kGridSlack)));
  const double step = (t1 - t0) / static_cast<double>(n);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double comm = std::sqrt(3.0) / 12.0 * step * step;

  Matrix u = Matrix::Identity(d, d);
  Matrix h1, h2, k, term, next;
  for (long long i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * step;
    h.at(t + c1 * step, h1);
    h.at(t + c2 * step, h2);
    // exp(Omega) with Omega = -i h (H1 + H2)/2 + (sqrt3/12) h^2 [H1, H2] = -i K.
    const SparseMatrix s1 = h1.sparseView(), s2 = h2.sparseView();
    SparseMatrix ks = (0.5 * step) * (s1 + s2);
    ks += (kI * comm) * SparseMatrix(s1 * s2 - s2 * s1);
    const double norm = one_norm(ks);
    if (norm <= kTaylorNormLimit) {
      taylor_apply(ks, norm, u, term, next);
    } else {
      k = Matrix(ks);
      u = unitary_propagator(k, 1.0) * u;
    }
  }
  // Rounding in the product accumulates; the propagator is applied tens of
  // thousands of times, so restore unitarity with the polar factor.
  Eigen::BDCSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

PureEvolutionResult evolve_pure(const HamiltonianSource& h, const StateVector& psi0, double t_end, double sample_dt,
                                const IntegratorConfig& cfg, const std::vector<PureObserver>& observers) {
  cfg.validate();
  require_run_args(t_end, sample_dt);
  if (psi0.dim() != h.dim()) throw InvalidShapeError("evolve_pure: state and Hamiltonian dims differ");

  PureEvolutionResult res;
  res.series = make_series(observers);
  Vector psi = psi0.amplitudes();
  auto note_norm = [&](const Vector& v) {
    res.stats.norm_drift = std::max(res.stats.norm_drift, std::abs(v.norm() - 1.0));
  };

  record(res.series, observers, 0.0, psi);
  switch (h.kind()) {
    case HamiltonianSource::Kind::constant: {
      Matrix hm;
      h.at(0.0, hm);
      const Matrix u = unitary_propagator(hm, sample_dt);
      res.stats.sample_dt = sample_dt;
      const long long n = sample_count(t_end, sample_dt);
      for (long long i = 1; i <= n; ++i) {
        psi = u * psi;
        note_norm(psi);
        record(res.series, observers, static_cast<double>(i) * sample_dt, psi);
      }
      break;
    }
    case HamiltonianSource::Kind::periodic: {
      const double period = h.period();
      const long long per_sample = std::max(1LL, std::llround(sample_dt / period));
      const double dt = static_cast<double>(per_sample) * period;
      double max_step = std::isfinite(cfg.max_step) ? cfg.max_step : period / 200.0;
      max_step = std::min(max_step, period);
      const Matrix u = magnus4_propagator(h, 0.0, period, max_step);
      res.stats.magnus_steps_per_period =
          static_cast<int>(std::max(1LL, static_cast<long long>(std::ceil(period / max_step - kGridSlack))));
      res.stats.sample_dt = dt;
      const long long n = sample_count(t_end, dt);
      Vector tmp;
      for (long long i = 1; i <= n; ++i) {
        for (long long j = 0; j < per_sample; ++j) {
          tmp.noalias() = u * psi;
          psi.swap(tmp);
        }
        res.stats.periods += per_sample;
        note_norm(psi);
        record(res.series, observers, static_cast<double>(i) * dt, psi);
      }
      break;
    }
    case HamiltonianSource::Kind::time_dependent: {
      res.stats.sample_dt = sample_dt;
      Matrix hm;
      auto rhs = [&](double t, const Vector& y, Vector& dy) {
        h.at(t, hm);
        dy.noalias() = -kI * (hm * y);
      };
      auto post = [](Vector&) {};
      double step = sample_dt;
      const long long n = sample_count(t_end, sample_dt);
      for (long long i = 1; i <= n; ++i) {
        integrate(rhs, post, static_cast<double>(i - 1) * sample_dt, static_cast<double>(i) * sample_dt, psi, step,
                  cfg, res.stats.integrator);
        note_norm(psi);
        record(res.series, observers, static_cast<double>(i) * sample_dt, psi);
      }
      break;
    }
  }
  if (res.stats.norm_drift > 1e-8) {
    std::ostringstream os;
    os << "evolve_pure: norm drift " << res.stats.norm_drift << " exceeds 1e-8";
    log_warning(os.str());
  }
  res.final_state = StateVector::normalized(psi);
  return res;
}

MixedEvolutionResult evolve_lindblad(const Generator& rhs, const DensityMatrix& rho0, double t_end, double sample_dt,
                                     const IntegratorConfig& cfg, const std::vector<Observer>& observers) {
  cfg.validate();
  require_run_args(t_end, sample_dt);
  if (rho0.dim() != rhs.dim()) throw InvalidShapeError("evolve_lindblad: state and generator dims differ");

  MixedEvolutionResult res;
  res.series = make_series(observers);
  Matrix rho = rho0.matrix();
  auto f = [&rhs](double, const Matrix& y, Matrix& dy) { rhs.apply(y, dy); };
  auto post = [&res](Matrix& y) {
    res.stats.max_hermiticity_drift = std::max(res.stats.max_hermiticity_drift, symmetrize(y));
  };

  check_snapshot(rho, res.stats, 0.0, true);
  record(res.series, observers, 0.0, rho);
  double step = sample_dt;
  const long long n = sample_count(t_end, sample_dt);
  for (long long i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) * sample_dt;
    integrate(f, post, static_cast<double>(i - 1) * sample_dt, t, rho, step, cfg, res.stats.integrator);
    check_snapshot(rho, res.stats, t, true);
    record(res.series, observers, t, rho);
  }
  if (res.stats.max_tail > kTailLimit) {
    std::ostringstream os;
    os << "evolve_lindblad: population in the top truncation levels reached " << res.stats.max_tail;
    log_warning(os.str());
  }
  if (res.stats.max_hermiticity_drift > 1e-12) {
    std::ostringstream os;
    os << "evolve_lindblad: symmetrization removed a Hermiticity defect of up to " << res.stats.max_hermiticity_drift;
    log_info(os.str());
  }
  res.final_state = DensityMatrix::unchecked(std::move(rho));
  return res;
}

void InjectionSchedule::validate() const {
  if (!(atom_rate_k > 0.0) || !std::isfinite(atom_rate_k)) throw UnphysicalParameterError("atom_rate_k must be > 0");
  if (total_atoms < 0) throw UnphysicalParameterError("total_atoms must be >= 0");
  if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
  if (atom_state.dim() != 2) throw InvalidSpaceError("atom_state must be a two-level state");
}

InjectionResult run_injection(const InjectionSchedule& schedule, const EffectiveParams& eff, double loss_C,
                              double gamma, const BogoliubovPair& pair, const DensityMatrix& rho_field0,
                              const std::vector<Observer>& observers, const IntegratorConfig& cfg) {
  schedule.validate();
  cfg.validate();
  const int n = pair.space.dim();
  if (rho_field0.dim() != n) throw InvalidShapeError("run_injection: field state and Bogoliubov pair dims differ");
  if (loss_C < 0.0 || gamma < 0.0) throw UnphysicalParameterError("loss and decay rates must be non-negative");

  InjectionResult res;
  res.series = make_series(observers);
  auto& st = res.stats.evolution;

  const AtomFieldGenerator gen(eff, loss_C, gamma, pair);
  const Vector& a = schedule.atom_state.amplitudes();
  const Matrix atom = a * a.adjoint();
  const double tau = schedule.interaction_time();
  const TensorDims dims{2, n};

  Matrix field = rho_field0.matrix();
  Matrix joint(2 * n, 2 * n);
  auto f = [&gen](double, const Matrix& y, Matrix& dy) { gen.apply(y, dy); };
  auto post = [&st](Matrix& y) { st.max_hermiticity_drift = std::max(st.max_hermiticity_drift, symmetrize(y)); };

  check_snapshot(field, st, 0.0, true);
  record(res.series, observers, 0.0, field);
  double step = tau;
  double excitation_left = 0.0;
  for (long long i = 1; i <= schedule.total_atoms; ++i) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) joint.block(r * n, c * n, n, n) = atom(r, c) * field;
    integrate(f, post, 0.0, tau, joint, step, cfg, st.integrator);
    excitation_left += joint.block(n, n, n, n).trace().real();
    field = partial_trace(joint, dims, Subsystem::atom);

    const double t = static_cast<double>(i) * tau;
    const double tail = tail_population(field);
    st.max_tail = std::max(st.max_tail, tail);
    st.max_trace_drift = std::max(st.max_trace_drift, std::abs(field.trace().real() - 1.0));
    if (tail > kTailLimit) {
      std::ostringstream os;
      os << "field population in the top truncation levels reached " << tail << " after atom " << i
         << "; increase the truncation dim";
      throw TruncationError(os.str());
    }
    if (i % schedule.sample_every == 0 || i == schedule.total_atoms) {
      check_snapshot(field, st, t, false);
      record(res.series, observers, t, field);
    }
  }
  if (st.max_trace_drift > 1e-7) {
    std::ostringstream os;
    os << "run_injection: field trace drifted by " << st.max_trace_drift;
    log_warning(os.str());
  }
  res.stats.atoms = schedule.total_atoms;
  res.stats.mean_atom_excitation_left =
      schedule.total_atoms > 0 ? excitation_left / static_cast<double>(schedule.total_atoms) : 0.0;
  res.final_state = DensityMatrix::unchecked(std::move(field));
  return res;
}

SteadyState detect_steady_state(const TimeSeries& series, double window, double eps) {
  if (!(window > 0.0)) throw ConfigError("steady-state window must be positive");
  if (!(eps >= 0.0)) throw ConfigError("steady-state eps must be non-negative");
  const auto& t = series.times();
  const auto& v = series.values();
  if (t.size() < 2 || t.back() - t.front() < 2.0 * window * (1.0 - kGridSlack)) {
    std::ostringstream os;
    os << "series '" << series.label() << "' spans less than two windows of " << window;
    throw InvalidShapeError(os.str());
  }

  const std::size_t n = t.size();
  const double t_end = t.back();
  const double slack = kGridSlack * std::max(1.0, std::abs(t_end));
  // Spread over [t_i, t_i + window] for every window that fits.
  std::vector<double> spread;
  for (std::size_t i = 0; i < n && t[i] + window <= t_end + slack; ++i) {
    double lo = v[i], hi = v[i];
    for (std::size_t j = i + 1; j < n && t[j] <= t[i] + window + slack; ++j) {
      lo = std::min(lo, v[j]);
      hi = std::max(hi, v[j]);
    }
    spread.push_back(hi - lo);
  }

  SteadyState out;
  out.final_spread = spread.back();
  std::size_t first = spread.size();
  while (first > 0 && spread[first - 1] <= eps) --first;
  std::ostringstream os;
  if (first == spread.size()) {
    out.reached = false;
    os << "'" << series.label() << "' never settles: spread over the last window is " << out.final_spread
       << " > eps = " << eps;
  } else {
    out.reached = true;
    out.t_steady = t[first];
    os << "'" << series.label() << "' settles at t = " << out.t_steady << " (final-window spread "
       << out.final_spread << ")";
  }
  out.diagnostic = os.str();
  return out;
}

DensityMatrix liouvillian_steady_state(const Generator& rhs, double null_tol) {
  const int d = rhs.dim();
  if (d > kSuperoperatorDimLimit) {
    std::ostringstream os;
    os << "liouvillian_steady_state: dim " << d << " exceeds the superoperator limit " << kSuperoperatorDimLimit;
    throw InvalidSpaceError(os.str());
  }
  const int d2 = d * d;
  Matrix super(d2, d2);
  Matrix basis = Matrix::Zero(d, d);
  Matrix image;
  // Column-major vectorization: vec(rho)[i + j d] = rho(i, j).
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      basis(i, j) = 1.0;
      rhs.apply(basis, image);
      basis(i, j) = 0.0;
      super.col(i + j * d) = Eigen::Map<const Vector>(image.data(), d2);
    }
  }

  Eigen::BDCSVD<Matrix> svd(super, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  int null_dim = 0;
  for (int k = 0; k < d2; ++k)
    if (s(k) <= null_tol * smax) ++null_dim;
  if (null_dim > 1) {
    std::ostringstream os;
    os << "generator has a " << null_dim << "-dimensional numerical null space";
    throw AmbiguityError(os.str(), null_dim);
  }
  if (null_dim == 0) {
    std::ostringstream os;
    os << "generator has no numerical null vector (smallest singular value ratio " << s(d2 - 1) / smax << ")";
    throw NumericalFailure(os.str());
  }
  Vector v = svd.matrixV().col(d2 - 1);
  Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
  rho /= rho.trace();
  symmetrize(rho);
  return DensityMatrix(std::move(rho));
}

}  // namespace svl
