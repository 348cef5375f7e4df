#pragma once

// Time evolution: pure states under (possibly periodic) Hamiltonians, density
// matrices under Lindblad generators, the sequential atom-injection loop, and
// steady-state detection.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "svlaser/algebra.hpp"
#include "svlaser/generator.hpp"
#include "svlaser/hilbert.hpp"
#include "svlaser/integrators.hpp"
#include "svlaser/models.hpp"

namespace svl {

class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::string label, std::string units) : label_(std::move(label)), units_(std::move(units)) {}

  // Times must increase strictly and values must be finite.
  void push(double t, double value);

  const std::string& label() const noexcept { return label_; }
  const std::string& units() const noexcept { return units_; }
  const std::vector<double>& times() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::size_t size() const noexcept { return t_.size(); }
  bool empty() const noexcept { return t_.empty(); }
  double back() const { return v_.back(); }

  // Copy with every time multiplied by `factor` (> 0).
  TimeSeries rescaled_time(double factor) const;

 private:
  std::string label_;
  std::string units_;
  std::vector<double> t_;
  std::vector<double> v_;
};

// An observer maps a state snapshot to a number, or to nothing when the
// quantity is undefined for that snapshot (the sample is then skipped).
struct Observer {
  std::string label;
  std::string units;
  std::function<std::optional<double>(const Matrix& rho)> fn;
};

struct PureObserver {
  std::string label;
  std::string units;
  std::function<std::optional<double>(const Vector& psi)> fn;
};

class HamiltonianSource {
 public:
  using Fill = std::function<void(double t, Matrix& out)>;

  static HamiltonianSource constant(Operator h);
  // H(t + period) = H(t). Propagated by fourth-order Magnus steps over one
  // period and then stroboscopically.
  static HamiltonianSource periodic(Fill h, int dim, double period);
  static HamiltonianSource time_dependent(Fill h, int dim);

  enum class Kind { constant, periodic, time_dependent };
  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double period() const noexcept { return period_; }
  void at(double t, Matrix& out) const;

 private:
  Kind kind_ = Kind::constant;
  int dim_ = 0;
  double period_ = 0.0;
  Matrix constant_;
  Fill fill_;
};

// Fourth-order Magnus propagator U(t1, t0) with steps of at most max_step,
// each exponentiated exactly.
Matrix magnus4_propagator(const HamiltonianSource& h, double t0, double t1, double max_step);

struct PureEvolutionStats {
  IntegratorStats integrator;
  double norm_drift = 0.0;
  double sample_dt = 0.0;   // actual output spacing
  long long periods = 0;    // periodic sources only
  int magnus_steps_per_period = 0;
};

struct PureEvolutionResult {
  std::vector<TimeSeries> series;
  StateVector final_state = StateVector::basis(1, 0);
  PureEvolutionStats stats;
};

// Samples observers at t = 0, dt, 2 dt, ... up to t_end. For periodic sources
// dt is rounded to a whole number of periods (at least one).
PureEvolutionResult evolve_pure(const HamiltonianSource& h, const StateVector& psi0, double t_end,
                                double sample_dt, const IntegratorConfig& cfg,
                                const std::vector<PureObserver>& observers);

struct MixedEvolutionStats {
  IntegratorStats integrator;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;  // largest defect removed by symmetrization
  double min_eigenvalue = 0.0;         // smallest eigenvalue seen at a sample
  double max_tail = 0.0;
};

struct MixedEvolutionResult {
  std::vector<TimeSeries> series;
  DensityMatrix final_state = DensityMatrix::unchecked(Matrix());
  MixedEvolutionStats stats;
};

// Tail population is recorded (and warned about) but not enforced here, since
// the state need not be a field state; callers decide whether a run fails.
MixedEvolutionResult evolve_lindblad(const Generator& rhs, const DensityMatrix& rho0, double t_end, double sample_dt,
                                     const IntegratorConfig& cfg, const std::vector<Observer>& observers);

struct InjectionSchedule {
  double atom_rate_k = 1.0;
  long long total_atoms = 0;
  StateVector atom_state = StateVector::basis(2, 1);
  // Record observers after every `sample_every` atoms.
  long long sample_every = 1;

  double interaction_time() const { return 1.0 / atom_rate_k; }
  void validate() const;
};

struct InjectionStats {
  long long atoms = 0;
  MixedEvolutionStats evolution;
  double mean_atom_excitation_left = 0.0;  // <sigma_ee> of the outgoing atoms, averaged
};

struct InjectionResult {
  std::vector<TimeSeries> series;
  DensityMatrix final_state = DensityMatrix::unchecked(Matrix());
  InjectionStats stats;
};

// Observers see the field state. Sample times are (atoms so far) / k. Throws
// TruncationError as soon as the field tail exceeds kTailLimit.
InjectionResult run_injection(const InjectionSchedule& schedule, const EffectiveParams& eff, double loss_C,
                              double gamma, const BogoliubovPair& pair, const DensityMatrix& rho_field0,
                              const std::vector<Observer>& observers, const IntegratorConfig& cfg);

struct SteadyState {
  bool reached = false;
  double t_steady = 0.0;
  // Spread max - min over the final window.
  double final_spread = 0.0;
  std::string diagnostic;
};

// First sample time t_i such that every window [t_j, t_j + window] with
// j >= i that fits inside the series has max - min <= eps.
SteadyState detect_steady_state(const TimeSeries& series, double window, double eps);

inline constexpr int kSuperoperatorDimLimit = 24;

// Null vector of the vectorized generator, reshaped into a density matrix.
// Throws AmbiguityError when the numerical null space is not one-dimensional.
DensityMatrix liouvillian_steady_state(const Generator& rhs, double null_tol = 1e-10);

}  // namespace svl
