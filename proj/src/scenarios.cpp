#include "svlaser/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "svlaser/algebra.hpp"
#include "svlaser/dynamics.hpp"
#include "svlaser/errors.hpp"
#include "svlaser/log.hpp"
#include "svlaser/models.hpp"
#include "svlaser/observables.hpp"

namespace svl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double lookup(const Quantities& q, const std::string& name, const char* what) {
  for (const auto& [k, v] : q)
    if (k == name) return v;
  throw IndexError(std::string("no ") + what + " named '" + name + "'");
}

void require_tail(double tail, const std::string& what) {
  if (tail > kTailLimit) {
    std::ostringstream os;
    os << what << ": population in the top truncation levels reached " << tail << "; increase field.dim";
    throw TruncationError(os.str());
  }
}

void require_hygiene(double trace_drift, double min_eig, const std::string& what) {
  if (trace_drift > 1e-7) {
    std::ostringstream os;
    os << what << ": trace drifted by " << trace_drift << "; tighten integrator tolerances";
    throw NumericalFailure(os.str());
  }
  if (min_eig < -1e-6) {
    std::ostringstream os;
    os << what << ": minimum eigenvalue " << min_eig << "; tighten integrator tolerances";
    throw NumericalFailure(os.str());
  }
}

// Column-aligns series that share sample times with `base`; entries missing
// from a series become NaN.
Table align(const std::string& name, const std::string& time_column, double time_factor,
            const std::vector<const TimeSeries*>& series) {
  Table t;
  t.name = name;
  t.columns.push_back(time_column);
  for (const auto* s : series) t.columns.push_back(s->label());
  const TimeSeries& base = *series.front();
  std::vector<std::size_t> cursor(series.size(), 0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double time = base.times()[i];
    std::vector<double> row{time * time_factor};
    for (std::size_t k = 0; k < series.size(); ++k) {
      const TimeSeries& s = *series[k];
      std::size_t& c = cursor[k];
      while (c < s.size() && s.times()[c] < time) ++c;
      row.push_back(c < s.size() && s.times()[c] == time ? s.values()[c] : kNaN);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

double max_abs_difference(const TimeSeries& a, const TimeSeries& b, double t_max) {
  double worst = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n && a.times()[i] <= t_max * (1.0 + 1e-12); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

// Mean over samples with t in [t0, t1].
double window_mean(const TimeSeries& s, double t0, double t1) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.times()[i] >= t0 && s.times()[i] <= t1) {
      sum += s.values()[i];
      ++count;
    }
  return count > 0 ? sum / count : kNaN;
}

void add_integrator_stats(Quantities& q, const std::string& prefix, const IntegratorStats& st) {
  q.emplace_back(prefix + "accepted_steps", static_cast<double>(st.accepted));
  q.emplace_back(prefix + "rejected_steps", static_cast<double>(st.rejected));
  q.emplace_back(prefix + "rhs_evaluations", static_cast<double>(st.rhs_evals));
  q.emplace_back(prefix + "smallest_step", st.accepted > 0 ? st.smallest_step : 0.0);
  q.emplace_back(prefix + "largest_step", st.largest_step);
}

StateVector field_vacuum(int dim) { return StateVector::basis(dim, 0); }

int atom_index(const std::string& level) { return level == "e" ? 1 : 0; }

std::string ratio_label(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

std::size_t Table::column_index(const std::string& c) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == c) return i;
  throw IndexError("table '" + name + "' has no column '" + c + "'");
}

std::vector<double> Table::column(const std::string& c) const {
  const std::size_t k = column_index(c);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

const Table& ScenarioResult::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw IndexError("no table named '" + name + "'");
}

double ScenarioResult::derived_value(const std::string& name) const { return lookup(derived, name, "derived quantity"); }
double ScenarioResult::numeric(const std::string& name) const { return lookup(numerics, name, "numerics entry"); }
double ScenarioResult::metric(const std::string& name) const { return lookup(metrics, name, "metric"); }

double axis_scale(const ScenarioConfig& config) {
  return config.text("units.time_axis") == "cycles" ? 2.0 * M_PI : 1.0;
}

IntegratorConfig integrator_from(const ScenarioConfig& c, double auto_max_step, double auto_fixed_step) {
  IntegratorConfig cfg;
  cfg.method = c.text("integrator.method") == "fixed" ? StepMethod::fixed : StepMethod::adaptive;
  cfg.rel_tol = c.real("integrator.rel_tol");
  cfg.abs_tol = c.real("integrator.abs_tol");
  cfg.min_step = c.real("integrator.min_step");
  cfg.max_step = c.is_auto("integrator.max_step") ? auto_max_step : c.real("integrator.max_step");
  cfg.fixed_step = c.is_auto("integrator.fixed_step") ? auto_fixed_step : c.real("integrator.fixed_step");
  cfg.validate();
  return cfg;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  const std::string& s = config.scenario();
  if (s == "validate-effective") return run_validate_effective(config);
  if (s == "run-laser") return run_laser(config);
  if (s == "compare-states") return run_compare_states(config);
  if (s == "reservoir-baseline") return run_reservoir_baseline(config);
  throw ConfigError("unknown scenario '" + s + "'");
}

// ---------------------------------------------------------------------------

ScenarioResult run_validate_effective(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult out;
  const LambdaSystemParams p = lambda_params_from(config);
  const EffectiveParams eff = EffectiveParams::from(p);
  const int dim = static_cast<int>(config.integer("field.dim"));
  const FockSpace field(dim);
  const double scale = axis_scale(config);
  // With no coupling there is no g; fall back to the frequency unit itself.
  const double g_axis = eff.g != 0.0 ? std::abs(eff.g) : 1.0;
  if (eff.g == 0.0) out.notes.push_back("effective coupling g = 0: time axis uses the frequency unit instead of g");
  const double to_internal = scale / g_axis;  // axis value -> time in 1/lambda
  const double t_end = config.real("run.t_end") * to_internal;
  const double t_max = config.real("metrics.t_max");

  LambdaHamiltonian lh(p, field);
  const auto period = lh.period();
  const double auto_step = p.delta_g1 != 0.0 ? 0.05 / std::abs(p.delta_g1) : 1e-3;
  const IntegratorConfig icfg = integrator_from(config, auto_step, auto_step);
  HamiltonianSource full_src = period ? HamiltonianSource::periodic([&lh](double t, Matrix& o) { lh.at(t, o); },
                                                                     lh.dim(), *period)
                                      : HamiltonianSource::time_dependent(
                                            [&lh](double t, Matrix& o) { lh.at(t, o); }, lh.dim());
  if (!period) out.notes.push_back("drive frequencies are not commensurate; full model integrated adaptively");

  const int level = atom_index(config.text("atom.initial"));
  auto field_observers = [](int levels, const std::string& tag) {
    std::vector<PureObserver> obs;
    obs.push_back({"n_" + tag, "photons", [levels](const Vector& psi) -> std::optional<double> {
                     return mean_photon_number(reduced_field(psi, levels));
                   }});
    obs.push_back({"varX1_" + tag, "", [levels](const Vector& psi) -> std::optional<double> {
                     return quadrature_variances(reduced_field(psi, levels)).x1;
                   }});
    obs.push_back({"varX2_" + tag, "", [levels](const Vector& psi) -> std::optional<double> {
                     return quadrature_variances(reduced_field(psi, levels)).x2;
                   }});
    obs.push_back({"see_" + tag, "", [levels](const Vector& psi) -> std::optional<double> {
                     return atom_population(psi, levels, 1);
                   }});
    obs.push_back({"tail_" + tag, "", [levels](const Vector& psi) -> std::optional<double> {
                     return tail_population(reduced_field(psi, levels));
                   }});
    return obs;
  };

  const StateVector psi_full = tensor(StateVector::basis(3, level), field_vacuum(dim));
  auto full = evolve_pure(full_src, psi_full, t_end, config.real("output.sample_dt") * to_internal, icfg,
                          field_observers(3, "full"));
  const double dt = full.stats.sample_dt;

  const BogoliubovPair pair = build_bogoliubov(eff.kappa, field);
  const Operator h_eff = effective_hamiltonian(eff, pair);
  const StateVector psi_eff = tensor(StateVector::basis(2, level), field_vacuum(dim));
  auto effective = evolve_pure(HamiltonianSource::constant(h_eff), psi_eff, t_end, dt, icfg, field_observers(2, "eff"));

  std::vector<const TimeSeries*> cols;
  for (int k = 0; k < 4; ++k) {
    cols.push_back(&full.series[k]);
    cols.push_back(&effective.series[k]);
  }
  PureEvolutionResult stark;
  const bool with_stark = config.flag("diagnostics.stark");
  if (with_stark) {
    const Operator h_stark = h_eff + cavity_stark_shift(p, field);
    stark = evolve_pure(HamiltonianSource::constant(h_stark), psi_eff, t_end, dt, icfg,
                        field_observers(2, "eff_stark"));
    for (int k = 0; k < 4; ++k) cols.push_back(&stark.series[k]);
  }
  Table table = align("validate_effective", "t_in_g_units", 1.0 / to_internal, cols);
  // Second time column in units of 1/lambda.
  table.columns.insert(table.columns.begin() + 1, "t_in_lambda_units");
  for (auto& row : table.rows) row.insert(row.begin() + 1, row[0] * to_internal);
  out.tables.push_back(std::move(table));

  const double t_max_internal = t_max * to_internal;
  const char* names[] = {"n", "varX1", "varX2", "see"};
  for (int k = 0; k < 4; ++k)
    out.metrics.emplace_back(std::string("max_abs_diff_") + names[k],
                             max_abs_difference(full.series[k], effective.series[k], t_max_internal));
  for (int k = 0; k < 4; ++k)
    out.metrics.emplace_back(std::string("max_abs_diff_") + names[k] + "_full_range",
                             max_abs_difference(full.series[k], effective.series[k], t_end));
  if (with_stark)
    for (int k = 0; k < 4; ++k)
      out.metrics.emplace_back(std::string("max_abs_diff_") + names[k] + "_stark_corrected",
                               max_abs_difference(full.series[k], stark.series[k], t_max_internal));
  out.metrics.emplace_back("metrics_t_max", t_max);

  const auto& tail_full = full.series[4].values();
  const auto& tail_eff = effective.series[4].values();
  const double max_tail = std::max(*std::max_element(tail_full.begin(), tail_full.end()),
                                   *std::max_element(tail_eff.begin(), tail_eff.end()));
  require_tail(max_tail, "validate-effective");

  out.derived = {{"g", eff.g},
                 {"kappa", eff.kappa},
                 {"r", squeeze_parameter(eff.kappa)},
                 {"axis_scale", scale},
                 {"drive_period", period ? *period : 0.0},
                 {"stark_shift_e", p.Delta_e != 0.0 ? p.lambda_e * p.lambda_e / p.Delta_e : 0.0},
                 {"stark_shift_g", p.Delta_g != 0.0 ? p.lambda_g * p.lambda_g / p.Delta_g : 0.0}};
  out.numerics = {{"max_tail", max_tail},
                  {"norm_drift_full", full.stats.norm_drift},
                  {"norm_drift_eff", effective.stats.norm_drift},
                  {"sample_dt_axis", dt / to_internal},
                  {"max_step", icfg.max_step},
                  {"magnus_steps_per_period", static_cast<double>(full.stats.magnus_steps_per_period)},
                  {"drive_periods", static_cast<double>(full.stats.periods)}};
  add_integrator_stats(out.numerics, "full_", full.stats.integrator);
  const auto& n_eff = effective.series[0].values();
  for (auto& w : p.regime_warnings(*std::max_element(n_eff.begin(), n_eff.end()))) out.notes.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------

ScenarioResult run_laser(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult out;
  const double scale = axis_scale(config);
  const double kappa = config.real("laser.kappa");
  const double C = config.real("laser.C");
  const double R = config.real("laser.R");
  const double gamma = config.real("laser.gamma");
  const double p = config.real("laser.p");
  const double k = config.is_auto("laser.k") ? R : config.real("laser.k");
  const LaserRateParams rates = LaserRateParams::derive(1.0, gamma, C, R / p, p);
  const int dim = static_cast<int>(config.integer("field.dim"));
  const BogoliubovPair pair = build_bogoliubov(kappa, FockSpace(dim));

  // Internal time is the axis value; every rate in units of g picks up the scale.
  const double k_int = k * scale;
  InjectionSchedule schedule;
  schedule.atom_rate_k = k_int > 0.0 ? k_int : 1.0;
  schedule.total_atoms = config.is_auto("run.atoms")
                             ? static_cast<long long>(std::llround(config.real("run.t_end") * k_int))
                             : config.integer("run.atoms");
  schedule.atom_state = StateVector::basis(2, atom_index(config.text("atom.initial")));
  schedule.sample_every =
      std::max(1LL, static_cast<long long>(std::llround(config.real("output.sample_dt") * schedule.atom_rate_k)));
  const double tau = schedule.interaction_time();
  const IntegratorConfig icfg = integrator_from(config, std::numeric_limits<double>::infinity(), tau / 16.0);

  const DensityMatrix rho0 = config.text("field.initial") == "vacuum"
                                 ? DensityMatrix::basis(dim, 0)
                                 : DensityMatrix::from_pure(generalized_vacuum(pair));
  const SqueezedVacuumProbe probe(dim, config.real("fidelity.r"));
  const auto pairs = config.index_pairs("coherence.pairs");

  std::vector<Observer> obs;
  obs.push_back({"n", "photons", [](const Matrix& r) -> std::optional<double> { return mean_photon_number(r); }});
  obs.push_back({"varX1", "", [](const Matrix& r) -> std::optional<double> { return quadrature_variances(r).x1; }});
  obs.push_back({"varX2", "", [](const Matrix& r) -> std::optional<double> { return quadrature_variances(r).x2; }});
  obs.push_back({"mandel_q", "", [](const Matrix& r) -> std::optional<double> {
                   if (mean_photon_number(r) < 1e-6) return std::nullopt;
                   return mandel_q(r);
                 }});
  obs.push_back({"fidelity_sv", "", [&probe](const Matrix& r) -> std::optional<double> { return probe.fidelity(r); }});
  for (auto [i, j] : pairs) {
    obs.push_back({"abs_rho_" + std::to_string(i) + "_" + std::to_string(j), "",
                   [i = i, j = j](const Matrix& r) -> std::optional<double> { return std::abs(r(i, j)); }});
  }

  const EffectiveParams eff{scale, kappa};
  InjectionResult run = run_injection(schedule, eff, C * scale, gamma * scale, pair, rho0, obs, icfg);
  const auto& st = run.stats.evolution;
  require_tail(st.max_tail, "run-laser");
  require_hygiene(st.max_trace_drift, st.min_eigenvalue, "run-laser");

  std::vector<const TimeSeries*> cols;
  for (const auto& s : run.series) cols.push_back(&s);
  out.tables.push_back(align("laser", "t_in_g_units", 1.0, cols));

  const Matrix& final_rho = run.final_state.matrix();
  Table pn{"photon_distribution", {"n", "P_n"}, {}};
  const RealVector pdist = photon_distribution(final_rho);
  for (int n = 0; n < dim; ++n) pn.rows.push_back({static_cast<double>(n), pdist(n)});
  out.tables.push_back(std::move(pn));

  WignerSpec ws{config.real("wigner.x_min"), config.real("wigner.x_max"), config.real("wigner.p_min"),
                config.real("wigner.p_max"), static_cast<int>(config.integer("wigner.resolution"))};
  const WignerGrid w = wigner(final_rho, ws);
  Table wt{"wigner", {"x", "p", "W"}, {}};
  for (int i = 0; i < ws.resolution; ++i)
    for (int j = 0; j < ws.resolution; ++j) wt.rows.push_back({w.x(i), w.p(j), w.values(i, j)});
  out.tables.push_back(std::move(wt));

  const double t_end = schedule.total_atoms * tau;
  const double window = config.real("steady.window");
  const TimeSeries& n_series = run.series[0];
  if (t_end - n_series.times().front() >= 2.0 * window) {
    SteadyState ss = detect_steady_state(n_series, window, config.real("steady.eps"));
    out.metrics.emplace_back("steady_reached", ss.reached ? 1.0 : 0.0);
    out.metrics.emplace_back("t_steady", ss.reached ? ss.t_steady : kNaN);
    out.metrics.emplace_back("steady_final_spread", ss.final_spread);
    out.notes.push_back(ss.diagnostic);
  } else {
    out.notes.push_back("run shorter than two steady-state windows; no steady-state detection");
  }
  for (const auto& s : run.series) {
    out.metrics.emplace_back(s.label() + "_final", s.empty() ? kNaN : s.back());
    out.metrics.emplace_back(s.label() + "_last_window_mean", s.empty() ? kNaN : window_mean(s, t_end - window, t_end));
  }
  out.metrics.emplace_back("fidelity_sv_initial", probe.fidelity(rho0.matrix()));
  out.metrics.emplace_back("wigner_integral", w.integral());

  out.derived = {{"g", 1.0},
                 {"kappa", kappa},
                 {"r", squeeze_parameter(kappa)},
                 {"axis_scale", scale},
                 {"gain_A", rates.gain_A},
                 {"saturation_B", rates.saturation_B},
                 {"loss_C", C},
                 {"pump_R", rates.pump_R},
                 {"injection_K", rates.injection_K},
                 {"excite_p", p},
                 {"atom_rate_k", k},
                 {"atoms_per_axis_unit", k_int},
                 {"atom_count", static_cast<double>(schedule.total_atoms)},
                 {"interaction_time_axis", tau},
                 {"interaction_time_g_units", tau * scale},
                 {"squeezed_vacuum_n", std::pow(std::sinh(squeeze_parameter(kappa)), 2)},
                 {"squeezed_vacuum_Q", (1.0 + kappa * kappa) / (1.0 - kappa * kappa)},
                 {"fidelity_r", config.real("fidelity.r")}};
  out.numerics = {{"atoms", static_cast<double>(run.stats.atoms)},
                  {"max_tail", st.max_tail},
                  {"max_trace_drift", st.max_trace_drift},
                  {"min_eigenvalue", st.min_eigenvalue},
                  {"max_hermiticity_drift", st.max_hermiticity_drift},
                  {"mean_atom_excitation_left", run.stats.mean_atom_excitation_left},
                  {"fixed_step", icfg.method == StepMethod::fixed ? icfg.fixed_step : 0.0},
                  {"atoms_per_sample", static_cast<double>(schedule.sample_every)}};
  add_integrator_stats(out.numerics, "", st.integrator);
  return out;
}

// ---------------------------------------------------------------------------

ScenarioResult run_compare_states(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult out;
  const double kappa = config.real("states.kappa");
  const cplx alpha(config.real("states.alpha_re"), config.real("states.alpha_im"));
  const int dim = static_cast<int>(config.integer("field.dim"));
  const BogoliubovPair pair = build_bogoliubov(kappa, FockSpace(dim));
  const double r = squeeze_parameter(kappa);

  const Vector coh = generalized_coherent(pair, alpha).amplitudes();
  const Vector sv = squeeze(FockSpace(dim), cplx(r, 0.0)).matrix().col(0);
  const Matrix rho_coh = coh * coh.adjoint();
  const Matrix rho_sv = sv * sv.adjoint();
  const double max_tail = std::max(tail_population(rho_coh), tail_population(rho_sv));
  require_tail(max_tail, "compare-states");

  const RealVector p_coh = photon_distribution(rho_coh);
  const RealVector p_sv = photon_distribution(rho_sv);
  Table pn{"photon_distribution", {"n", "P_coherent_A", "P_squeezed_vacuum"}, {}};
  for (int n = 0; n < dim; ++n) pn.rows.push_back({static_cast<double>(n), p_coh(n), p_sv(n)});
  out.tables.push_back(std::move(pn));

  WignerSpec ws{config.real("wigner.x_min"), config.real("wigner.x_max"), config.real("wigner.p_min"),
                config.real("wigner.p_max"), static_cast<int>(config.integer("wigner.resolution"))};
  auto emit = [&](const Matrix& rho, const std::string& name) {
    const WignerGrid w = wigner(rho, ws);
    Table t{name, {"x", "p", "W"}, {}};
    for (int i = 0; i < ws.resolution; ++i)
      for (int j = 0; j < ws.resolution; ++j) t.rows.push_back({w.x(i), w.p(j), w.values(i, j)});
    out.tables.push_back(std::move(t));
    return w;
  };
  const WignerGrid w_coh = emit(rho_coh, "wigner_coherent_A");
  const WignerGrid w_sv = emit(rho_sv, "wigner_squeezed_vacuum");

  auto odd = [](const RealVector& p) {
    double s = 0.0;
    for (int n = 1; n < p.size(); n += 2) s += p(n);
    return s;
  };
  const auto v_coh = quadrature_variances(rho_coh);
  const auto v_sv = quadrature_variances(rho_sv);
  out.metrics = {{"fidelity", std::norm(sv.dot(coh))},
                 {"odd_population_coherent_A", odd(p_coh)},
                 {"odd_population_squeezed_vacuum", odd(p_sv)},
                 {"n_coherent_A", mean_photon_number(rho_coh)},
                 {"n_squeezed_vacuum", mean_photon_number(rho_sv)},
                 {"varX1_coherent_A", v_coh.x1},
                 {"varX2_coherent_A", v_coh.x2},
                 {"varX1_squeezed_vacuum", v_sv.x1},
                 {"varX2_squeezed_vacuum", v_sv.x2},
                 {"wigner_integral_coherent_A", w_coh.integral()},
                 {"wigner_integral_squeezed_vacuum", w_sv.integral()}};
  out.derived = {{"kappa", kappa}, {"r", r}, {"alpha_re", alpha.real()}, {"alpha_im", alpha.imag()}};
  out.numerics = {{"max_tail", max_tail}};
  return out;
}

// ---------------------------------------------------------------------------

ScenarioResult run_reservoir_baseline(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult out;
  const double kappa = config.real("reservoir.kappa");
  const double Gamma = config.real("reservoir.Gamma");
  const auto ratios = config.reals("reservoir.ratios");
  const int dim = static_cast<int>(config.integer("field.dim"));
  const BogoliubovPair pair = build_bogoliubov(kappa, FockSpace(dim));
  const Vector dark = generalized_vacuum(pair).amplitudes();
  const bool liouvillian = config.text("reservoir.method") == "liouvillian";
  const double t_end = config.real("run.t_end");
  const double sample_dt = config.real("output.sample_dt");
  const IntegratorConfig icfg = integrator_from(config, std::numeric_limits<double>::infinity(), 1e-3);

  Table sweep{"reservoir_sweep", {"ratio", "fidelity", "one_minus_fidelity"}, {}};
  std::vector<TimeSeries> relax;
  double max_tail = 0.0, max_drift = 0.0, min_eig = 0.0, last_change = 0.0;
  IntegratorStats total;
  std::vector<double> fids;
  for (double ratio : ratios) {
    const auto gen = engineered_reservoir_generator({Gamma, ratio * Gamma}, pair);
    Matrix rho;
    if (liouvillian) {
      rho = liouvillian_steady_state(gen).matrix();
      max_tail = std::max(max_tail, tail_population(rho));
      min_eig = std::min(min_eig, min_eigenvalue_hermitian(rho));
    } else {
      std::vector<Observer> obs{{"fidelity_ratio_" + ratio_label(ratio), "",
                                 [&dark](const Matrix& r) -> std::optional<double> {
                                   return dark.dot(r * dark).real();
                                 }}};
      auto res = evolve_lindblad(gen, DensityMatrix::basis(dim, 0), t_end, sample_dt, icfg, obs);
      rho = res.final_state.matrix();
      max_tail = std::max(max_tail, res.stats.max_tail);
      max_drift = std::max(max_drift, res.stats.max_trace_drift);
      min_eig = std::min(min_eig, res.stats.min_eigenvalue);
      total.merge(res.stats.integrator);
      const auto& v = res.series[0].values();
      if (v.size() >= 2) last_change = std::max(last_change, std::abs(v.back() - v[v.size() - 2]));
      relax.push_back(std::move(res.series[0]));
    }
    const double f = dark.dot(rho * dark).real();
    fids.push_back(f);
    sweep.rows.push_back({ratio, f, 1.0 - f});
    out.metrics.emplace_back("fidelity_ratio_" + ratio_label(ratio), f);
  }
  require_tail(max_tail, "reservoir-baseline");
  require_hygiene(max_drift, min_eig, "reservoir-baseline");
  out.tables.push_back(std::move(sweep));
  if (!relax.empty()) {
    std::vector<const TimeSeries*> cols;
    for (const auto& s : relax) cols.push_back(&s);
    out.tables.push_back(align("reservoir_relaxation", "t_in_gamma_units", Gamma, cols));
  }

  bool decreasing = true;
  for (std::size_t i = 1; i < fids.size(); ++i) decreasing = decreasing && fids[i] < fids[i - 1];
  out.metrics.emplace_back("strictly_decreasing", decreasing ? 1.0 : 0.0);
  for (std::size_t i = 0; i < ratios.size(); ++i)
    if (ratios[i] > 0.0) out.metrics.emplace_back("infidelity_per_ratio_" + ratio_label(ratios[i]), (1.0 - fids[i]) / ratios[i]);

  out.derived = {{"kappa", kappa}, {"r", squeeze_parameter(kappa)}, {"Gamma", Gamma}};
  out.numerics = {{"max_tail", max_tail},
                  {"max_trace_drift", max_drift},
                  {"min_eigenvalue", min_eig},
                  {"final_sample_change", last_change}};
  if (!liouvillian) add_integrator_stats(out.numerics, "", total);
  return out;
}

}  // namespace svl
