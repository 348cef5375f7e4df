#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "svlaser/dynamics.hpp"
#include "svlaser/errors.hpp"

using namespace svl;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double state_fidelity(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix sq = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  Matrix m = sq * sigma * sq;
  Eigen::SelfAdjointEigenSolver<Matrix> es2(0.5 * (m + m.adjoint()));
  double s = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return s * s;
}

PureObserver pure_expectation(const std::string& label, const Matrix& op) {
  return {label, "", [op](const Vector& psi) -> std::optional<double> { return psi.dot(op * psi).real(); }};
}

Observer mixed_expectation(const std::string& label, const Matrix& op) {
  return {label, "", [op](const Matrix& rho) -> std::optional<double> { return (rho * op).trace().real(); }};
}

// Driven two-level system (w/2) sz + W cos(nu t) sx.
HamiltonianSource driven_qubit(double w, double W, double nu) {
  return HamiltonianSource::periodic(
      [=](double t, Matrix& out) {
        out = Matrix::Zero(2, 2);
        out(0, 0) = 0.5 * w;
        out(1, 1) = -0.5 * w;
        out(0, 1) = out(1, 0) = W * std::cos(nu * t);
      },
      2, 2.0 * M_PI / nu);
}

}  // namespace

TEST_CASE("time series invariants") {
  TimeSeries s("n", "photons");
  s.push(0.0, 1.0);
  s.push(0.5, 2.0);
  CHECK_THROWS_AS(s.push(0.5, 3.0), InvalidShapeError);
  CHECK_THROWS_AS(s.push(0.2, 3.0), InvalidShapeError);
  CHECK_THROWS_AS(s.push(1.0, std::nan("")), NumericDomainError);
  CHECK_THROWS_AS(s.push(std::numeric_limits<double>::infinity(), 1.0), NumericDomainError);
  CHECK(s.size() == 2);
  TimeSeries r = s.rescaled_time(2.0);
  CHECK(r.times()[1] == doctest::Approx(1.0));
  CHECK(r.values()[1] == 2.0);
  CHECK(r.label() == "n");
}

TEST_CASE("integrator configuration") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = IntegratorConfig{};
  cfg.min_step = 1.0;
  cfg.max_step = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  IntegratorConfig h = IntegratorConfig{}.halved();
  CHECK(h.rel_tol == doctest::Approx(0.5e-8));
}

TEST_CASE("pure evolution") {
  const double g = 0.7;
  BogoliubovPair pair = build_bogoliubov(0.0, FockSpace(4));
  Operator h = effective_hamiltonian({g, 0.0}, pair);
  StateVector psi0 = tensor(StateVector::basis(2, 1), StateVector::basis(4, 0));
  Matrix see = tensor(atomic_projector(2, 1, 1), Operator::identity(4)).matrix();
  std::vector<PureObserver> obs{pure_expectation("see", see)};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;

  SUBCASE("H = 0 leaves the state unchanged") {
    auto res = evolve_pure(HamiltonianSource::constant(Operator::zero(8)), psi0, 3.0, 0.5, cfg, obs);
    CHECK(res.series[0].size() == 7);
    for (double v : res.series[0].values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    CHECK((res.final_state.amplitudes() - psi0.amplitudes()).norm() < 1e-15);
  }

  SUBCASE("resonant Rabi oscillation, every source kind") {
    Matrix hm = h.matrix();
    std::vector<HamiltonianSource> sources{
        HamiltonianSource::constant(h),
        HamiltonianSource::time_dependent([hm](double, Matrix& out) { out = hm; }, 8),
        HamiltonianSource::periodic([hm](double, Matrix& out) { out = hm; }, 8, 0.05),
    };
    for (const auto& src : sources) {
      auto res = evolve_pure(src, psi0, 6.0, 0.25, cfg, obs);
      const auto& ts = res.series[0].times();
      const auto& vs = res.series[0].values();
      REQUIRE(ts.size() == 25);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        double c = std::cos(g * ts[i]);
        CHECK(std::abs(vs[i] - c * c) < 1e-8);
      }
      CHECK(res.stats.norm_drift < 1e-8);
    }
  }

  SUBCASE("forward then backward returns the initial state") {
    Operator hm = effective_hamiltonian({g, 0.6}, build_bogoliubov(0.6, FockSpace(30)));
    StateVector p0 = tensor(StateVector::basis(2, 1), StateVector::basis(30, 0));
    auto fwd = evolve_pure(HamiltonianSource::constant(hm), p0, 5.0, 0.1, cfg, {});
    auto back = evolve_pure(HamiltonianSource::constant(cplx(-1.0) * hm), fwd.final_state, 5.0, 0.1, cfg, {});
    CHECK((back.final_state.amplitudes() - p0.amplitudes()).norm() < 1e-7);

    Matrix m = hm.matrix();
    auto fwd2 = evolve_pure(HamiltonianSource::time_dependent([m](double, Matrix& o) { o = m; }, 60), p0, 5.0, 0.5,
                            cfg, {});
    auto back2 = evolve_pure(HamiltonianSource::time_dependent([m](double, Matrix& o) { o = -m; }, 60),
                             fwd2.final_state, 5.0, 0.5, cfg, {});
    CHECK((back2.final_state.amplitudes() - p0.amplitudes()).norm() < 1e-7);
  }

  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(evolve_pure(HamiltonianSource::constant(h), StateVector::basis(4, 0), 1.0, 0.1, cfg, {}),
                    InvalidShapeError);
  }
}

TEST_CASE("Magnus propagator is fourth order") {
  HamiltonianSource src = driven_qubit(1.3, 0.9, 2.0);
  const double period = src.period();
  // Reference from tightly converged adaptive integration of both columns.
  Matrix ref(2, 2);
  IntegratorConfig tight;
  tight.rel_tol = 1e-13;
  tight.abs_tol = 1e-15;
  HamiltonianSource td = HamiltonianSource::time_dependent([&src](double t, Matrix& o) { src.at(t, o); }, 2);
  for (int c = 0; c < 2; ++c) {
    auto r = evolve_pure(td, StateVector::basis(2, c), period, period, tight, {});
    ref.col(c) = r.final_state.amplitudes();
  }
  double e1 = max_abs(magnus4_propagator(src, 0.0, period, period / 8) - ref);
  double e2 = max_abs(magnus4_propagator(src, 0.0, period, period / 16) - ref);
  double e3 = max_abs(magnus4_propagator(src, 0.0, period, period / 32) - ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e3 > 12.0);
  CHECK(e2 / e3 < 20.0);
  Matrix u = magnus4_propagator(src, 0.0, period, period / 32);
  CHECK(max_abs(u.adjoint() * u - Matrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("stroboscopic Floquet evolution matches adaptive integration of the full model") {
  LambdaSystemParams p = LambdaSystemParams::from_design(1.0, 2.0, 10.0, 6.0);
  FockSpace field(5);
  LambdaHamiltonian lh(p, field);
  const double period = *lh.period();
  auto fill = [&lh](double t, Matrix& out) { lh.at(t, out); };
  StateVector psi0 = tensor(StateVector::basis(3, 1), StateVector::basis(5, 0));
  Matrix n_op = tensor(Operator::identity(3), number(field)).matrix();
  std::vector<PureObserver> obs{pure_expectation("n", n_op)};

  IntegratorConfig cfg;
  // Magnus error at 0.05 / delta_g1 is ~1e-8 per period here; quarter it.
  cfg.max_step = 0.0125 / p.delta_g1;
  auto strob = evolve_pure(HamiltonianSource::periodic(fill, lh.dim(), period), psi0, 10 * period, 2 * period, cfg,
                           obs);
  IntegratorConfig tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  tight.max_step = 0.05;
  auto adapt = evolve_pure(HamiltonianSource::time_dependent(fill, lh.dim()), psi0, 10 * period, 2 * period, tight,
                           obs);
  REQUIRE(strob.series[0].size() == 6);
  REQUIRE(adapt.series[0].size() == 6);
  CHECK(strob.stats.sample_dt == doctest::Approx(2 * period));
  CHECK(strob.stats.periods == 10);
  CHECK(std::abs(strob.final_state.inner(adapt.final_state)) > 1.0 - 1e-9);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(std::abs(strob.series[0].values()[i] - adapt.series[0].values()[i]) < 1e-8);
  CHECK(strob.stats.norm_drift < 1e-10);

  SUBCASE("sample interval rounds to whole periods") {
    auto r = evolve_pure(HamiltonianSource::periodic(fill, lh.dim(), period), psi0, 3 * period, 0.3 * period, cfg,
                         obs);
    CHECK(r.stats.sample_dt == doctest::Approx(period));
    CHECK(r.series[0].size() == 4);
  }
}

TEST_CASE("Lindblad evolution") {
  FockSpace space(6);
  const Operator a = annihilation(space);
  const Matrix n_op = number(space).matrix();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;

  SUBCASE("photon loss from |1> decays as exp(-C t)") {
    const double C = 0.8;
    LindbladGenerator gen(Operator::zero(6), {{C, a}});
    auto res = evolve_lindblad(gen, DensityMatrix::basis(6, 1), 4.0, 0.25, cfg, {mixed_expectation("n", n_op)});
    const auto& ts = res.series[0].times();
    for (std::size_t i = 0; i < ts.size(); ++i)
      CHECK(std::abs(res.series[0].values()[i] - std::exp(-C * ts[i])) < 1e-8);
    CHECK(res.stats.max_trace_drift < 1e-8);
    CHECK(res.stats.min_eigenvalue > -1e-12);

    IntegratorConfig fixed = cfg;
    fixed.method = StepMethod::fixed;
    fixed.fixed_step = 0.01;
    auto rk = evolve_lindblad(gen, DensityMatrix::basis(6, 1), 4.0, 0.25, fixed, {mixed_expectation("n", n_op)});
    CHECK(std::abs(rk.series[0].back() - std::exp(-C * 4.0)) < 1e-8);
    CHECK(rk.stats.integrator.largest_step == doctest::Approx(0.01).epsilon(1e-12));
  }

  SUBCASE("zero generator keeps the state") {
    LindbladGenerator gen(Operator::zero(6), {});
    Matrix m = Matrix::Zero(6, 6);
    m(0, 0) = 0.5;
    m(2, 2) = 0.3;
    m(5, 5) = 0.2;
    m(0, 2) = m(2, 0) = 0.1;
    auto res = evolve_lindblad(gen, DensityMatrix(m), 2.0, 0.5, cfg, {});
    CHECK(max_abs(res.final_state.matrix() - m) < 1e-15);
  }

  SUBCASE("engineered reservoir relaxes a mixed state into the generalized vacuum") {
    BogoliubovPair pair = build_bogoliubov(0.6, FockSpace(40));
    Matrix rho0 = Matrix::Zero(40, 40);
    double z = 0.0;
    for (int k = 0; k < 6; ++k) z += std::pow(0.4, k);
    for (int k = 0; k < 6; ++k) rho0(k, k) = std::pow(0.4, k) / z;
    auto gen = engineered_reservoir_generator({1.0, 0.0}, pair);
    auto res = evolve_lindblad(gen, DensityMatrix(rho0), 40.0, 5.0, cfg, {});
    const Vector v = generalized_vacuum(pair).amplitudes();
    double f = v.dot(res.final_state.matrix() * v).real();
    CHECK(f >= 1.0 - 1e-6);
  }

  SUBCASE("halving tolerances changes observables by less than the tolerance scale") {
    LindbladGenerator gen(Operator(0.3 * (a.matrix() + a.adjoint().matrix())), {{0.5, a}});
    auto r1 = evolve_lindblad(gen, DensityMatrix::basis(6, 0), 3.0, 0.5, cfg, {mixed_expectation("n", n_op)});
    auto r2 = evolve_lindblad(gen, DensityMatrix::basis(6, 0), 3.0, 0.5, cfg.halved(), {mixed_expectation("n", n_op)});
    for (std::size_t i = 0; i < r1.series[0].size(); ++i)
      CHECK(std::abs(r1.series[0].values()[i] - r2.series[0].values()[i]) < 1e-8);
  }

  SUBCASE("step-size underflow is a stiffness error") {
    LindbladGenerator gen(Operator::zero(6), {{1e7, a}});
    IntegratorConfig c = cfg;
    c.min_step = 1e-3;
    c.max_step = 1.0;
    CHECK_THROWS_AS(evolve_lindblad(gen, DensityMatrix::basis(6, 3), 1.0, 1.0, c, {}), StiffnessError);
  }

  SUBCASE("population pushed into the truncation tail is reported") {
    LindbladGenerator gen(Operator::zero(6), {{1.0, a.adjoint()}});
    auto res = evolve_lindblad(gen, DensityMatrix::basis(6, 0), 5.0, 0.5, cfg, {});
    CHECK(res.stats.max_tail > kTailLimit);
  }
}

TEST_CASE("atom injection") {
  const int n = 16;
  BogoliubovPair pair = build_bogoliubov(0.3, FockSpace(n));
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;

  SUBCASE("zero atoms return the initial field") {
    InjectionSchedule s;
    s.atom_rate_k = 10.0;
    s.total_atoms = 0;
    DensityMatrix rho0 = DensityMatrix::basis(n, 2);
    auto res = run_injection(s, {1.0, 0.3}, 0.5, 0.5, pair, rho0, {mixed_expectation("n", number(pair.space).matrix())},
                             cfg);
    CHECK(max_abs(res.final_state.matrix() - rho0.matrix()) == 0.0);
    CHECK(res.series[0].size() == 1);
    CHECK(res.stats.atoms == 0);
  }

  SUBCASE("one atom without dissipation equals unitary evolution then trace") {
    const EffectiveParams eff{1.3, 0.3};
    InjectionSchedule s;
    s.atom_rate_k = 2.0;
    s.total_atoms = 1;
    DensityMatrix rho0 = DensityMatrix::from_pure(generalized_vacuum(pair));
    auto res = run_injection(s, eff, 0.0, 0.0, pair, rho0, {}, cfg);

    Matrix h = effective_hamiltonian(eff, pair).matrix();
    Matrix u = unitary_propagator(h, 0.5);
    Matrix joint = tensor(DensityMatrix::basis(2, 1).matrix(), rho0.matrix());
    Matrix expected = partial_trace(Matrix(u * joint * u.adjoint()), {2, n}, Subsystem::atom);
    CHECK(max_abs(res.final_state.matrix() - expected) < 1e-9);
    // |e>|0>_A -> cos(g tau)|e>|0>_A - i sin(g tau)|g>|1>_A, so cos^2 is left in the atom.
    CHECK(res.stats.mean_atom_excitation_left == doctest::Approx(std::pow(std::cos(1.3 * 0.5), 2)).epsilon(1e-6));
  }

  SUBCASE("sampling grid and bookkeeping") {
    InjectionSchedule s;
    s.atom_rate_k = 20.0;
    s.total_atoms = 25;
    s.sample_every = 10;
    auto res = run_injection(s, {1.0, 0.3}, 0.4, 0.5, pair, DensityMatrix::from_pure(generalized_vacuum(pair)),
                             {mixed_expectation("n", number(pair.space).matrix())}, cfg);
    const auto& ts = res.series[0].times();
    REQUIRE(ts.size() == 4);
    CHECK(ts[1] == doctest::Approx(0.5));
    CHECK(ts[2] == doctest::Approx(1.0));
    CHECK(ts[3] == doctest::Approx(1.25));
    CHECK(res.stats.evolution.max_trace_drift < 1e-7);
    CHECK(res.stats.evolution.min_eigenvalue > -1e-10);
    CHECK(res.stats.atoms == 25);
  }

  SUBCASE("invalid schedule") {
    InjectionSchedule s;
    s.atom_rate_k = 0.0;
    CHECK_THROWS_AS(s.validate(), UnphysicalParameterError);
    s.atom_rate_k = 3.0;
    CHECK(s.interaction_time() * s.atom_rate_k == 1.0);
    s.atom_state = StateVector::basis(3, 1);
    CHECK_THROWS_AS(s.validate(), InvalidSpaceError);
  }
}

TEST_CASE("steady-state detection") {
  SUBCASE("constant series settles at the first sample") {
    TimeSeries s("c", "");
    for (int i = 0; i <= 40; ++i) s.push(0.1 * i + 0.3, 2.0);
    SteadyState ss = detect_steady_state(s, 1.0, 1e-12);
    CHECK(ss.reached);
    CHECK(ss.t_steady == doctest::Approx(0.3));
  }

  SUBCASE("exponential decay") {
    TimeSeries s("exp", "");
    const double dt = 0.01;
    for (int i = 0; i <= 2000; ++i) s.push(i * dt, std::exp(-i * dt));
    const double eps = 1e-3;
    SteadyState ss = detect_steady_state(s, 1.0, eps);
    REQUIRE(ss.reached);
    // Spread over [t, t + 1] is e^{-t}(1 - e^{-1}).
    const double oracle = std::log((1.0 - std::exp(-1.0)) / eps);
    CHECK(std::abs(ss.t_steady - oracle) <= dt);
    CHECK(ss.t_steady > 0.5 * std::log(1.0 / eps));
    CHECK(ss.t_steady < std::log(1.0 / eps));
  }

  SUBCASE("late excursion resets the detection") {
    TimeSeries s("bump", "");
    for (int i = 0; i <= 100; ++i) s.push(0.1 * i, (i >= 60 && i <= 62) ? 1.0 : 0.0);
    SteadyState ss = detect_steady_state(s, 1.0, 0.5);
    REQUIRE(ss.reached);
    CHECK(ss.t_steady == doctest::Approx(6.3));
  }

  SUBCASE("oscillation never settles") {
    TimeSeries s("osc", "");
    for (int i = 0; i <= 200; ++i) s.push(0.05 * i, std::sin(3.0 * 0.05 * i));
    SteadyState ss = detect_steady_state(s, 1.0, 0.1);
    CHECK_FALSE(ss.reached);
    CHECK(ss.diagnostic.find("never settles") != std::string::npos);
  }

  SUBCASE("series shorter than two windows") {
    TimeSeries s("short", "");
    for (int i = 0; i <= 10; ++i) s.push(0.1 * i, 1.0);
    CHECK_THROWS_AS(detect_steady_state(s, 0.6, 0.1), InvalidShapeError);
  }
}

TEST_CASE("Liouvillian steady state") {
  SUBCASE("pure loss relaxes to the vacuum") {
    FockSpace space(8);
    LindbladGenerator gen(Operator::zero(8), {{0.7, annihilation(space)}});
    DensityMatrix rho = liouvillian_steady_state(gen);
    CHECK(max_abs(rho.matrix() - DensityMatrix::basis(8, 0).matrix()) < 1e-10);
  }

  SUBCASE("engineered reservoir dark state") {
    // At dim 24 the truncated A leaves a 6.5e-8 defect for kappa = 0.3.
    BogoliubovPair pair = build_bogoliubov(0.2, FockSpace(24));
    DensityMatrix rho = liouvillian_steady_state(engineered_reservoir_generator({1.0, 0.0}, pair));
    const Vector v = generalized_vacuum(pair).amplitudes();
    CHECK(max_abs(rho.matrix() - v * v.adjoint()) < 1e-8);
  }

  SUBCASE("degenerate null space is ambiguous") {
    LindbladGenerator gen(Operator(number(FockSpace(4)).matrix()), {});
    try {
      liouvillian_steady_state(gen);
      FAIL("expected AmbiguityError");
    } catch (const AmbiguityError& e) {
      CHECK(e.null_dimension() == 4);
    }
  }

  SUBCASE("superoperator size cap") {
    LindbladGenerator gen(Operator::zero(25), {});
    CHECK_THROWS_AS(liouvillian_steady_state(gen), InvalidSpaceError);
  }

  SUBCASE("laser generator agrees with atom injection at matched rates") {
    // Short interactions (g tau << 1) with atoms in |e> coarse-grain to
    // (g^2 / k) D[A^dag]; below threshold the saturation term is negligible.
    const double kappa = 0.3, C = 1.0, k = 50.0, g = std::sqrt(0.2 * k);
    BogoliubovPair pair = build_bogoliubov(kappa, FockSpace(24));
    LaserRateParams rates;
    rates.gain_A = g * g / k;
    rates.loss_C = C;
    DensityMatrix fixed_point = liouvillian_steady_state(LaserGenerator(rates, pair));

    InjectionSchedule s;
    s.atom_rate_k = k;
    s.total_atoms = static_cast<long long>(12.0 * k);
    s.sample_every = s.total_atoms;
    IntegratorConfig cfg;
    auto res = run_injection(s, {g, kappa}, C, 0.0, pair, DensityMatrix::from_pure(generalized_vacuum(pair)), {}, cfg);
    double f = state_fidelity(fixed_point.matrix(), res.final_state.matrix());
    CHECK(f >= 0.9);
  }
}
