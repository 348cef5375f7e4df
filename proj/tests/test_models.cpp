#include "doctest.h"

#include <cmath>
#include <random>

#include "svlaser/errors.hpp"
#include "svlaser/models.hpp"

using namespace svl;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

Matrix random_density(int n, std::mt19937& rng) {
  Matrix g = random_matrix(n, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

LambdaSystemParams fig2_params() { return LambdaSystemParams::from_design(1.0, 40.0, 1000.0, 600.0); }

}  // namespace

TEST_CASE("Lambda-system parameters") {
  LambdaSystemParams p = fig2_params();
  CHECK_NOTHROW(p.validate());
  CHECK(p.kappa() == doctest::Approx(0.6).epsilon(1e-15));
  EffectiveParams eff = EffectiveParams::from(p);
  CHECK(eff.kappa == doctest::Approx(0.6));
  CHECK(eff.g == doctest::Approx(0.8 * 40.0 / 600.0).epsilon(1e-14));
  CHECK(std::abs(eff.g - 0.053) < 1e-3);
  CHECK(p.regime_warnings(0.5).empty());

  SUBCASE("each constraint is named when violated") {
    auto expect = [](LambdaSystemParams q, const std::string& relation) {
      try {
        q.validate();
        FAIL("expected a constraint violation for " << relation);
      } catch (const ConstraintViolation& e) {
        CHECK(e.relation() == relation);
      }
    };
    LambdaSystemParams q = p;
    q.lambda_e = 1.1;
    expect(q, "lambda_g = lambda_e");
    q = p;
    q.Omega_g2 = 39.0;
    expect(q, "Omega_g1 = Omega_g2");
    q = p;
    q.Omega_e1 = 40.0;
    expect(q, "Omega_g1 = -Omega_e1");
    q = p;
    q.Omega_e2 = 40.0;
    expect(q, "Omega_g1 = -Omega_e2");
    q = p;
    q.delta_g2 = 999.0;
    expect(q, "delta_g1 = delta_g2");
    q = p;
    q.delta_e2 = 500.0;
    expect(q, "delta_g1 = delta_e2/kappa");
    q = p;
    q.Delta_g = 1.0;
    expect(q, "Delta_g = delta_e1");
    q = p;
    q.Delta_e = 1.0;
    expect(q, "Delta_e = delta_g1");
    q = p;
    q.delta_e1 = q.delta_e2 = q.Delta_g = 1200.0;
    expect(q, "0 <= kappa = delta_e1/delta_g1 < 1");
    q = p;
    q.omega = 10.0;
    q.omega_i = 500.0;
    expect(q, "Delta_g = omega_i - omega");
  }

  SUBCASE("regime warnings") {
    LambdaSystemParams q = LambdaSystemParams::from_design(1.0, 400.0, 1000.0, 600.0);
    CHECK_FALSE(q.regime_warnings(0.0).empty());
    CHECK_FALSE(p.regime_warnings(20.0).empty());
  }
}

TEST_CASE("laser rate derivation") {
  LaserRateParams r = LaserRateParams::derive(1.0, 0.5, 0.35, 92.0);
  CHECK(r.pump_R == 92.0);
  CHECK(r.gain_A == doctest::Approx(736.0).epsilon(1e-15));
  CHECK(r.saturation_B == doctest::Approx(4.0 * 736.0 * 4.0).epsilon(1e-15));
  LaserRateParams half = LaserRateParams::derive(1.0, 0.5, 0.35, 184.0, 0.5);
  CHECK(half.pump_R == 92.0);
  CHECK_THROWS_AS(LaserRateParams::derive(1.0, 0.0, 0.35, 92.0), UnphysicalParameterError);
  CHECK_THROWS_AS(LaserRateParams::derive(1.0, 0.5, 0.35, 92.0, 1.5), UnphysicalParameterError);
  r.pump_R = 10.0;
  CHECK_THROWS_AS(r.validate(), ConstraintViolation);
}

TEST_CASE("full Hamiltonian") {
  FockSpace s(6);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ut(0.0, 10.0);

  SUBCASE("zero couplings give zero") {
    LambdaSystemParams p = LambdaSystemParams::from_design(0.0, 0.0, 1000.0, 600.0);
    CHECK(max_abs(full_hamiltonian(p, s, 0.37).matrix()) == 0.0);
  }
  SUBCASE("Hermitian at all times") {
    LambdaHamiltonian h(fig2_params(), s);
    for (int k = 0; k < 20; ++k) CHECK(hermiticity_defect(h.at(ut(rng))) <= 1e-12);
  }
  SUBCASE("period of the default validation drive set") {
    LambdaHamiltonian h(fig2_params(), s);
    REQUIRE(h.period().has_value());
    CHECK(*h.period() == doctest::Approx(2.0 * M_PI / 200.0).epsilon(1e-12));
    const double t = ut(rng);
    CHECK(max_abs(h.at(t) - h.at(t + *h.period())) < 1e-9);
    CHECK(h.max_frequency() == 1000.0);
  }
  SUBCASE("matches the explicit interaction-picture transform") {
    // Oracle: build V(t) in the lab frame from bare and drive frequencies and
    // conjugate with exp(i H0 t); H0 is diagonal so this is elementwise.
    LambdaSystemParams p = LambdaSystemParams::from_design(0.7, 3.0, 50.0, 20.0);
    p.lambda_e = 0.7;
    p.omega = 13.0;
    p.omega_i = p.omega.value() + p.Delta_g;
    p.omega_0 = p.Delta_e + p.omega_i.value() - p.omega.value();
    REQUIRE_NOTHROW(p.validate());
    const auto drives = p.drive_frequencies().value();
    const int d = s.dim();
    const Matrix a = annihilation(s).matrix();
    const Matrix id = Matrix::Identity(d, d);
    auto proj = [&](int r, int c) { return atomic_projector(3, r, c).matrix(); };
    RealVector h0(3 * d);
    const double level[3] = {0.0, *p.omega_0, *p.omega_i};
    for (int atom = 0; atom < 3; ++atom)
      for (int n = 0; n < d; ++n) h0(atom * d + n) = level[atom] + n * *p.omega;
    LambdaHamiltonian h(p, s);
    for (int k = 0; k < 5; ++k) {
      const double t = ut(rng);
      Matrix v = p.lambda_g * tensor(proj(2, 0), a) + p.lambda_e * tensor(proj(2, 1), a);
      v += std::exp(-kI * (drives[0] * t)) * p.Omega_g1 * tensor(proj(2, 0), id);
      v += std::exp(-kI * (drives[1] * t)) * p.Omega_g2 * tensor(proj(2, 0), id);
      v += std::exp(-kI * (drives[2] * t)) * p.Omega_e1 * tensor(proj(2, 1), id);
      v += std::exp(-kI * (drives[3] * t)) * p.Omega_e2 * tensor(proj(2, 1), id);
      v += v.adjoint().eval();
      Matrix vi(3 * d, 3 * d);
      for (int i = 0; i < 3 * d; ++i)
        for (int j = 0; j < 3 * d; ++j) vi(i, j) = std::exp(kI * ((h0(i) - h0(j)) * t)) * v(i, j);
      CHECK(max_abs(vi - h.at(t)) < 1e-9);
    }
  }
}

TEST_CASE("effective Hamiltonian") {
  FockSpace s(12);
  EffectiveParams eff{0.7, 0.0};

  SUBCASE("kappa zero is Jaynes-Cummings") {
    BogoliubovPair p = build_bogoliubov(0.0, s);
    const Matrix a = annihilation(s).matrix();
    Matrix jc = 0.7 * (tensor(sigma_plus().matrix(), a) + tensor(sigma_minus().matrix(), Matrix(a.adjoint())));
    CHECK(max_abs(effective_hamiltonian(eff, p).matrix() - jc) < 1e-15);
  }
  SUBCASE("conserves the generalized excitation number") {
    FockSpace big(40);
    BogoliubovPair p = build_bogoliubov(0.6, big);
    Operator h = effective_hamiltonian({0.7, 0.6}, p);
    Operator excitation = tensor(sigma_plus() * sigma_minus(), Operator::identity(40)) +
                          tensor(Operator::identity(2), p.A_dagger * p.A);
    CHECK(h.is_hermitian(1e-14));
    Matrix c = commutator(h, excitation).matrix();
    // Exact away from the truncation edge of each atomic block.
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) CHECK(max_abs(c.block(s1 * 40, s2 * 40, 36, 36)) < 1e-10);
  }
  SUBCASE("maps |g>|1>_A to g|e>|0>_A") {
    FockSpace big(60);
    BogoliubovPair p = build_bogoliubov(0.6, big);
    GeneralizedBasis b = build_generalized_basis(p, 1);
    Vector in = tensor(StateVector::basis(2, 0), b.states[1]).amplitudes();
    Vector expected = 0.7 * tensor(StateVector::basis(2, 1), b.states[0]).amplitudes();
    Vector out = effective_hamiltonian({0.7, 0.6}, p) * in;
    CHECK((out - expected).norm() < 1e-7);
  }
}

TEST_CASE("laser generator") {
  std::mt19937 rng(17);
  FockSpace s(10);
  BogoliubovPair pair = build_bogoliubov(0.6, s);

  SUBCASE("zero rates give zero") {
    LaserRateParams zero;
    CHECK(max_abs(laser_rhs(random_density(10, rng), zero, pair)) == 0.0);
  }
  SUBCASE("each term is trace-free and Hermiticity-preserving") {
    for (int which = 0; which < 3; ++which) {
      LaserRateParams r;
      (which == 0 ? r.gain_A : which == 1 ? r.saturation_B : r.loss_C) = 1.3;
      Matrix rho = random_density(10, rng);
      Matrix d = laser_rhs(rho, r, pair);
      CHECK(std::abs(d.trace()) < 1e-10);
      CHECK(hermiticity_defect(d) < 1e-10);
    }
  }
  SUBCASE("hand-expanded three-level oracle at kappa zero") {
    BogoliubovPair p3 = build_bogoliubov(0.0, FockSpace(3));
    Matrix rho = Matrix::Zero(3, 3);
    rho(0, 0) = 0.7;
    rho(1, 1) = 0.3;
    LaserRateParams gain;
    gain.gain_A = 2.0;
    Matrix d = laser_rhs(rho, gain, p3);
    // dp_n = A [n p_{n-1} - (n+1) p_n]
    CHECK(d(0, 0).real() == doctest::Approx(-2.0 * 0.7));
    CHECK(d(1, 1).real() == doctest::Approx(2.0 * (0.7 - 2.0 * 0.3)));
    CHECK(d(2, 2).real() == doctest::Approx(2.0 * 2.0 * 0.3));
    LaserRateParams sat;
    sat.saturation_B = 0.5;
    d = laser_rhs(rho, sat, p3);
    // dp_n = B [(n+1)^2 p_n - n^2 p_{n-1}], the first saturation correction.
    CHECK(d(0, 0).real() == doctest::Approx(0.5 * 0.7));
    CHECK(d(1, 1).real() == doctest::Approx(0.5 * (4.0 * 0.3 - 0.7)));
    LaserRateParams loss;
    loss.loss_C = 0.4;
    d = laser_rhs(rho, loss, p3);
    CHECK(d(0, 0).real() == doctest::Approx(0.4 * 0.3));
    CHECK(d(1, 1).real() == doctest::Approx(-0.4 * 0.3));
  }
  SUBCASE("gain grows <A^dag A> at rate A (<A^dag A> + 1)") {
    FockSpace big(60);
    BogoliubovPair p = build_bogoliubov(0.6, big);
    GeneralizedBasis b = build_generalized_basis(p, 3);
    Vector mix = (b.states[0].amplitudes() + 0.5 * b.states[2].amplitudes()).normalized();
    Matrix rho = mix * mix.adjoint();
    LaserRateParams gain;
    gain.gain_A = 3.0;
    Matrix d = laser_rhs(rho, gain, p);
    const Matrix num = (p.A_dagger * p.A).matrix();
    const double n_now = (num * rho).trace().real();
    const double rate = (num * d).trace().real();
    CHECK(rate == doctest::Approx(3.0 * (n_now + 1.0)).epsilon(1e-6));
  }
}

TEST_CASE("atom step generator") {
  std::mt19937 rng(23);
  const int n = 14;
  BogoliubovPair pair = build_bogoliubov(0.6, FockSpace(n));
  EffectiveParams eff{0.9, 0.6};

  SUBCASE("fast block form equals the dense reference") {
    AtomFieldGenerator fast(eff, 0.35, 0.5, pair);
    for (int trial = 0; trial < 5; ++trial) {
      Matrix rho = random_matrix(2 * n, rng);  // arbitrary, not only Hermitian
      Matrix ref = atom_step_rhs(rho, eff, 0.35, 0.5, pair);
      CHECK(max_abs(fast(rho) - ref) < 1e-11 * std::max(1.0, max_abs(ref)));
    }
  }
  SUBCASE("trace-free and Hermitian on random states") {
    AtomFieldGenerator fast(eff, 0.35, 0.5, pair);
    for (int trial = 0; trial < 5; ++trial) {
      Matrix rho = random_density(2 * n, rng);
      Matrix d = atom_step_rhs(rho, eff, 0.35, 0.5, pair);
      CHECK(std::abs(d.trace()) < 1e-10);
      CHECK(hermiticity_defect(d) < 1e-10);
      CHECK(std::abs(fast(rho).trace()) < 1e-10);
    }
  }
  SUBCASE("excited-state population decays at gamma") {
    Matrix rho = tensor(DensityMatrix::basis(2, 1).matrix(), DensityMatrix::basis(n, 0).matrix());
    Matrix d = atom_step_rhs(rho, {0.0, 0.6}, 0.0, 0.5, pair);
    const Matrix see = tensor(atomic_projector(2, 1, 1).matrix(), Matrix(Matrix::Identity(n, n)));
    CHECK((see * d).trace().real() == doctest::Approx(-0.5));
  }
  SUBCASE("all generators zero") {
    Matrix rho = random_density(2 * n, rng);
    CHECK(max_abs(atom_step_rhs(rho, {0.0, 0.6}, 0.0, 0.0, pair)) == 0.0);
    CHECK(max_abs(AtomFieldGenerator({0.0, 0.6}, 0.0, 0.0, pair)(rho)) == 0.0);
  }
}

TEST_CASE("engineered reservoir") {
  FockSpace s(100);
  BogoliubovPair pair = build_bogoliubov(0.6, s);
  StateVector vac = generalized_vacuum(pair);
  Matrix rho = DensityMatrix::from_pure(vac).matrix();

  CHECK(max_abs(engineered_reservoir_rhs(rho, {1.0, 0.0}, pair)) <= 1e-8);
  CHECK(max_abs(engineered_reservoir_rhs(rho, {1.0, 0.05}, pair)) > 1e-3);

  Matrix fock0 = DensityMatrix::basis(100, 0).matrix();
  CHECK(max_abs(engineered_reservoir_rhs(fock0, {0.0, 0.3}, pair)) == 0.0);

  std::mt19937 rng(29);
  Matrix r = random_density(100, rng);
  Matrix d = engineered_reservoir_rhs(r, {1.0, 0.1}, pair);
  CHECK(std::abs(d.trace()) < 1e-10);
  CHECK(hermiticity_defect(d) < 1e-10);

  CHECK_THROWS_AS(EngineeredReservoirParams({0.0, 0.1}).validate(), UnphysicalParameterError);
  CHECK_THROWS_AS(EngineeredReservoirParams({1.0, -0.1}).validate(), UnphysicalParameterError);
  CHECK(EngineeredReservoirParams{1.0, 0.05}.in_regime());
  CHECK_FALSE(EngineeredReservoirParams{1.0, 0.5}.in_regime());
}
