#include "doctest.h"

#include <cmath>

#include "svlaser/algebra.hpp"
#include "svlaser/errors.hpp"

using namespace svl;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

int dim_for(double kappa) {
  if (kappa < 0.1) return 20;
  if (kappa < 0.5) return 60;
  if (kappa < 0.8) return 160;
  return 700;
}

// Null-space oracle for the generalized vacuum: eigenvector of A^dag A with
// the smallest eigenvalue, independent of the recursion.
Vector kernel_by_eigensolve(const BogoliubovPair& pair) {
  Matrix ata = (pair.A_dagger * pair.A).matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(ata);
  return es.eigenvectors().col(0);
}

}  // namespace

TEST_CASE("build_bogoliubov") {
  FockSpace s(60);
  BogoliubovPair p0 = build_bogoliubov(0.0, s);
  CHECK(max_abs(p0.A.matrix() - annihilation(s).matrix()) == 0.0);

  BogoliubovPair p = build_bogoliubov(0.6, s);
  CHECK(max_abs(p.A_dagger.matrix() - p.A.matrix().adjoint()) == 0.0);
  Matrix a = annihilation(s).matrix();
  Matrix expected = (a + 0.6 * a.adjoint()) / std::sqrt(1.0 - 0.36);
  CHECK(max_abs(p.A.matrix() - expected) < 1e-14);

  Matrix c = commutator(p.A, p.A_dagger).matrix();
  CHECK(max_abs(c.topLeftCorner(58, 58) - Matrix::Identity(58, 58)) < 1e-10);

  CHECK_THROWS_AS(build_bogoliubov(1.0, s), UnphysicalParameterError);
  CHECK_THROWS_AS(build_bogoliubov(-0.1, s), UnphysicalParameterError);

  Vector sq = squeeze(s, squeeze_parameter(0.6)).matrix().col(0);
  CHECK((p.A * sq).norm() <= 1e-6);
}

TEST_CASE("squeeze_parameter") {
  CHECK(squeeze_parameter(0.0) == 0.0);
  CHECK(squeeze_parameter(0.6) == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(squeeze_parameter(0.6) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  for (double k : {0.1, 0.3, 0.6, 0.9, 0.99}) CHECK(std::abs(std::tanh(squeeze_parameter(k)) - k) < 1e-12);
  CHECK_THROWS_AS(squeeze_parameter(1.0), UnphysicalParameterError);
}

TEST_CASE("generalized vacuum") {
  SUBCASE("kappa zero is the Fock vacuum") {
    StateVector v = generalized_vacuum(build_bogoliubov(0.0, FockSpace(10)));
    CHECK((v.amplitudes() - StateVector::basis(10, 0).amplitudes()).norm() < 1e-15);
  }
  SUBCASE("recursion ratio and parity") {
    StateVector v = generalized_vacuum(build_bogoliubov(0.6, FockSpace(60)));
    CHECK((v[2] / v[0]).real() == doctest::Approx(-0.6 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(v[0].real() > 0.0);
    for (int k = 1; k < 60; k += 2) CHECK(v[k] == cplx(0.0));
  }
  SUBCASE("agrees with the eigensolver null vector") {
    BogoliubovPair p = build_bogoliubov(0.6, FockSpace(60));
    Vector ref = kernel_by_eigensolve(p);
    CHECK(std::abs(generalized_vacuum(p).amplitudes().dot(ref)) >= 1.0 - 1e-9);
  }
  SUBCASE("equals the squeezed vacuum") {
    FockSpace s(60);
    StateVector v = generalized_vacuum(build_bogoliubov(0.6, s));
    Vector sq = squeeze(s, squeeze_parameter(0.6)).matrix().col(0);
    CHECK(std::abs(v.amplitudes().dot(sq)) >= 1.0 - 1e-6);
  }
  SUBCASE("truncation is detected") {
    CHECK_THROWS_AS(generalized_vacuum(build_bogoliubov(0.9, FockSpace(20))), TruncationError);
  }
}

TEST_CASE("generalized number states") {
  BogoliubovPair p = build_bogoliubov(0.6, FockSpace(160));
  StateVector n0 = generalized_number_state(p, 0);
  CHECK((n0.amplitudes() - generalized_vacuum(p).amplitudes()).norm() < 1e-15);
  Operator num = p.A_dagger * p.A;
  for (int n = 0; n <= 8; ++n) {
    StateVector s = generalized_number_state(p, n);
    CHECK((num * s.amplitudes() - static_cast<double>(n) * s.amplitudes()).norm() < 1e-7);
  }
  CHECK_THROWS_AS(generalized_number_state(p, -1), IndexError);
}

TEST_CASE("closed form matches the ladder construction") {
  for (double kappa : {0.0, 0.3, 0.6, 0.9}) {
    CAPTURE(kappa);
    FockSpace s(dim_for(kappa));
    BogoliubovPair p = build_bogoliubov(kappa, s);
    for (int n = 0; n <= 8; ++n) {
      CAPTURE(n);
      StateVector cf = closed_form_number_state(kappa, n, s);
      StateVector lad = generalized_number_state(p, n);
      CHECK(std::abs(cf.inner(lad)) >= 1.0 - 1e-6);
      // First nonzero amplitude is real positive.
      for (int k = 0; k < s.dim(); ++k) {
        if (std::abs(cf[k]) > 1e-300) {
          CHECK(cf[k].real() > 0.0);
          CHECK(cf[k].imag() == 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("closed form special cases") {
  FockSpace s(20);
  for (int n = 0; n < 10; ++n) {
    StateVector cf = closed_form_number_state(0.0, n, s);
    CHECK((cf.amplitudes() - StateVector::basis(20, n).amplitudes()).norm() < 1e-14);
  }
  FockSpace big(120);
  StateVector even0 = closed_form_number_state(0.6, 0, big);
  CHECK((even0.amplitudes() - generalized_vacuum(build_bogoliubov(0.6, big)).amplitudes()).norm() < 1e-6);
  StateVector odd1 = closed_form_number_state(0.6, 1, big);
  CHECK(std::abs(odd1.inner(even0)) < 1e-8);

  // Large truncation: log-space accumulation must not overflow.
  FockSpace huge(800);
  StateVector far = closed_form_number_state(0.9, 8, huge);
  CHECK(far.amplitudes().allFinite());
}

TEST_CASE("generalized basis invariants") {
  for (double kappa : {0.0, 0.3, 0.6, 0.9}) {
    CAPTURE(kappa);
    BogoliubovPair p = build_bogoliubov(kappa, FockSpace(dim_for(kappa)));
    GeneralizedBasis basis = build_generalized_basis(p, 8);
    REQUIRE(basis.states.size() == 9);
    LadderResiduals r = ladder_residuals(p, basis);
    CHECK(r.number < 1e-7);
    CHECK(r.raising < 1e-7);
    CHECK(r.lowering < 1e-7);
    Matrix g = gram_matrix(basis);
    CHECK(max_abs(g - Matrix::Identity(9, 9)) < 1e-7);
    // Parity sectors are disjoint.
    for (int m = 0; m <= 8; m += 2)
      for (int n = 1; n <= 8; n += 2) {
        const Vector& ev = basis.states[m].amplitudes();
        const Vector& od = basis.states[n].amplitudes();
        for (int k = 0; k < ev.size(); ++k) CHECK(std::abs(ev(k) * od(k)) < 1e-10);
      }
  }
}

TEST_CASE("generalized coherent state") {
  BogoliubovPair p = build_bogoliubov(0.6, FockSpace(60));
  CHECK((generalized_coherent(p, 0.0).amplitudes() - generalized_vacuum(p).amplitudes()).norm() < 1e-15);

  const cplx alpha(0.18, 0.0);
  StateVector c = generalized_coherent(p, alpha);
  CHECK((p.A * c.amplitudes() - alpha * c.amplitudes()).norm() <= 1e-6);

  double even = 0.0, odd = 0.0;
  for (int k = 0; k < 60; ++k) (k % 2 == 0 ? even : odd) += std::norm(c[k]);
  CHECK(odd > 1e-3);
  CHECK(even > 0.9);
}

TEST_CASE("recommended_dim keeps the vacuum tail small") {
  for (double kappa : {0.0, 0.3, 0.6, 0.9}) {
    int d = recommended_dim(kappa);
    CHECK_NOTHROW(build_generalized_basis(build_bogoliubov(kappa, FockSpace(d)), 8));
  }
}
