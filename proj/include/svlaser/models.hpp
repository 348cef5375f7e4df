#pragma once

// Hamiltonians and master-equation generators for the squeezed-vacuum laser.
//
// Atom levels: g = 0, e = 1, i = 2. Joint operators are atom (x) field.
// Frequencies of the Lambda system are in units of the cavity Rabi frequency
// lambda; laser rates are in units of the effective coupling g.

#include <optional>
#include <string>
#include <vector>

#include "svlaser/algebra.hpp"
#include "svlaser/generator.hpp"
#include "svlaser/hilbert.hpp"

namespace svl {

struct LambdaSystemParams {
  double lambda_g = 1.0;
  double lambda_e = 1.0;
  double Omega_g1 = 0.0;
  double Omega_g2 = 0.0;
  double Omega_e1 = 0.0;
  double Omega_e2 = 0.0;
  double delta_g1 = 0.0;
  double delta_g2 = 0.0;
  double delta_e1 = 0.0;
  double delta_e2 = 0.0;
  double Delta_g = 0.0;
  double Delta_e = 0.0;
  // Bare frequencies. Optional: only the detunings enter the interaction
  // picture, but when given they must reproduce Delta_g and Delta_e.
  std::optional<double> omega;
  std::optional<double> omega_0;
  std::optional<double> omega_i;

  // Fills every field from the independent design choices, satisfying the
  // constraint set by construction.
  static LambdaSystemParams from_design(double lambda, double Omega, double delta_g, double delta_e);

  double kappa() const { return delta_e1 / delta_g1; }

  // Throws ConstraintViolation naming the first violated relation.
  void validate(double rel_tol = 1e-9) const;

  // Human-readable notes where delta >> Omega >> n_bar lambda is not met
  // (ratio below `margin`). Empty when the regime holds.
  std::vector<std::string> regime_warnings(double n_bar, double margin = 5.0) const;

  // Laser frequencies omega_g1, omega_g2, omega_e1, omega_e2; requires the
  // bare frequencies.
  std::optional<std::vector<double>> drive_frequencies() const;
};

struct EffectiveParams {
  double g;
  double kappa;

  // g = sqrt(1 - kappa^2) lambda Omega_g1 / delta_e1 with kappa = delta_e1 / delta_g1.
  static EffectiveParams from(const LambdaSystemParams& p);
};

struct LaserRateParams {
  double gain_A = 0.0;
  double saturation_B = 0.0;
  double loss_C = 0.0;
  double pump_R = 0.0;
  double injection_K = 0.0;
  double excite_p = 1.0;
  double gamma = 0.0;
  std::optional<double> quality_Q;

  // A = 2R(g/gamma)^2, B = 4A(g/gamma)^2, R = K p.
  static LaserRateParams derive(double g, double gamma, double loss_C, double injection_K,
                                double excite_p = 1.0);
  void validate() const;
};

struct EngineeredReservoirParams {
  double Gamma = 1.0;
  double Gamma_tilde = 0.0;

  void validate() const;
  // False when Gamma >> Gamma_tilde fails (ratio above `max_ratio`).
  bool in_regime(double max_ratio = 0.1) const { return Gamma_tilde <= max_ratio * Gamma; }
};

// Interaction-picture Hamiltonian of the driven Lambda system on
// (3-level atom) (x) field:
//   sigma_ig (x) [lambda_g a e^{i Delta_g t} + Omega_g1 e^{-i delta_g1 t} + Omega_g2 e^{i delta_g2 t}]
// + sigma_ie (x) [lambda_e a e^{-i Delta_e t} + Omega_e1 e^{i delta_e1 t} + Omega_e2 e^{-i delta_e2 t}]
// + h.c.
class LambdaHamiltonian {
 public:
  LambdaHamiltonian(const LambdaSystemParams& params, const FockSpace& field);

  int dim() const { return 3 * field_dim_; }
  Matrix at(double t) const;
  void at(double t, Matrix& out) const;

  // Common period of all phase factors when the frequencies are commensurate
  // (ratios rational with denominators up to max_denominator).
  std::optional<double> period(int max_denominator = 1000) const;
  // Largest angular frequency present.
  double max_frequency() const;

 private:
  LambdaSystemParams p_;
  int field_dim_;
  Matrix ig_field_;   // sigma_ig (x) a  (times lambda_g)
  Matrix ie_field_;   // sigma_ie (x) a  (times lambda_e)
  Matrix ig_drive_;   // sigma_ig (x) 1
  Matrix ie_drive_;   // sigma_ie (x) 1
};

Operator full_hamiltonian(const LambdaSystemParams& params, const FockSpace& field, double t);

// g (A sigma_+ + A^dag sigma_-) on (2-level atom) (x) field.
Operator effective_hamiltonian(const EffectiveParams& eff, const BogoliubovPair& pair);

// Second-order cavity Stark terms dropped by the effective Hamiltonian:
// (lambda_e^2 / Delta_e) sigma_ee (x) a^dag a - (lambda_g^2 / Delta_g) sigma_gg (x) a^dag a.
// Diagnostic only; not part of any scenario model.
Operator cavity_stark_shift(const LambdaSystemParams& params, const FockSpace& field);

// Gain A D[A^dag] + saturation (printed fourth-order form) + loss C D[A], where
// D[L] rho = L rho L^dag - {L^dag L, rho}/2. The saturation term reads
//   (B/2) [ (1/4) N (N rho + 3 rho N) + (1/4)(rho N + 3 N rho) N - A^dag (N rho + rho N) A ],
// N = A A^dag.
Matrix laser_rhs(const Matrix& rho, const LaserRateParams& rates, const BogoliubovPair& pair);

class LaserGenerator final : public Generator {
 public:
  LaserGenerator(const LaserRateParams& rates, const BogoliubovPair& pair);
  int dim() const override { return pair_.space.dim(); }
  void apply(const Matrix& rho, Matrix& out) const override;

 private:
  LaserRateParams rates_;
  BogoliubovPair pair_;
  Matrix n_;    // A A^dag
  Matrix n2_;   // (A A^dag)^2
  Matrix aa_;   // A^dag A
};

// Per-atom master equation on (2-level atom) (x) field, dense reference:
//   -i[H_eff, rho] + C D[1 (x) A] rho + gamma D[sigma_- (x) 1] rho.
Matrix atom_step_rhs(const Matrix& rho_joint, const EffectiveParams& eff, double loss_C,
                     double gamma, const BogoliubovPair& pair);

// Same equation evaluated block-wise on the 2x2 atom blocks of rho, using the
// tridiagonal structure of A so one evaluation costs O(dim^2).
class AtomFieldGenerator final : public Generator {
 public:
  AtomFieldGenerator(const EffectiveParams& eff, double loss_C, double gamma, const BogoliubovPair& pair);
  int dim() const override { return 2 * n_; }
  void apply(const Matrix& rho, Matrix& out) const override;

 private:
  int n_;
  double g_, loss_, gamma_;
  // A = sub-diagonal lo_ + super-diagonal up_; A^dag A = pentadiagonal d0_, d2_.
  RealVector up_, lo_, d0_, d2_;

  void left_A(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const;
  void left_Ad(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const;
  void loss_term(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out, Matrix& scratch) const;
};

// Gamma D[A] rho + Gamma_tilde D[a] rho.
Matrix engineered_reservoir_rhs(const Matrix& rho, const EngineeredReservoirParams& res,
                                const BogoliubovPair& pair);
LindbladGenerator engineered_reservoir_generator(const EngineeredReservoirParams& res,
                                                 const BogoliubovPair& pair);

}  // namespace svl
