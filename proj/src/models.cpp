#include "svlaser/models.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "svlaser/errors.hpp"

namespace svl {
namespace {

constexpr int kG = static_cast<int>(AtomLevel::g);
constexpr int kE = static_cast<int>(AtomLevel::e);
constexpr int kLevelI = static_cast<int>(AtomLevel::i);

bool close(double a, double b, double rel_tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel_tol * scale;
}

void require_relation(bool ok, const std::string& relation, double lhs, double rhs) {
  if (ok) return;
  std::ostringstream os;
  os << "lhs = " << lhs << ", rhs = " << rhs;
  throw ConstraintViolation(relation, os.str());
}

void require_rate(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os << name << " = " << value << " must be finite and non-negative";
    throw UnphysicalParameterError(os.str());
  }
}

// Best rational approximation p/q of x with q <= max_den, by continued fractions.
std::optional<std::pair<long long, long long>> rationalize(double x, int max_den, double rel_tol) {
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(frac);
    const long long ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <= rel_tol * std::max(1.0, std::abs(x)))
      return std::make_pair(p1, q1);
    const double rem = frac - a;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (q1 > 0 && std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <= rel_tol * std::max(1.0, std::abs(x)))
    return std::make_pair(p1, q1);
  return std::nullopt;
}

Matrix embed_atom(int levels, int row, int col, const Matrix& field) {
  return tensor(atomic_projector(levels, row, col).matrix(), field);
}

}  // namespace

// ---------------------------------------------------------------------------
// LambdaSystemParams

LambdaSystemParams LambdaSystemParams::from_design(double lambda, double Omega, double delta_g,
                                                   double delta_e) {
  LambdaSystemParams p;
  p.lambda_g = p.lambda_e = lambda;
  p.Omega_g1 = p.Omega_g2 = Omega;
  p.Omega_e1 = p.Omega_e2 = -Omega;
  p.delta_g1 = p.delta_g2 = delta_g;
  p.delta_e1 = p.delta_e2 = delta_e;
  p.Delta_g = delta_e;
  p.Delta_e = delta_g;
  return p;
}

void LambdaSystemParams::validate(double rel_tol) const {
  const double fields[] = {lambda_g, lambda_e, Omega_g1, Omega_g2, Omega_e1, Omega_e2,
                           delta_g1, delta_g2, delta_e1, delta_e2, Delta_g,  Delta_e};
  for (double f : fields)
    if (!std::isfinite(f)) throw UnphysicalParameterError("Lambda-system parameters must be finite");
  if (!(delta_g1 > 0.0)) throw ConstraintViolation("delta_g1 > 0", "delta_g1 = " + std::to_string(delta_g1));
  const double k = kappa();
  require_relation(k >= 0.0 && k < 1.0, "0 <= kappa = delta_e1/delta_g1 < 1", k, 1.0);
  require_relation(close(lambda_g, lambda_e, rel_tol), "lambda_g = lambda_e", lambda_g, lambda_e);
  require_relation(close(Omega_g1, Omega_g2, rel_tol), "Omega_g1 = Omega_g2", Omega_g1, Omega_g2);
  require_relation(close(Omega_g1, -Omega_e1, rel_tol), "Omega_g1 = -Omega_e1", Omega_g1, -Omega_e1);
  require_relation(close(Omega_g1, -Omega_e2, rel_tol), "Omega_g1 = -Omega_e2", Omega_g1, -Omega_e2);
  require_relation(close(delta_g1, delta_g2, rel_tol), "delta_g1 = delta_g2", delta_g1, delta_g2);
  require_relation(close(delta_e1, delta_e2, rel_tol), "delta_g1 = delta_e2/kappa", delta_g1,
                   k > 0.0 ? delta_e2 / k : delta_e2);
  require_relation(close(Delta_g, delta_e1, rel_tol), "Delta_g = delta_e1", Delta_g, delta_e1);
  require_relation(close(Delta_e, delta_g1, rel_tol), "Delta_e = delta_g1", Delta_e, delta_g1);
  if (omega && omega_i)
    require_relation(close(Delta_g, *omega_i - *omega, rel_tol), "Delta_g = omega_i - omega", Delta_g,
                     *omega_i - *omega);
  if (omega && omega_0 && omega_i)
    require_relation(close(Delta_e, *omega_0 + *omega - *omega_i, rel_tol),
                     "Delta_e = omega_0 + omega - omega_i", Delta_e, *omega_0 + *omega - *omega_i);
}

std::vector<std::string> LambdaSystemParams::regime_warnings(double n_bar, double margin) const {
  std::vector<std::string> out;
  const double delta_min = std::min({std::abs(delta_g1), std::abs(delta_g2), std::abs(delta_e1), std::abs(delta_e2)});
  const double omega_max = std::max({std::abs(Omega_g1), std::abs(Omega_g2), std::abs(Omega_e1), std::abs(Omega_e2)});
  const double lambda_max = std::max(std::abs(lambda_g), std::abs(lambda_e));
  if (omega_max > 0.0 && delta_min < margin * omega_max) {
    std::ostringstream os;
    os << "regime: min delta / max Omega = " << delta_min / omega_max << " (want delta >> Omega)";
    out.push_back(os.str());
  }
  if (n_bar > 0.0 && lambda_max > 0.0 && omega_max < margin * n_bar * lambda_max) {
    std::ostringstream os;
    os << "regime: Omega / (n_bar lambda) = " << omega_max / (n_bar * lambda_max)
       << " (want Omega >> n_bar lambda)";
    out.push_back(os.str());
  }
  return out;
}

std::optional<std::vector<double>> LambdaSystemParams::drive_frequencies() const {
  if (!omega_0 || !omega_i) return std::nullopt;
  return std::vector<double>{delta_g1 + *omega_i, *omega_i - delta_g2, *omega_i - *omega_0 - delta_e1,
                             delta_e2 + *omega_i - *omega_0};
}

EffectiveParams EffectiveParams::from(const LambdaSystemParams& p) {
  if (p.delta_e1 == 0.0 || p.delta_g1 == 0.0)
    throw UnphysicalParameterError("effective coupling needs nonzero delta_e1 and delta_g1");
  const double k = p.kappa();
  if (!(k >= 0.0 && k < 1.0))
    throw ConstraintViolation("0 <= kappa = delta_e1/delta_g1 < 1", "kappa = " + std::to_string(k));
  return EffectiveParams{std::sqrt(1.0 - k * k) * p.lambda_g * p.Omega_g1 / p.delta_e1, k};
}

LaserRateParams LaserRateParams::derive(double g, double gamma, double loss_C, double injection_K,
                                        double excite_p) {
  if (!(gamma > 0.0)) throw UnphysicalParameterError("gamma must be positive to derive gain and saturation");
  LaserRateParams r;
  r.injection_K = injection_K;
  r.excite_p = excite_p;
  r.pump_R = injection_K * excite_p;
  r.gamma = gamma;
  r.loss_C = loss_C;
  const double ratio2 = (g / gamma) * (g / gamma);
  r.gain_A = 2.0 * r.pump_R * ratio2;
  r.saturation_B = 4.0 * r.gain_A * ratio2;
  r.validate();
  return r;
}

void LaserRateParams::validate() const {
  require_rate(gain_A, "gain_A");
  require_rate(saturation_B, "saturation_B");
  require_rate(loss_C, "loss_C");
  require_rate(pump_R, "pump_R");
  require_rate(injection_K, "injection_K");
  require_rate(gamma, "gamma");
  if (!(excite_p >= 0.0 && excite_p <= 1.0))
    throw UnphysicalParameterError("excite_p must lie in [0, 1]");
  if (injection_K > 0.0)
    require_relation(close(pump_R, injection_K * excite_p, 1e-12), "pump_R = injection_K * excite_p", pump_R,
                     injection_K * excite_p);
  if (quality_Q && !(*quality_Q > 0.0)) throw UnphysicalParameterError("quality_Q must be positive");
}

void EngineeredReservoirParams::validate() const {
  if (!(Gamma > 0.0) || !std::isfinite(Gamma)) throw UnphysicalParameterError("Gamma must be positive");
  require_rate(Gamma_tilde, "Gamma_tilde");
}

// ---------------------------------------------------------------------------
// Hamiltonians

LambdaHamiltonian::LambdaHamiltonian(const LambdaSystemParams& params, const FockSpace& field)
    : p_(params), field_dim_(field.dim()) {
  const Matrix a = annihilation(field).matrix();
  const Matrix id = Matrix::Identity(field_dim_, field_dim_);
  ig_field_ = p_.lambda_g * embed_atom(3, kLevelI, kG, a);
  ie_field_ = p_.lambda_e * embed_atom(3, kLevelI, kE, a);
  ig_drive_ = embed_atom(3, kLevelI, kG, id);
  ie_drive_ = embed_atom(3, kLevelI, kE, id);
}

void LambdaHamiltonian::at(double t, Matrix& out) const {
  const cplx cg = p_.Omega_g1 * std::exp(-kI * (p_.delta_g1 * t)) + p_.Omega_g2 * std::exp(kI * (p_.delta_g2 * t));
  const cplx ce = p_.Omega_e1 * std::exp(kI * (p_.delta_e1 * t)) + p_.Omega_e2 * std::exp(-kI * (p_.delta_e2 * t));
  out.noalias() = std::exp(kI * (p_.Delta_g * t)) * ig_field_;
  out.noalias() += std::exp(-kI * (p_.Delta_e * t)) * ie_field_;
  out.noalias() += cg * ig_drive_;
  out.noalias() += ce * ie_drive_;
  out += out.adjoint().eval();
}

Matrix LambdaHamiltonian::at(double t) const {
  Matrix out(dim(), dim());
  at(t, out);
  return out;
}

double LambdaHamiltonian::max_frequency() const {
  return std::max({std::abs(p_.Delta_g), std::abs(p_.Delta_e), std::abs(p_.delta_g1), std::abs(p_.delta_g2),
                   std::abs(p_.delta_e1), std::abs(p_.delta_e2)});
}

std::optional<double> LambdaHamiltonian::period(int max_denominator) const {
  std::vector<double> freqs;
  auto add = [&](double f, bool present) {
    if (present && f != 0.0) freqs.push_back(std::abs(f));
  };
  add(p_.Delta_g, p_.lambda_g != 0.0);
  add(p_.Delta_e, p_.lambda_e != 0.0);
  add(p_.delta_g1, p_.Omega_g1 != 0.0);
  add(p_.delta_g2, p_.Omega_g2 != 0.0);
  add(p_.delta_e1, p_.Omega_e1 != 0.0);
  add(p_.delta_e2, p_.Omega_e2 != 0.0);
  if (freqs.empty()) return std::nullopt;
  const double f0 = freqs.front();
  std::vector<std::pair<long long, long long>> ratios;
  long long lcm = 1;
  for (double f : freqs) {
    auto r = rationalize(f / f0, max_denominator, 1e-12);
    if (!r) return std::nullopt;
    ratios.push_back(*r);
    lcm = std::lcm(lcm, r->second);
    if (lcm > 1000000) return std::nullopt;
  }
  long long g = 0;
  for (auto [p, q] : ratios) g = std::gcd(g, p * (lcm / q));
  const double fundamental = f0 * static_cast<double>(g) / static_cast<double>(lcm);
  return 2.0 * M_PI / fundamental;
}

Operator full_hamiltonian(const LambdaSystemParams& params, const FockSpace& field, double t) {
  return Operator(LambdaHamiltonian(params, field).at(t));
}

Operator effective_hamiltonian(const EffectiveParams& eff, const BogoliubovPair& pair) {
  Operator h = tensor(sigma_plus(), pair.A) + tensor(sigma_minus(), pair.A_dagger);
  return cplx(eff.g) * h;
}

Operator cavity_stark_shift(const LambdaSystemParams& params, const FockSpace& field) {
  const Matrix n = number(field).matrix();
  Matrix h = Matrix::Zero(2 * field.dim(), 2 * field.dim());
  if (params.Delta_e != 0.0) h += (params.lambda_e * params.lambda_e / params.Delta_e) * embed_atom(2, kE, kE, n);
  if (params.Delta_g != 0.0) h -= (params.lambda_g * params.lambda_g / params.Delta_g) * embed_atom(2, kG, kG, n);
  return Operator(std::move(h));
}

// ---------------------------------------------------------------------------
// Generators

LindbladGenerator::LindbladGenerator(Operator hamiltonian, std::vector<JumpChannel> channels)
    : dim_(hamiltonian.dim()) {
  h_eff_ = hamiltonian.matrix();
  for (auto& c : channels) {
    if (c.jump.dim() != dim_) throw InvalidShapeError("LindbladGenerator: jump operator dimension mismatch");
    if (!std::isfinite(c.rate) || c.rate < 0.0) throw UnphysicalParameterError("LindbladGenerator: rates must be non-negative");
    if (c.rate == 0.0) continue;
    const Matrix& l = c.jump.matrix();
    h_eff_ -= cplx(0.0, 0.5 * c.rate) * (l.adjoint() * l);
    jumps_.emplace_back(c.rate, l);
    jumps_adj_.push_back(l.adjoint());
  }
}

void LindbladGenerator::apply(const Matrix& rho, Matrix& out) const {
  out.noalias() = -kI * (h_eff_ * rho);
  out.noalias() += kI * (rho * h_eff_.adjoint());
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    Matrix tmp = jumps_[k].second * rho;
    out.noalias() += jumps_[k].first * (tmp * jumps_adj_[k]);
  }
}

Matrix dissipator(const Matrix& jump, const Matrix& rho, double rate) {
  const Matrix ldl = jump.adjoint() * jump;
  return rate * (jump * rho * jump.adjoint() - 0.5 * (ldl * rho + rho * ldl));
}

Matrix laser_rhs(const Matrix& rho, const LaserRateParams& rates, const BogoliubovPair& pair) {
  return LaserGenerator(rates, pair)(rho);
}

LaserGenerator::LaserGenerator(const LaserRateParams& rates, const BogoliubovPair& pair)
    : rates_(rates), pair_(pair) {
  const Matrix& A = pair_.A.matrix();
  const Matrix& Ad = pair_.A_dagger.matrix();
  n_ = A * Ad;
  n2_ = n_ * n_;
  aa_ = Ad * A;
}

void LaserGenerator::apply(const Matrix& rho, Matrix& out) const {
  const Matrix& A = pair_.A.matrix();
  const Matrix& Ad = pair_.A_dagger.matrix();
  out = Matrix::Zero(rho.rows(), rho.cols());
  if (rates_.gain_A != 0.0) out += rates_.gain_A * (Ad * rho * A - 0.5 * (n_ * rho + rho * n_));
  if (rates_.saturation_B != 0.0) {
    const Matrix nr = n_ * rho;
    const Matrix rn = rho * n_;
    Matrix sat = 0.25 * (n_ * (nr + 3.0 * rn)) + 0.25 * ((rn + 3.0 * nr) * n_) - Ad * (nr + rn) * A;
    out += (0.5 * rates_.saturation_B) * sat;
  }
  if (rates_.loss_C != 0.0) out += rates_.loss_C * (A * rho * Ad - 0.5 * (aa_ * rho + rho * aa_));
}

Matrix atom_step_rhs(const Matrix& rho_joint, const EffectiveParams& eff, double loss_C, double gamma,
                     const BogoliubovPair& pair) {
  const int n = pair.space.dim();
  if (rho_joint.rows() != 2 * n || rho_joint.cols() != 2 * n)
    throw InvalidShapeError("atom_step_rhs: expected a (2 x field) joint state");
  const Matrix h = effective_hamiltonian(eff, pair).matrix();
  const Matrix loss = tensor(Matrix(Matrix::Identity(2, 2)), pair.A.matrix());
  const Matrix decay = tensor(sigma_minus().matrix(), Matrix(Matrix::Identity(n, n)));
  Matrix out = -kI * (h * rho_joint - rho_joint * h);
  out += dissipator(loss, rho_joint, loss_C);
  out += dissipator(decay, rho_joint, gamma);
  return out;
}

AtomFieldGenerator::AtomFieldGenerator(const EffectiveParams& eff, double loss_C, double gamma,
                                       const BogoliubovPair& pair)
    : n_(pair.space.dim()), g_(eff.g), loss_(loss_C), gamma_(gamma) {
  require_rate(loss_C, "loss_C");
  require_rate(gamma, "gamma");
  const double s = 1.0 / std::sqrt(1.0 - pair.kappa * pair.kappa);
  up_.resize(n_ - 1);
  lo_.resize(n_ - 1);
  for (int i = 0; i + 1 < n_; ++i) {
    up_(i) = s * std::sqrt(i + 1.0);
    lo_(i) = s * pair.kappa * std::sqrt(i + 1.0);
  }
  // A^dag A of the truncated matrices: diagonal and second off-diagonal.
  d0_ = RealVector::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (i >= 1) d0_(i) += up_(i - 1) * up_(i - 1);
    if (i + 1 < n_) d0_(i) += lo_(i) * lo_(i);
  }
  d2_ = RealVector::Zero(std::max(0, n_ - 2));
  for (int i = 0; i + 2 < n_; ++i) d2_(i) = lo_(i) * up_(i + 1);
}

namespace {

// out = T x for tridiagonal T with super-diagonal sup and sub-diagonal sub.
void tri_left(const RealVector& sup, const RealVector& sub, const Eigen::Ref<const Matrix>& x,
              Eigen::Ref<Matrix> out) {
  const Eigen::Index m = x.rows() - 1;
  out.topRows(m).noalias() = sup.asDiagonal() * x.bottomRows(m);
  out.row(m).setZero();
  out.bottomRows(m).noalias() += sub.asDiagonal() * x.topRows(m);
}

// out = x T.
void tri_right(const RealVector& sup, const RealVector& sub, const Eigen::Ref<const Matrix>& x,
               Eigen::Ref<Matrix> out) {
  const Eigen::Index m = x.cols() - 1;
  out.leftCols(m).noalias() = x.rightCols(m) * sub.asDiagonal();
  out.col(m).setZero();
  out.rightCols(m).noalias() += x.leftCols(m) * sup.asDiagonal();
}

// out += c * (P x + x P) for the symmetric pentadiagonal P = (d0, d2).
void penta_anticomm(const RealVector& d0, const RealVector& d2, const Eigen::Ref<const Matrix>& x, cplx c,
                    Eigen::Ref<Matrix> out) {
  const Eigen::Index n = x.rows();
  out.noalias() += c * (d0.asDiagonal() * x);
  out.noalias() += c * (x * d0.asDiagonal());
  if (n > 2) {
    const Eigen::Index m = n - 2;
    out.topRows(m).noalias() += c * (d2.asDiagonal() * x.bottomRows(m));
    out.bottomRows(m).noalias() += c * (d2.asDiagonal() * x.topRows(m));
    out.leftCols(m).noalias() += c * (x.rightCols(m) * d2.asDiagonal());
    out.rightCols(m).noalias() += c * (x.leftCols(m) * d2.asDiagonal());
  }
}

}  // namespace

void AtomFieldGenerator::left_A(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
  tri_left(up_, lo_, x, out);
}

void AtomFieldGenerator::left_Ad(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
  tri_left(lo_, up_, x, out);
}

// out += loss * (A x A^dag - {A^dag A, x}/2)
void AtomFieldGenerator::loss_term(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out,
                                   Matrix& scratch) const {
  if (loss_ == 0.0) return;
  Matrix ax(n_, n_);
  left_A(x, ax);
  scratch.resize(n_, n_);
  tri_right(lo_, up_, ax, scratch);  // (A x) A^dag
  out += loss_ * scratch;
  penta_anticomm(d0_, d2_, x, cplx(-0.5 * loss_), out);
}

void AtomFieldGenerator::apply(const Matrix& rho, Matrix& out) const {
  const int n = n_;
  if (rho.rows() != 2 * n || rho.cols() != 2 * n) throw InvalidShapeError("AtomFieldGenerator: shape mismatch");
  out.resize(2 * n, 2 * n);
  const auto gg = rho.block(kG * n, kG * n, n, n);
  const auto ge = rho.block(kG * n, kE * n, n, n);
  const auto eg = rho.block(kE * n, kG * n, n, n);
  const auto ee = rho.block(kE * n, kE * n, n, n);
  auto o_gg = out.block(kG * n, kG * n, n, n);
  auto o_ge = out.block(kG * n, kE * n, n, n);
  auto o_eg = out.block(kE * n, kG * n, n, n);
  auto o_ee = out.block(kE * n, kE * n, n, n);

  Matrix t1(n, n), t2(n, n), scratch(n, n);
  const cplx mig = -kI * g_;

  // gg: -i g (A^dag rho_eg - rho_ge A) + gamma rho_ee
  left_Ad(eg, t1);
  tri_right(up_, lo_, ge, t2);
  o_gg = mig * (t1 - t2) + gamma_ * ee;
  loss_term(gg, o_gg, scratch);

  // ee: -i g (A rho_ge - rho_eg A^dag) - gamma rho_ee
  left_A(ge, t1);
  tri_right(lo_, up_, eg, t2);
  o_ee = mig * (t1 - t2) - gamma_ * ee;
  loss_term(ee, o_ee, scratch);

  // ge: -i g (A^dag rho_ee - rho_gg A^dag) - gamma/2 rho_ge
  left_Ad(ee, t1);
  tri_right(lo_, up_, gg, t2);
  o_ge = mig * (t1 - t2) - (0.5 * gamma_) * ge;
  loss_term(ge, o_ge, scratch);

  // eg: -i g (A rho_gg - rho_ee A) - gamma/2 rho_eg
  left_A(gg, t1);
  tri_right(up_, lo_, ee, t2);
  o_eg = mig * (t1 - t2) - (0.5 * gamma_) * eg;
  loss_term(eg, o_eg, scratch);
}

Matrix engineered_reservoir_rhs(const Matrix& rho, const EngineeredReservoirParams& res,
                                const BogoliubovPair& pair) {
  return engineered_reservoir_generator(res, pair)(rho);
}

LindbladGenerator engineered_reservoir_generator(const EngineeredReservoirParams& res,
                                                 const BogoliubovPair& pair) {
  // Gamma = 0 is allowed here (pure photon loss); configs go through validate().
  require_rate(res.Gamma, "Gamma");
  require_rate(res.Gamma_tilde, "Gamma_tilde");
  const int n = pair.space.dim();
  return LindbladGenerator(Operator::zero(n),
                           {JumpChannel{res.Gamma, pair.A}, JumpChannel{res.Gamma_tilde, annihilation(pair.space)}});
}

}  // namespace svl
