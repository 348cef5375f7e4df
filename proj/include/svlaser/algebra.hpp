#pragma once

// Bogoliubov-transformed field operators A = (a + kappa a^dag)/sqrt(1 - kappa^2)
// and the generalized number basis {|n>_A} on which A, A^dag act exactly like
// a, a^dag act on the Fock basis.
//
// Phase convention: the first nonzero Fock amplitude of the generalized vacuum
// (and of every closed-form basis state) is real and positive. Ladder states
// inherit their phase from repeated application of A^dag.

#include <vector>

#include "svlaser/hilbert.hpp"

namespace svl {

struct BogoliubovPair {
  double kappa;
  FockSpace space;
  Operator A;
  Operator A_dagger;
};

// Throws UnphysicalParameterError unless 0 <= kappa < 1.
BogoliubovPair build_bogoliubov(double kappa, const FockSpace& space);

// atanh(kappa), the squeeze parameter r with S(r)|0> = |0>_A.
double squeeze_parameter(double kappa);

// Normalized kernel of A from the two-term recursion
//   c_{n+1} = -kappa sqrt(n/(n+1)) c_{n-1},  c_1 = 0.
// Throws TruncationError if the top levels carry more than kTailLimit.
StateVector generalized_vacuum(const BogoliubovPair& pair);

// (A^dag)^n |0>_A / sqrt(n!), renormalized against truncation loss.
StateVector generalized_number_state(const BogoliubovPair& pair, int n);

// Direct evaluation of the even/odd double sums for |n>_A in the Fock basis,
// accumulated in log space with sign tracking so no factorial overflows.
StateVector closed_form_number_state(double kappa, int n, const FockSpace& space);

// D_A(alpha)|0>_A = exp(alpha A^dag - alpha* A)|0>_A.
StateVector generalized_coherent(const BogoliubovPair& pair, cplx alpha);

struct GeneralizedBasis {
  double kappa;
  int n_max;
  std::vector<StateVector> states;  // |0>_A .. |n_max>_A
};

GeneralizedBasis build_generalized_basis(const BogoliubovPair& pair, int n_max);

Matrix gram_matrix(const GeneralizedBasis& basis);

// Largest residual of the three ladder relations over the stored states:
//   A^dag A |n>_A = n |n>_A,  A^dag |n>_A = sqrt(n+1) |n+1>_A,  A |n>_A = sqrt(n) |n-1>_A.
// The raising relation is checked for n < n_max only.
struct LadderResiduals {
  double number;
  double raising;
  double lowering;
};

LadderResiduals ladder_residuals(const BogoliubovPair& pair, const GeneralizedBasis& basis);

// Smallest Fock dimension whose generalized vacuum leaves at most `tail` in
// the monitored top levels, with `headroom` extra levels for ladder states.
int recommended_dim(double kappa, double tail = 1e-20, int headroom = 16);

}  // namespace svl
