#pragma once

#include <vector>

#include "svlaser/hilbert.hpp"

namespace svl {

// Linear map rho -> d rho / dt on dim x dim matrices.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual int dim() const = 0;
  // Writes L(rho) into out (resized as needed). Must not alias rho.
  virtual void apply(const Matrix& rho, Matrix& out) const = 0;

  Matrix operator()(const Matrix& rho) const {
    Matrix out;
    apply(rho, out);
    return out;
  }
};

struct JumpChannel {
  double rate;
  Operator jump;
};

// -i[H, rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2), dense.
class LindbladGenerator final : public Generator {
 public:
  LindbladGenerator(Operator hamiltonian, std::vector<JumpChannel> channels);

  int dim() const override { return dim_; }
  void apply(const Matrix& rho, Matrix& out) const override;

 private:
  int dim_;
  Matrix h_eff_;  // H - (i/2) sum rate L^dag L
  std::vector<std::pair<double, Matrix>> jumps_;
  std::vector<Matrix> jumps_adj_;
};

// rate * (L rho L^dag - {L^dag L, rho}/2)
Matrix dissipator(const Matrix& jump, const Matrix& rho, double rate = 1.0);

}  // namespace svl
