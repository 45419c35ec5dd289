#pragma once

#include <Eigen/LU>

#include "chstab/basis.hpp"
#include "chstab/spectrum.hpp"
#include "chstab/types.hpp"

namespace chstab {

// Neumann lifting D_eta in truncated spectral coordinates: for boundary datum
// a on Gamma_1, D_eta a = (y, z) solves
//   (A + eta I - 2 sum_j lambda_j P_j - delta P_N) (y, z) = source(a),
// where P_j projects onto (phi_j, psi_j). The source has alpha0 <a, e_j>_0 in
// every z-row and exact zeros in the y-rows (the flux of Delta y and the
// gamma Delta z coupling cancel since gamma alpha0 = gamma0).
class LiftSystem {
 public:
  LiftSystem(Matrix matrix, Matrix source, double eta, double delta);

  double eta() const { return eta_; }
  double delta() const { return delta_; }
  const Matrix& matrix() const { return matrix_; }
  // 2K x K map from trace coefficients a (a = sum_k a_k e_k|Gamma_1) to the
  // right-hand side.
  const Matrix& source() const { return source_; }
  // 1-norm condition estimate.
  double condition() const { return condition_; }
  bool solvable() const;

  Vector solve(const Vector& rhs) const;

 private:
  Matrix matrix_;
  Matrix source_;
  double eta_;
  double delta_;
  Eigen::PartialPivLU<Matrix> lu_;
  double condition_;
};

inline constexpr double kMaxCondition = 1e12;

LiftSystem assemble_lift(const ModeSet& modes, const PhysParams& p,
                         const UnstableBasis& basis, double eta, double delta);

// D_eta a for trace coefficients a over {e_k|Gamma_1}.
Vector apply_lift(const LiftSystem& system, const Vector& trace_coeffs);

// |<D_eta a, (phi_j, psi_j)> - alpha0 / (eta - lambda~_j) <a, psi_j>_0| for
// j = 1..N, with lambda~_N = lambda_N + delta.
Vector verify_lift_identity(const LiftSystem& system, const ModeSet& modes,
                            const PhysParams& p, const UnstableBasis& basis,
                            const Vector& trace_coeffs);

// <a, psi_j>_0 for every unstable entry.
Vector trace_projections(const ModeSet& modes, const UnstableBasis& basis,
                         const Vector& trace_coeffs);

}  // namespace chstab
