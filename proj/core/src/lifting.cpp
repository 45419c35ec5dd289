#include "chstab/lifting.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "chstab/errors.hpp"

namespace chstab {

LiftSystem::LiftSystem(Matrix matrix, Matrix source, double eta, double delta)
    : matrix_(std::move(matrix)),
      source_(std::move(source)),
      eta_(eta),
      delta_(delta),
      lu_(matrix_) {
  const double rcond = lu_.rcond();
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
}

bool LiftSystem::solvable() const {
  return std::isfinite(condition_) && condition_ < kMaxCondition;
}

Vector LiftSystem::solve(const Vector& rhs) const {
  if (!solvable()) {
    std::ostringstream os;
    os << "lifting system singular (condition " << condition_ << ") at eta = " << eta_
       << "; eta insufficient";
    throw SynthesisError(os.str());
  }
  return lu_.solve(rhs);
}

LiftSystem assemble_lift(const ModeSet& modes, const PhysParams& p,
                         const UnstableBasis& basis, double eta, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (basis.size() < 2) throw ConfigError("unstable basis must hold the two zero entries");
  const int n = basis.size();
  if (std::abs(eta - basis[n - 1].lambda - delta) == 0.0) {
    throw ConfigError("eta - lambda_N - delta must not vanish");
  }

  const int k = modes.size();
  const StateLayout layout{k};
  Matrix m = Matrix::Zero(layout.size(), layout.size());
  for (int j = 0; j < k; ++j) {
    const Eigen::Matrix2d blk = mode_block(modes[j].mu, p);
    const int iy = layout.y(j);
    const int iz = layout.z(j);
    m(iy, iy) = blk(0, 0);
    m(iy, iz) = blk(0, 1);
    m(iz, iy) = blk(1, 0);
    m(iz, iz) = blk(1, 1);
  }
  m.diagonal().array() += eta;
  for (int j = 0; j < n; ++j) {
    const Vector v = basis.state(j, k);
    double weight = 2.0 * basis[j].lambda;
    if (j == n - 1) weight += delta;
    if (weight != 0.0) m.noalias() -= weight * (v * v.transpose());
  }

  Matrix source = Matrix::Zero(layout.size(), k);
  source.bottomRows(k) = p.alpha0 * modes.trace_gram();

  return LiftSystem(std::move(m), std::move(source), eta, delta);
}

Vector apply_lift(const LiftSystem& system, const Vector& trace_coeffs) {
  if (trace_coeffs.size() != system.source().cols()) {
    throw ConfigError("apply_lift: trace coefficient count does not match K");
  }
  return system.solve(system.source() * trace_coeffs);
}

Vector trace_projections(const ModeSet& modes, const UnstableBasis& basis,
                         const Vector& trace_coeffs) {
  if (trace_coeffs.size() != modes.size()) {
    throw ConfigError("trace coefficient count does not match K");
  }
  Vector out(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    out(j) = basis[j].coeff_psi * modes.trace_gram().row(basis[j].mode).dot(trace_coeffs);
  }
  return out;
}

Vector verify_lift_identity(const LiftSystem& system, const ModeSet& modes,
                            const PhysParams& p, const UnstableBasis& basis,
                            const Vector& trace_coeffs) {
  const Vector lifted = apply_lift(system, trace_coeffs);
  const Vector rhs = trace_projections(modes, basis, trace_coeffs);
  const int n = basis.size();
  Vector residual(n);
  for (int j = 0; j < n; ++j) {
    double denom = system.eta() - basis[j].lambda;
    if (j == n - 1) denom -= system.delta();
    const double lhs = basis.state(j, modes.size()).dot(lifted);
    residual(j) = std::abs(lhs - p.alpha0 / denom * rhs(j));
  }
  return residual;
}

}  // namespace chstab
