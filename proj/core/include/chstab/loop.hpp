#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "chstab/basis.hpp"
#include "chstab/feedback.hpp"
#include "chstab/spectrum.hpp"
#include "chstab/types.hpp"

namespace chstab {

// d/dt (y^j, z^j) = -mode_block(mu_j) (y^j, z^j); block diagonal over modes.
Matrix assemble_open_loop(const ModeSet& modes, const PhysParams& p);

// 2K x N: column i holds alpha0 <psi_i, e_j>_0 in z-row j, zeros in y-rows.
Matrix assemble_input_coupling(const ModeSet& modes, const PhysParams& p,
                               const UnstableBasis& basis);

struct ClosedLoopSystem {
  int modes = 0;
  Matrix open_loop;
  Matrix input_coupling;
  Matrix gain;  // N x 2K, state -> control weights
  Matrix closed;
};

ClosedLoopSystem assemble_closed_loop(const ModeSet& modes, const PhysParams& p,
                                      const FeedbackLaw& law, const UnstableBasis& basis);
// Same structure with a zero gain.
ClosedLoopSystem assemble_uncontrolled(const ModeSet& modes, const PhysParams& p,
                                       const UnstableBasis& basis);

enum class SpectralClass { unstable, neutral, stable };
const char* to_string(SpectralClass c);

struct SpectralEntry {
  std::complex<double> value;
  SpectralClass cls = SpectralClass::stable;
};

struct SpectralReport {
  std::vector<SpectralEntry> eigenvalues;  // sorted by real part, descending
  int n_unstable = 0;
  int n_neutral = 0;
  int n_stable = 0;
  double matrix_norm = 0.0;  // Frobenius
  double tolerance = 0.0;    // 1e-10 * matrix_norm
  // Largest real part once the neutral eigenvalue closest to zero (the
  // conserved mass) is set aside.
  double abscissa = 0.0;

  double decay_margin() const { return -abscissa; }
};

SpectralReport spectral_report(const Matrix& m, double relative_tol = 1e-10);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> weights;
  std::vector<double> y_norm;
  std::vector<double> z_norm;
  std::vector<double> norm;

  int size() const { return static_cast<int>(times.size()); }
  void record(double t, const Vector& x, Vector w, int modes);
};

// One-step propagator exp(C dt). Rows of C that vanish identically (conserved
// coordinates) are kept as exact unit rows.
Matrix exact_propagator(const Matrix& c, double dt);

// First time after which every trajectory started with zero conserved
// coordinates stays below `ratio` times its initial norm, i.e. the largest
// singular value of exp(C t) on those states. Sampled every `resolution`;
// empty if the gain has not settled by t_max.
std::optional<double> settling_time(const Matrix& c, double ratio, double resolution = 0.05,
                                    double t_max = 1e3);

// Throws DivergenceError if the state or its norm overflows.
Trajectory integrate_linear(const ClosedLoopSystem& system, const Vector& state0,
                            double t_final, double dt);

struct NonlinearOptions {
  double dt = 1e-3;
  int max_halvings = 4;
  double blowup_factor = 1e6;
  // Keep every k-th step; 0 picks k so that at most ~4000 samples are kept.
  int record_every = 0;
};

// Nonlinear closed loop in fluctuation variables:
//   y_t + nu Delta^2 y - Delta[F'(y + phi_inf) - F'(phi_inf)] - l Delta y + gamma Delta z = 0
//   z_t - Delta z + gamma Delta y = 0
// with the boundary feedback. The linear part is the assembled closed loop;
// the rest is evaluated pseudospectrally on the dealiased grid.
class NonlinearModel {
 public:
  NonlinearModel(const ModeSet& modes, const PhysParams& p, const FeedbackLaw& law,
                 const UnstableBasis& basis, const Equilibrium& eq, bool controlled = true);

  const ClosedLoopSystem& linear() const { return linear_; }
  int modes() const { return modes_.size(); }

  // Contribution beyond the linear closed loop (y-rows only).
  Vector remainder(const Vector& state) const;
  // Full vector field, assembled mode by mode from the equations rather than
  // from the closed-loop matrix.
  Vector field(const Vector& state) const;
  Vector control_weights(const Vector& state) const;

 private:
  ModeSet modes_;
  PhysParams params_;
  FeedbackLaw law_;
  UnstableBasis basis_;
  bool controlled_;
  Transform transform_;
  Vector phi_grid_;
  Vector f1_equilibrium_;  // F'(phi_inf) on the grid
  Vector mu_;
  ClosedLoopSystem linear_;
};

Trajectory integrate_nonlinear(const NonlinearModel& model, const Vector& state0,
                               double t_final, const NonlinearOptions& options = {});

Trajectory integrate_nonlinear(const ModeSet& modes, const PhysParams& p,
                               const FeedbackLaw& law, const UnstableBasis& basis,
                               const Equilibrium& eq, const Vector& state0, double t_final,
                               double dt);

// Central finite-difference Jacobian of model.field at `at`.
Matrix finite_difference_jacobian(const NonlinearModel& model, const Vector& at, double h);

// Neumann coefficients of the stationary pair.
struct EquilibriumCoefficients {
  Vector phi;
  Vector theta;
};

EquilibriumCoefficients equilibrium_coefficients(const Equilibrium& eq, const ModeSet& modes);

struct PhysicalFields {
  Vector theta;
  Vector phi;
};

// y = phi - phi_inf, z = alpha0 (theta + l0 phi) - sigma_inf.
Vector to_fluctuation(const PhysicalFields& fields, const EquilibriumCoefficients& eq,
                      const PhysParams& p);
PhysicalFields from_fluctuation(const Vector& state, const EquilibriumCoefficients& eq,
                                const PhysParams& p);

struct FitWindow {
  double t0 = 0.0;
  double t1 = 0.0;
};

// Least-squares line through log ||state(t)||^2 on the window:
// ||state(t)||^2 ~ C1 exp(-C2 t) ||state(0)||^2.
struct DecayFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
  FitWindow window;
  int samples = 0;
};

DecayFit fit_decay(const Trajectory& trajectory, FitWindow window);

// Random state with zero y-mass (y^1 = 0) and the given L^2 norm.
Vector random_mass_matched(int modes, double amplitude, std::mt19937_64& rng);

}  // namespace chstab
