#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chstab/basis.hpp"
#include "chstab/types.hpp"

namespace chstab {

// Physical coefficients and the constants derived from them after the
// sigma = alpha0 (theta + l0 phi) change of unknowns.
struct PhysParams {
  double nu = 1.0;
  double l0 = 1.0;
  double gamma0 = 1.0;
  double fbar = 0.0;  // mean of F''(phi_inf) over the domain

  double alpha0 = 1.0;  // sqrt(gamma0 / l0)
  double gamma = 1.0;   // alpha0 * l0
  double l = 1.0;       // gamma0 * l0
  double f_l = 1.0;     // fbar + l
};

PhysParams derive_params(double nu, double l0, double gamma0, double fbar);

// (gamma^2 - F_l) / nu. A Neumann eigenvalue of -Delta equal to this enlarges
// the zero eigenspace.
double lambda_bar(const PhysParams& p);

// Stationary profile. phi_inf is either a constant or values on the
// collocation grid of a Transform; theta_inf is constant.
class Equilibrium {
 public:
  static Equilibrium constant(double phi, double theta = 0.0);
  static Equilibrium tabulated(Vector phi_grid, double theta = 0.0);

  bool is_constant() const { return !table_.has_value(); }
  double phi_constant() const { return phi_; }
  const Vector& phi_table() const { return *table_; }
  double theta() const { return theta_; }

  // phi_inf sampled on the transform grid.
  Vector phi_on_grid(const Transform& transform) const;
  // phi_inf in Neumann coefficients (exact for constants, projected otherwise).
  Vector phi_coefficients(const ModeSet& modes, const Transform& transform) const;

 private:
  Equilibrium(double phi, std::optional<Vector> table, double theta)
      : phi_(phi), table_(std::move(table)), theta_(theta) {}

  double phi_;
  std::optional<Vector> table_;
  double theta_;
};

// F(phi) = (phi^2 - 1)^2 / 4
inline double potential_d1(double phi) { return phi * phi * phi - phi; }
inline double potential_d2(double phi) { return 3.0 * phi * phi - 1.0; }

// Mean of F''(phi_inf) over the domain.
double effective_slope(const Equilibrium& eq, const ModeSet& modes);

// Restriction of the linearized operator to span{(e_k, 0), (0, e_k)}:
//   [[nu mu^2 - F_l mu, gamma mu], [gamma mu, -mu]].
Eigen::Matrix2d mode_block(double mu, const PhysParams& p);

struct RootPair {
  double minus = 0.0;
  double plus = 0.0;
};

// Roots of X^2 + [(F_l + 1) mu - nu mu^2] X - nu mu^3 + (F_l - gamma^2) mu^2,
// which are the eigenvalues of mode_block(mu). Requires mu < 0.
RootPair quadratic_roots(double mu, const PhysParams& p);

enum class EntryKind { zero_sym, zero_anti, negative };

const char* to_string(EntryKind kind);

// Eigenvector (phi_j, psi_j) = (coeff_phi e_k, coeff_psi e_k) of the linearized
// operator with eigenvalue lambda <= 0. Zero entries live on the constant mode.
struct UnstableEntry {
  double lambda = 0.0;
  EntryKind kind = EntryKind::negative;
  int mode = 0;  // position k in the ModeSet
  double coeff_phi = 0.0;
  double coeff_psi = 0.0;
};

// lambda_1 <= ... <= lambda_{N-2} < 0 = lambda_{N-1} = lambda_N, with
// zero_sym at N-1 and zero_anti at N.
struct UnstableBasis {
  std::vector<UnstableEntry> entries;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(entries.size()); }
  const UnstableEntry& operator[](int j) const { return entries[static_cast<size_t>(j)]; }
  Vector lambdas() const;
  // Entry j as a 2K state vector.
  Vector state(int j, int modes) const;
  // N x 2K matrix whose rows are the entries as state vectors.
  Matrix projector_rows(int modes) const;
};

UnstableBasis unstable_basis(const ModeSet& modes, const PhysParams& p);

struct AssumptionTolerances {
  double h0 = 1e-8;      // relative, lambda_bar vs -mu_j
  double h1 = 1e-8;      // relative, distinctness of negative lambdas
  double trace = 1e-10;  // sup |psi_j| on Gamma_1
};

struct AssumptionReport {
  bool h0_ok = true;
  double lambda_bar = 0.0;
  double h0_nearest_distance = 0.0;  // min |lambda_bar + mu_j| over mu_j < 0
  int h0_nearest_mode = -1;

  bool h1_ok = true;
  double h1_min_gap = 0.0;  // inf when fewer than two negative lambdas

  bool traces_ok = true;
  std::vector<double> trace_sup;  // per entry

  bool necessary_condition = false;  // F_l - gamma^2 <= 0

  bool ok() const { return h0_ok && h1_ok && traces_ok; }
};

AssumptionReport check_assumptions(const ModeSet& modes, const PhysParams& p,
                                   const UnstableBasis& basis,
                                   const AssumptionTolerances& tol = {});

}  // namespace chstab
