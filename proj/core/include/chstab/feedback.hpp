#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chstab/basis.hpp"
#include "chstab/spectrum.hpp"
#include "chstab/types.hpp"

namespace chstab {

// eta_1 < eta_2 = eta_1 + 1/(N-1) < ... < eta_N = eta_1 + 1.
struct EtaLadder {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int k) const { return values[static_cast<size_t>(k)]; }
};

EtaLadder eta_ladder(double eta1, int n);

// Two variants of the feedback law.
//   shifted: u = <Lambda_S A Z, psi>_N, Lambda_{eta_k} with the delta shift.
//   scaled:  u = sum_k <A Z, alpha0 Lambda'_{eta_k} psi>_N, last slot unshifted.
// The coupler A is always built from the shifted Lambda_{eta_k}.
enum class FeedbackForm { shifted, scaled };

struct Convention {
  FeedbackForm form = FeedbackForm::shifted;
  int sign = -1;

  bool alpha0_factor() const { return form == FeedbackForm::scaled; }
  bool shifted_gain() const { return form == FeedbackForm::shifted; }
  // "shifted-", "scaled+", ...
  std::string name() const;
  static Convention parse(std::string_view text);
};

// psi_j|Gamma_1 = coeff * e_mode|Gamma_1.
struct TraceRep {
  int mode = 0;
  double coeff = 0.0;
};

struct SynthesisOptions {
  std::optional<double> eta1;
  std::optional<double> delta;
  Convention convention;
  bool override_assumptions = false;
  int max_eta_retries = 8;
};

struct FeedbackLaw {
  int n = 0;
  double alpha0 = 1.0;
  double delta = 0.0;
  EtaLadder ladder;
  int eta_retries = 0;
  double worst_lift_condition = 0.0;

  Vector lambdas;                     // lambda_1 .. lambda_N
  Vector shifted;                     // lambda_1 .. lambda_{N-1}, lambda_N + delta
  std::vector<Vector> rung_diagonals;  // diagonals of Lambda_{eta_k} used in u
  Vector lambda_s;                    // diagonal of their sum
  Matrix gram;                        // B
  Matrix coupler_sum;                 // B_1 + ... + B_N
  Matrix coupler;                     // A
  double coupler_condition = 0.0;
  std::vector<TraceRep> psi_traces;
  Convention convention;

  // sign * (alpha0 if the scaled form is used, else 1)
  double gain_scale() const;
};

// B_ij = <psi_i, psi_j>_{L^2(Gamma_1)}.
Matrix gram_matrix(const UnstableBasis& basis, const ModeSet& modes);

Vector shifted_lambdas(const UnstableBasis& basis, double delta);

// Diagonal of Lambda_{eta}: 1 / (eta - lambda_j).
Vector rung_diagonal(double eta, const Vector& lambdas);

struct Coupler {
  Matrix sum;      // sum_k Lambda_k B Lambda_k
  Matrix inverse;  // A
  double condition = 0.0;
};

// Inverts B_1 + ... + B_N. Throws SynthesisError when the sum is not
// positive definite or its condition number exceeds 1e12.
Coupler coupler_matrix(const Matrix& gram, const Vector& shifted, const EtaLadder& ladder);

// Builds the full law. Picks eta_1 = 1 + 2 max|lambda_j| unless given and
// doubles it until every rung's lifting system is well conditioned.
FeedbackLaw synthesize(const ModeSet& modes, const PhysParams& p,
                       const UnstableBasis& basis, const AssumptionReport& report,
                       const SynthesisOptions& options = {});

// Z_j = <(y, z), (phi_j, psi_j)>.
Vector modal_coordinates(const Vector& state, const UnstableBasis& basis, int modes);

struct BoundaryControl {
  Vector weights;  // u = sum_i w_i psi_i|Gamma_1
  double norm = 0.0;
};

BoundaryControl eval_feedback(const FeedbackLaw& law, const Vector& z);
// Same control assembled rung by rung (sum of the per-rung feedbacks u_k).
BoundaryControl eval_feedback_summed(const FeedbackLaw& law, const Vector& z);

// N x 2K matrix mapping a state to control weights.
Matrix feedback_gain(const FeedbackLaw& law, const UnstableBasis& basis, int modes);

// Control with zero weights; used for uncontrolled runs.
FeedbackLaw zero_law(const FeedbackLaw& law);

}  // namespace chstab
