#include "chstab/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "chstab/errors.hpp"
#include "chstab/lifting.hpp"

namespace chstab {

std::string Convention::name() const {
  std::string s = form == FeedbackForm::shifted ? "shifted" : "scaled";
  s += sign < 0 ? '-' : '+';
  return s;
}

Convention Convention::parse(std::string_view text) {
  Convention c;
  if (text.empty()) throw ConfigError("empty convention");
  const char last = text.back();
  std::string_view form = text;
  if (last == '+' || last == '-') {
    c.sign = last == '+' ? 1 : -1;
    form.remove_suffix(1);
  }
  if (!form.empty() && (form.back() == ',' || form.back() == ':')) form.remove_suffix(1);
  if (form == "shifted") {
    c.form = FeedbackForm::shifted;
  } else if (form == "scaled") {
    c.form = FeedbackForm::scaled;
  } else {
    throw ConfigError("unknown convention '" + std::string(text) +
                      "' (expected shifted+, shifted-, scaled+ or scaled-)");
  }
  return c;
}

double FeedbackLaw::gain_scale() const {
  return convention.sign * (convention.alpha0_factor() ? alpha0 : 1.0);
}

EtaLadder eta_ladder(double eta1, int n) {
  if (n < 2) throw ConfigError("eta ladder needs N >= 2");
  if (!(eta1 > 0.0) || !std::isfinite(eta1)) throw ConfigError("eta_1 must be positive");
  EtaLadder ladder;
  ladder.values.reserve(static_cast<size_t>(n));
  ladder.values.push_back(eta1);
  for (int k = 2; k <= n; ++k) ladder.values.push_back(eta1 + 1.0 / (n - k + 1));
  return ladder;
}

Matrix gram_matrix(const UnstableBasis& basis, const ModeSet& modes) {
  const int n = basis.size();
  Matrix b(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = basis[i].coeff_psi * basis[j].coeff_psi *
                       modes.trace_pairing(basis[i].mode, basis[j].mode);
      b(i, j) = v;
      b(j, i) = v;
    }
  }
  return b;
}

Vector shifted_lambdas(const UnstableBasis& basis, double delta) {
  Vector s = basis.lambdas();
  s(s.size() - 1) += delta;
  return s;
}

Vector rung_diagonal(double eta, const Vector& lambdas) {
  return (eta - lambdas.array()).inverse().matrix();
}

Coupler coupler_matrix(const Matrix& gram, const Vector& shifted, const EtaLadder& ladder) {
  const int n = static_cast<int>(gram.rows());
  if (gram.cols() != n || shifted.size() != n || ladder.size() != n) {
    throw ConfigError("coupler_matrix: dimension mismatch");
  }
  Coupler c;
  c.sum = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const Vector d = rung_diagonal(ladder[k], shifted);
    c.sum.noalias() += d.asDiagonal() * gram * d.asDiagonal();
  }
  c.sum = 0.5 * (c.sum + c.sum.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> es(c.sum, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  c.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || c.condition > kMaxCondition) {
    std::ostringstream os;
    os << "B_1 + ... + B_N is singular or ill-conditioned (condition " << c.condition
       << "); likely a psi_j trace vanishing on Gamma_1 or repeated eigenvalues";
    throw SynthesisError(os.str());
  }
  // The sum is typically conditioned around 1e6 to 1e7; solving in extended
  // precision keeps A within rounding of the exact inverse.
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::LLT<MatrixL> llt(c.sum.cast<long double>());
  MatrixL inv = llt.solve(MatrixL::Identity(n, n));
  inv = (0.5L * (inv + inv.transpose())).eval();
  c.inverse = inv.cast<double>();
  return c;
}

FeedbackLaw synthesize(const ModeSet& modes, const PhysParams& p,
                       const UnstableBasis& basis, const AssumptionReport& report,
                       const SynthesisOptions& options) {
  if (!report.ok() && !options.override_assumptions) {
    std::ostringstream os;
    os << "assumption check failed:";
    if (!report.h0_ok) os << " (H0) lambda_bar = " << report.lambda_bar << " hits a Neumann eigenvalue;";
    if (!report.h1_ok) os << " (H1) repeated negative eigenvalue;";
    if (!report.traces_ok) os << " a psi_j trace vanishes on Gamma_1;";
    throw AssumptionError(os.str());
  }
  const int n = basis.size();
  if (n < 2) throw ConfigError("unstable basis must hold the two zero entries");

  const double max_abs = basis.lambdas().cwiseAbs().maxCoeff();
  double eta1 = options.eta1.value_or(1.0 + 2.0 * max_abs);
  if (!(eta1 > max_abs)) throw ConfigError("eta_1 must exceed every |lambda_j|");

  FeedbackLaw law;
  law.n = n;
  law.alpha0 = p.alpha0;
  law.convention = options.convention;
  law.lambdas = basis.lambdas();

  const int retries = options.eta1 ? 0 : options.max_eta_retries;
  bool ok = false;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const double delta = options.delta.value_or(std::min(1.0, eta1 / 2.0));
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    const EtaLadder ladder = eta_ladder(eta1, n);
    double worst = 0.0;
    bool all = true;
    for (double eta : ladder.values) {
      if (eta - delta <= 0.0) {
        all = false;
        break;
      }
      const LiftSystem lift = assemble_lift(modes, p, basis, eta, delta);
      worst = std::max(worst, lift.condition());
      if (!lift.solvable()) {
        all = false;
        break;
      }
    }
    if (all) {
      law.delta = delta;
      law.ladder = ladder;
      law.eta_retries = attempt;
      law.worst_lift_condition = worst;
      ok = true;
      break;
    }
    eta1 *= 2.0;
  }
  if (!ok) throw SynthesisError("no eta_1 gave well-posed lifting systems; eta insufficient");

  law.shifted = shifted_lambdas(basis, law.delta);
  law.gram = gram_matrix(basis, modes);
  const Coupler coupler = coupler_matrix(law.gram, law.shifted, law.ladder);
  law.coupler_sum = coupler.sum;
  law.coupler = coupler.inverse;
  law.coupler_condition = coupler.condition;

  const Vector& gain_lambdas = law.convention.shifted_gain() ? law.shifted : law.lambdas;
  law.lambda_s = Vector::Zero(n);
  for (double eta : law.ladder.values) {
    law.rung_diagonals.push_back(rung_diagonal(eta, gain_lambdas));
    law.lambda_s += law.rung_diagonals.back();
  }

  law.psi_traces.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) law.psi_traces.push_back({basis[j].mode, basis[j].coeff_psi});
  return law;
}

Vector modal_coordinates(const Vector& state, const UnstableBasis& basis, int modes) {
  const StateLayout layout{modes};
  if (state.size() != layout.size()) throw ConfigError("state size does not match 2K");
  Vector z(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const UnstableEntry& e = basis[j];
    z(j) = e.coeff_phi * state(layout.y(e.mode)) + e.coeff_psi * state(layout.z(e.mode));
  }
  return z;
}

namespace {

BoundaryControl make_control(const FeedbackLaw& law, Vector w) {
  BoundaryControl u;
  u.norm = std::sqrt(std::max(0.0, w.dot(law.gram * w)));
  u.weights = std::move(w);
  return u;
}

}  // namespace

BoundaryControl eval_feedback(const FeedbackLaw& law, const Vector& z) {
  if (z.size() != law.n) throw ConfigError("modal vector size does not match N");
  return make_control(law, law.gain_scale() * law.lambda_s.asDiagonal() * (law.coupler * z));
}

BoundaryControl eval_feedback_summed(const FeedbackLaw& law, const Vector& z) {
  if (z.size() != law.n) throw ConfigError("modal vector size does not match N");
  const Vector az = law.coupler * z;
  Vector w = Vector::Zero(law.n);
  for (const Vector& d : law.rung_diagonals) {
    w += law.gain_scale() * d.asDiagonal() * az;
  }
  return make_control(law, std::move(w));
}

Matrix feedback_gain(const FeedbackLaw& law, const UnstableBasis& basis, int modes) {
  return law.gain_scale() * law.lambda_s.asDiagonal() * law.coupler *
         basis.projector_rows(modes);
}

FeedbackLaw zero_law(const FeedbackLaw& law) {
  FeedbackLaw out = law;
  out.coupler.setZero();
  return out;
}

}  // namespace chstab
