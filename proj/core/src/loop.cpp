#include "chstab/loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "chstab/errors.hpp"

namespace chstab {

Matrix assemble_open_loop(const ModeSet& modes, const PhysParams& p) {
  const StateLayout layout{modes.size()};
  Matrix a = Matrix::Zero(layout.size(), layout.size());
  for (int j = 0; j < modes.size(); ++j) {
    const Eigen::Matrix2d blk = -mode_block(modes[j].mu, p);
    a(layout.y(j), layout.y(j)) = blk(0, 0);
    a(layout.y(j), layout.z(j)) = blk(0, 1);
    a(layout.z(j), layout.y(j)) = blk(1, 0);
    a(layout.z(j), layout.z(j)) = blk(1, 1);
  }
  return a;
}

Matrix assemble_input_coupling(const ModeSet& modes, const PhysParams& p,
                               const UnstableBasis& basis) {
  const StateLayout layout{modes.size()};
  Matrix b = Matrix::Zero(layout.size(), basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    const UnstableEntry& e = basis[i];
    for (int j = 0; j < modes.size(); ++j) {
      b(layout.z(j), i) = p.alpha0 * e.coeff_psi * modes.trace_pairing(e.mode, j);
    }
  }
  return b;
}

ClosedLoopSystem assemble_closed_loop(const ModeSet& modes, const PhysParams& p,
                                      const FeedbackLaw& law, const UnstableBasis& basis) {
  if (law.n != basis.size()) {
    throw ConfigError("feedback law and unstable basis have different N");
  }
  for (int j = 0; j < law.n; ++j) {
    const TraceRep& t = law.psi_traces[static_cast<size_t>(j)];
    if (t.mode != basis[j].mode || t.coeff != basis[j].coeff_psi || t.mode >= modes.size()) {
      throw ConfigError("feedback law was synthesized against a different unstable basis");
    }
  }
  ClosedLoopSystem s;
  s.modes = modes.size();
  s.open_loop = assemble_open_loop(modes, p);
  s.input_coupling = assemble_input_coupling(modes, p, basis);
  s.gain = feedback_gain(law, basis, modes.size());
  s.closed = s.open_loop + s.input_coupling * s.gain;
  return s;
}

ClosedLoopSystem assemble_uncontrolled(const ModeSet& modes, const PhysParams& p,
                                       const UnstableBasis& basis) {
  ClosedLoopSystem s;
  s.modes = modes.size();
  s.open_loop = assemble_open_loop(modes, p);
  s.input_coupling = assemble_input_coupling(modes, p, basis);
  s.gain = Matrix::Zero(basis.size(), 2 * modes.size());
  s.closed = s.open_loop;
  return s;
}

const char* to_string(SpectralClass c) {
  switch (c) {
    case SpectralClass::unstable: return "unstable";
    case SpectralClass::neutral: return "neutral";
    case SpectralClass::stable: return "stable";
  }
  return "?";
}

SpectralReport spectral_report(const Matrix& m, double relative_tol) {
  SpectralReport r;
  r.matrix_norm = m.norm();
  r.tolerance = relative_tol * r.matrix_norm;

  const Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue solver did not converge");
  const Eigen::VectorXcd& ev = es.eigenvalues();
  r.eigenvalues.reserve(static_cast<size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    SpectralEntry e;
    e.value = ev(i);
    const double re = ev(i).real();
    if (re > r.tolerance) {
      e.cls = SpectralClass::unstable;
      ++r.n_unstable;
    } else if (re < -r.tolerance) {
      e.cls = SpectralClass::stable;
      ++r.n_stable;
    } else {
      e.cls = SpectralClass::neutral;
      ++r.n_neutral;
    }
    r.eigenvalues.push_back(e);
  }
  std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(),
                   [](const SpectralEntry& a, const SpectralEntry& b) {
                     if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
                     return a.value.imag() < b.value.imag();
                   });

  std::ptrdiff_t mass = -1;
  double closest = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
    if (r.eigenvalues[i].cls != SpectralClass::neutral) continue;
    const double a = std::abs(r.eigenvalues[i].value);
    if (a < closest) {
      closest = a;
      mass = static_cast<std::ptrdiff_t>(i);
    }
  }
  r.abscissa = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
    if (static_cast<std::ptrdiff_t>(i) == mass) continue;
    r.abscissa = std::max(r.abscissa, r.eigenvalues[i].value.real());
  }
  return r;
}

void Trajectory::record(double t, const Vector& x, Vector w, int modes) {
  times.push_back(t);
  const double ny = x.head(modes).norm();
  const double nz = x.tail(modes).norm();
  y_norm.push_back(ny);
  z_norm.push_back(nz);
  norm.push_back(std::hypot(ny, nz));
  states.push_back(x);
  weights.push_back(std::move(w));
}

namespace {

std::vector<Eigen::Index> zero_rows(const Matrix& c) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if ((c.row(i).array() == 0.0).all()) rows.push_back(i);
  }
  return rows;
}

struct EtdPropagators {
  Matrix step;  // exp(C dt)
  Matrix phi;   // int_0^dt exp(C s) ds
};

// Exponential Euler: x+ = exp(C dt) x + phi_1 g(x). Both blocks come from the
// exponential of the augmented matrix [[C, I], [0, 0]] dt.
EtdPropagators etd_propagators(const Matrix& c, double dt) {
  const Eigen::Index n = c.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = c * dt;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n) * dt;
  const Matrix e = aug.exp();
  EtdPropagators out{e.topLeftCorner(n, n), e.topRightCorner(n, n)};
  for (Eigen::Index i : zero_rows(c)) {
    out.step.row(i).setZero();
    out.step(i, i) = 1.0;
    out.phi.row(i).setZero();
    out.phi(i, i) = dt;
  }
  return out;
}

void check_horizon(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(t_final >= dt)) throw ConfigError("final time must be at least one time step");
}

}  // namespace

Matrix exact_propagator(const Matrix& c, double dt) {
  Matrix e = (c * dt).exp();
  for (Eigen::Index i : zero_rows(c)) {
    e.row(i).setZero();
    e(i, i) = 1.0;
  }
  return e;
}

std::optional<double> settling_time(const Matrix& c, double ratio, double resolution,
                                    double t_max) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("settling_time: ratio must lie in (0, 1)");
  check_horizon(t_max, resolution);
  const std::vector<Eigen::Index> conserved = zero_rows(c);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (std::find(conserved.begin(), conserved.end(), i) == conserved.end()) free.push_back(i);
  }
  const Matrix step = exact_propagator(c, resolution);
  Matrix e = Matrix::Identity(c.rows(), c.cols())(Eigen::all, free);
  const auto steps = static_cast<long>(std::llround(t_max / resolution));
  long last_above = 0;
  for (long s = 1; s <= steps; ++s) {
    e = (step * e).eval();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(e.transpose() * e, Eigen::EigenvaluesOnly);
    const double gain = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    if (!std::isfinite(gain) || gain > 1e12) return std::nullopt;
    if (gain > ratio) last_above = s;
    // Two decades below the target the transient is over.
    if (gain < 1e-2 * ratio) return static_cast<double>(last_above + 1) * resolution;
  }
  return std::nullopt;
}

Trajectory integrate_linear(const ClosedLoopSystem& system, const Vector& state0,
                            double t_final, double dt) {
  check_horizon(t_final, dt);
  if (state0.size() != system.closed.rows()) throw ConfigError("initial state size mismatch");
  const Matrix step = exact_propagator(system.closed, dt);
  const auto steps = static_cast<long>(std::llround(t_final / dt));

  Trajectory traj;
  traj.times.reserve(static_cast<size_t>(steps + 1));
  Vector x = state0;
  traj.record(0.0, x, system.gain * x, system.modes);
  for (long s = 1; s <= steps; ++s) {
    x = step * x;
    if (!std::isfinite(x.squaredNorm())) {
      std::ostringstream os;
      os << "linear state overflowed at step " << s << " (t = " << static_cast<double>(s) * dt << ")";
      throw DivergenceError(os.str());
    }
    traj.record(static_cast<double>(s) * dt, x, system.gain * x, system.modes);
  }
  return traj;
}

NonlinearModel::NonlinearModel(const ModeSet& modes, const PhysParams& p,
                               const FeedbackLaw& law, const UnstableBasis& basis,
                               const Equilibrium& eq, bool controlled)
    : modes_(modes),
      params_(p),
      law_(law),
      basis_(basis),
      controlled_(controlled),
      transform_(modes),
      phi_grid_(eq.phi_on_grid(transform_)),
      mu_(modes.eigenvalues()) {
  f1_equilibrium_ = phi_grid_.unaryExpr([](double v) { return potential_d1(v); });
  linear_ = controlled ? assemble_closed_loop(modes, p, law, basis)
                       : assemble_uncontrolled(modes, p, basis);
}

Vector NonlinearModel::control_weights(const Vector& state) const {
  return linear_.gain * state;
}

Vector NonlinearModel::remainder(const Vector& state) const {
  const int k = modes();
  const Vector y = transform_.to_grid(state.head(k));
  Vector r(y.size());
  for (Eigen::Index g = 0; g < y.size(); ++g) {
    r(g) = potential_d1(y(g) + phi_grid_(g)) - f1_equilibrium_(g) - params_.fbar * y(g);
  }
  Vector out = Vector::Zero(2 * k);
  out.head(k) = mu_.cwiseProduct(transform_.to_coeff(r));
  return out;
}

Vector NonlinearModel::field(const Vector& state) const {
  const int k = modes();
  const StateLayout layout{k};
  const Vector y = state.head(k);
  const Vector z = state.tail(k);

  const Vector y_grid = transform_.to_grid(y);
  Vector nl(y_grid.size());
  for (Eigen::Index g = 0; g < y_grid.size(); ++g) {
    nl(g) = potential_d1(y_grid(g) + phi_grid_(g)) - f1_equilibrium_(g);
  }
  const Vector nl_coeff = transform_.to_coeff(nl);

  // <u, e_j>_0 for the current control.
  Vector flux = Vector::Zero(k);
  if (controlled_) {
    const BoundaryControl u = eval_feedback(law_, modal_coordinates(state, basis_, k));
    for (int i = 0; i < law_.n; ++i) {
      const TraceRep& t = law_.psi_traces[static_cast<size_t>(i)];
      flux += u.weights(i) * t.coeff * modes_.trace_gram().row(t.mode).transpose();
    }
  }

  const double nu = params_.nu;
  const double gam = params_.gamma;
  Vector out(layout.size());
  for (int j = 0; j < k; ++j) {
    const double mu = mu_(j);
    // The boundary flux of nu Delta^2 y is -gamma0 u and that of gamma Delta z
    // is gamma alpha0 u.
    out(layout.y(j)) = -nu * mu * mu * y(j) + params_.gamma0 * flux(j) + mu * nl_coeff(j) +
                       params_.l * mu * y(j) - gam * (mu * z(j) + params_.alpha0 * flux(j));
    out(layout.z(j)) = mu * z(j) + params_.alpha0 * flux(j) - gam * mu * y(j);
  }
  return out;
}

namespace {

struct RunOutcome {
  std::optional<Trajectory> trajectory;
  std::string report;
};

RunOutcome run_etd(const NonlinearModel& model, const Vector& state0, double t_final, double dt,
                   const NonlinearOptions& options) {
  const EtdPropagators prop = etd_propagators(model.linear().closed, dt);
  const auto steps = static_cast<long>(std::llround(t_final / dt));
  long every = options.record_every;
  if (every <= 0) every = std::max(1L, steps / 4000);

  const int k = model.modes();
  const double n0 = state0.norm();
  const double limit = options.blowup_factor * std::max(n0, std::numeric_limits<double>::min());

  Trajectory traj;
  Vector x = state0;
  traj.record(0.0, x, model.control_weights(x), k);
  for (long s = 1; s <= steps; ++s) {
    x = prop.step * x + prop.phi * model.remainder(x);
    const double n = x.norm();
    if (!std::isfinite(n) || (n0 > 0.0 && n > limit)) {
      std::ostringstream os;
      os << "diverged at step " << s << " (t = " << static_cast<double>(s) * dt
         << ", dt = " << dt << "), norm " << n << " vs initial " << n0;
      return {std::nullopt, os.str()};
    }
    if (s % every == 0 || s == steps) {
      traj.record(static_cast<double>(s) * dt, x, model.control_weights(x), k);
    }
  }
  return {std::move(traj), {}};
}

}  // namespace

Trajectory integrate_nonlinear(const NonlinearModel& model, const Vector& state0,
                               double t_final, const NonlinearOptions& options) {
  check_horizon(t_final, options.dt);
  if (state0.size() != 2 * model.modes()) throw ConfigError("initial state size mismatch");
  double dt = options.dt;
  std::string reports;
  for (int attempt = 0; attempt <= options.max_halvings; ++attempt, dt *= 0.5) {
    RunOutcome out = run_etd(model, state0, t_final, dt, options);
    if (out.trajectory) return std::move(*out.trajectory);
    reports += (reports.empty() ? "" : "; ") + out.report;
  }
  throw DivergenceError("nonlinear integration diverged after dt halving: " + reports);
}

Trajectory integrate_nonlinear(const ModeSet& modes, const PhysParams& p,
                               const FeedbackLaw& law, const UnstableBasis& basis,
                               const Equilibrium& eq, const Vector& state0, double t_final,
                               double dt) {
  const NonlinearModel model(modes, p, law, basis, eq);
  NonlinearOptions options;
  options.dt = dt;
  return integrate_nonlinear(model, state0, t_final, options);
}

Matrix finite_difference_jacobian(const NonlinearModel& model, const Vector& at, double h) {
  const Eigen::Index n = at.size();
  Matrix jac(n, n);
  Vector xp = at;
  Vector xm = at;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = at(i) + h;
    xm(i) = at(i) - h;
    jac.col(i) = (model.field(xp) - model.field(xm)) / (2.0 * h);
    xp(i) = at(i);
    xm(i) = at(i);
  }
  return jac;
}

EquilibriumCoefficients equilibrium_coefficients(const Equilibrium& eq, const ModeSet& modes) {
  const Transform transform(modes);
  EquilibriumCoefficients c;
  c.phi = eq.phi_coefficients(modes, transform);
  c.theta = Vector::Zero(modes.size());
  c.theta(0) = eq.theta() * std::sqrt(modes.domain().measure());
  return c;
}

Vector to_fluctuation(const PhysicalFields& fields, const EquilibriumCoefficients& eq,
                      const PhysParams& p) {
  const Eigen::Index k = eq.phi.size();
  if (fields.phi.size() != k || fields.theta.size() != k) {
    throw ConfigError("field coefficient count does not match K");
  }
  Vector x(2 * k);
  x.head(k) = fields.phi - eq.phi;
  x.tail(k) = p.alpha0 * (fields.theta + p.l0 * fields.phi) -
              p.alpha0 * (eq.theta + p.l0 * eq.phi);
  return x;
}

PhysicalFields from_fluctuation(const Vector& state, const EquilibriumCoefficients& eq,
                                const PhysParams& p) {
  const Eigen::Index k = eq.phi.size();
  if (state.size() != 2 * k) throw ConfigError("state size does not match 2K");
  PhysicalFields f;
  f.phi = state.head(k) + eq.phi;
  const Vector sigma = state.tail(k) + p.alpha0 * (eq.theta + p.l0 * eq.phi);
  f.theta = sigma / p.alpha0 - p.l0 * f.phi;
  return f;
}

DecayFit fit_decay(const Trajectory& trajectory, FitWindow window) {
  if (trajectory.size() == 0) throw ConfigError("fit_decay: empty trajectory");
  std::vector<double> t;
  std::vector<double> v;
  for (int i = 0; i < trajectory.size(); ++i) {
    const double ti = trajectory.times[static_cast<size_t>(i)];
    if (ti < window.t0 || ti > window.t1) continue;
    const double n2 = trajectory.norm[static_cast<size_t>(i)] * trajectory.norm[static_cast<size_t>(i)];
    // Shrink the window to the last positive sample.
    if (!(n2 > 0.0)) break;
    t.push_back(ti);
    v.push_back(std::log(n2));
  }
  if (t.size() < 10) {
    throw ConfigError("fit_decay: fewer than 10 usable samples in window");
  }
  const auto n = static_cast<double>(t.size());
  double st = 0.0;
  double sv = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sv += v[i];
  }
  const double mt = st / n;
  const double mv = sv / n;
  double stt = 0.0;
  double stv = 0.0;
  double svv = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stv += (t[i] - mt) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  const double slope = stv / stt;
  const double intercept = mv - slope * mt;
  double ss_res = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double e = v[i] - (intercept + slope * t[i]);
    ss_res += e * e;
  }

  DecayFit fit;
  fit.c2 = -slope;
  const double n0 = trajectory.norm.front();
  fit.c1 = n0 > 0.0 ? std::exp(intercept) / (n0 * n0) : 0.0;
  fit.r_squared = svv > 0.0 ? 1.0 - ss_res / svv : 1.0;
  fit.window = {t.front(), t.back()};
  fit.samples = static_cast<int>(t.size());
  return fit;
}

Vector random_mass_matched(int modes, double amplitude, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(2 * modes);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  x(0) = 0.0;
  return amplitude * x / x.norm();
}

}  // namespace chstab
