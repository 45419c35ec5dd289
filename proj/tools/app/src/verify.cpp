#include "chstab_app/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include <chstab/errors.hpp>
#include <chstab/lifting.hpp>

#include "chstab_app/scenario.hpp"

namespace chstab::app {

namespace {

class Battery {
 public:
  explicit Battery(const std::function<void(const std::string&)>& progress) : progress_(progress) {}

  void add(const std::string& name, bool pass, Json details) {
    all_ = all_ && pass;
    emit(name, pass ? "pass" : "fail", std::move(details));
  }
  void skip(const std::string& name, const std::string& reason) {
    emit(name, "skipped", Json{{"reason", reason}});
  }

  bool passed() const { return all_; }
  Json checks() const { return checks_; }

 private:
  void emit(const std::string& name, const char* status, Json details) {
    Json entry{{"name", name}, {"status", status}};
    for (auto& [k, v] : details.items()) entry[k] = v;
    if (progress_) progress_(std::string(status) + "  " + name);
    checks_.push_back(std::move(entry));
  }

  const std::function<void(const std::string&)>& progress_;
  Json checks_ = Json::array();
  bool all_ = true;
};

Vector normal_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// det of C_jk = 1 / (x_k - y_j) in closed form.
double cauchy_determinant(const Vector& x, const Vector& y) {
  const Eigen::Index n = x.size();
  long double num = 1.0L;
  long double den = 1.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      num *= static_cast<long double>(x(j) - x(i)) * static_cast<long double>(y(i) - y(j));
    }
    for (Eigen::Index j = 0; j < n; ++j) den *= static_cast<long double>(x(j) - y(i));
  }
  return static_cast<double>(num / den);
}

void check_basis(Battery& b, const Scenario& s, std::mt19937_64& rng) {
  const Transform transform(s.modes);
  const int k = s.modes.size();

  Vector c = normal_vector(k, rng);
  c /= c.norm();
  const Vector grid = transform.to_grid(c);
  const double round_trip = (transform.to_coeff(grid) - c).cwiseAbs().maxCoeff();
  const double parseval = std::abs(transform.l2_norm(grid) - 1.0);
  b.add("transform_round_trip", round_trip <= 1e-12 && parseval <= 1e-10,
        {{"round_trip_error", round_trip}, {"parseval_error", parseval},
         {"tolerance", {1e-12, 1e-10}}});

  Matrix values(transform.grid_size(), k);
  for (int j = 0; j < k; ++j) values.col(j) = transform.to_grid(Vector::Unit(k, j));
  const Matrix gram = values.transpose() * transform.weights().asDiagonal() * values;
  const double ortho = max_abs(gram - Matrix::Identity(k, k));
  b.add("mode_orthonormality", ortho <= 1e-12, {{"max_error", ortho}, {"tolerance", 1e-12}});

  double sym = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) sym = std::max(sym, std::abs(s.modes.trace_pairing(i, j) - s.modes.trace_pairing(j, i)));
  }
  b.add("trace_pairing_symmetry", sym == 0.0, {{"max_asymmetry", sym}});
}

void check_spectrum(Battery& b, const Scenario& s) {
  const int k = s.modes.size();
  double block = 0.0;
  std::vector<double> union_roots;
  for (int j = 0; j < k; ++j) {
    const double mu = s.modes[j].mu;
    if (mu == 0.0) {
      union_roots.insert(union_roots.end(), {0.0, 0.0});
      continue;
    }
    const RootPair r = quadratic_roots(mu, s.params);
    const Eigen::EigenSolver<Eigen::Matrix2d> es(mode_block(mu, s.params), false);
    std::array<double, 2> dense{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    std::sort(dense.begin(), dense.end());
    const double scale = std::max(1.0, std::abs(r.plus));
    block = std::max(block, std::max(std::abs(dense[0] - r.minus), std::abs(dense[1] - r.plus)) / scale);
    union_roots.insert(union_roots.end(), {r.minus, r.plus});
  }
  b.add("block_oracle", block <= 1e-10, {{"max_relative_error", block}, {"tolerance", 1e-10}});

  const Matrix open = assemble_open_loop(s.modes, s.params);
  const Eigen::EigenSolver<Matrix> es(-open, false);
  std::vector<double> dense;
  double imag = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    dense.push_back(es.eigenvalues()(i).real());
    imag = std::max(imag, std::abs(es.eigenvalues()(i).imag()));
  }
  std::sort(dense.begin(), dense.end());
  std::sort(union_roots.begin(), union_roots.end());
  double global = 0.0;
  for (size_t i = 0; i < dense.size(); ++i) global = std::max(global, std::abs(dense[i] - union_roots[i]));
  b.add("global_oracle", global <= 1e-9 && imag <= 1e-9,
        {{"max_abs_error", global}, {"max_imag", imag}, {"tolerance", 1e-9}});

  const int n = s.basis.size();
  Matrix v(n, 2 * k);
  for (int j = 0; j < n; ++j) v.row(j) = s.basis.state(j, k).transpose();
  const double ortho = max_abs(v * v.transpose() - Matrix::Identity(n, n));
  b.add("unstable_basis_orthonormal", ortho <= 1e-12,
        {{"n", n}, {"lambdas", to_json(s.basis.lambdas())}, {"max_error", ortho}, {"warnings", s.basis.warnings}});

  const SpectralReport open_report = spectral_report(open);
  if (s.assumptions.h0_ok) {
    b.add("zero_multiplicity", open_report.n_neutral == 2,
          {{"neutral", open_report.n_neutral}, {"expected", 2}});
  } else {
    b.skip("zero_multiplicity", "h0 flagged");
  }

  b.add("assumptions", s.assumptions.ok(), to_json(s.assumptions));
}

void check_lifting(Battery& b, const Scenario& s, const FeedbackLaw& law, std::mt19937_64& rng) {
  const int k = s.modes.size();
  double identity = 0.0;
  double residual = 0.0;
  double superposition = 0.0;
  for (double eta : law.ladder.values) {
    const LiftSystem lift = assemble_lift(s.modes, s.params, s.basis, eta, law.delta);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector a = normal_vector(k, rng);
      const Vector r = verify_lift_identity(lift, s.modes, s.params, s.basis, a);
      identity = std::max(identity, r.maxCoeff());
      const Vector x = apply_lift(lift, a);
      const Vector rhs = lift.source() * a;
      if (rhs.norm() > 0.0) residual = std::max(residual, (lift.matrix() * x - rhs).norm() / rhs.norm());
      const Vector a2 = normal_vector(k, rng);
      const Vector lin = apply_lift(lift, a + 2.0 * a2) - x - 2.0 * apply_lift(lift, a2);
      superposition = std::max(superposition, lin.norm() / std::max(1.0, x.norm()));
    }
  }
  b.add("lift_identity", identity <= 1e-9,
        {{"max_residual", identity}, {"tolerance", 1e-9}, {"rungs", law.ladder.size()}, {"samples_per_rung", 10}});
  b.add("lift_solve_residual", residual <= 1e-10, {{"max_relative_residual", residual}, {"tolerance", 1e-10}});
  b.add("lift_superposition", superposition <= 1e-12, {{"max_relative_error", superposition}, {"tolerance", 1e-12}});
}

void check_coupler(Battery& b, const Scenario& s, const FeedbackLaw& law, std::mt19937_64& rng) {
  const int n = law.n;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(law.coupler_sum, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  b.add("coupler_positive_definite", lo > 0.0,
        {{"min_eigenvalue", lo}, {"condition", law.coupler_condition}});

  if (!s.config.zero_gain) {
    // Residual of the stored double matrices, accumulated in extended precision.
    using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const MatrixL prod = law.coupler.cast<long double>() * law.coupler_sum.cast<long double>();
    const auto inv = static_cast<double>((prod - MatrixL::Identity(n, n)).cwiseAbs().maxCoeff());
    b.add("coupler_inverse", inv <= 1e-10, {{"max_error", inv}, {"tolerance", 1e-10}});
  } else {
    b.skip("coupler_inverse", "zero gain injected");
  }

  const Domain& d = s.modes.domain();
  if (d.dimension() == 1 && d.gamma1().size() == 1) {
    Vector t(n);
    for (int j = 0; j < n; ++j) {
      const Point at{d.controls(Side::right) ? d.lx() : 0.0, 0.0};
      t(j) = s.basis[j].coeff_psi * s.modes.eval(s.basis[j].mode, at);
    }
    Vector eta(n);
    for (int q = 0; q < n; ++q) eta(q) = law.ladder[q];
    const double cdet = cauchy_determinant(eta, law.shifted);
    const double expected = t.array().square().prod() * cdet * cdet;
    const double det = law.coupler_sum.determinant();
    const double rel = std::abs(det - expected) / std::abs(expected);
    b.add("coupler_cauchy_determinant", rel <= 1e-8,
          {{"determinant", det}, {"cauchy", expected}, {"relative_error", rel}, {"tolerance", 1e-8}});
  } else {
    b.skip("coupler_cauchy_determinant", "closed form applies to a single 1D endpoint");
  }

  double forms = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector z = normal_vector(n, rng);
    const Vector w1 = eval_feedback(law, z).weights;
    const Vector w2 = eval_feedback_summed(law, z).weights;
    forms = std::max(forms, (w1 - w2).norm() / std::max(1.0, w1.norm()));
  }
  b.add("feedback_summed_equals_aggregate", forms <= 1e-12, {{"max_relative_error", forms}, {"tolerance", 1e-12}});

  const int k = s.modes.size();
  Vector x = normal_vector(2 * k, rng);
  const Matrix p = s.basis.projector_rows(k);
  x -= p.transpose() * (p * x);
  const Matrix gain = feedback_gain(law, s.basis, k);
  const double leak = (gain * x).norm() / std::max(1e-300, gain.norm() * x.norm());
  b.add("feedback_zero_off_unstable_span", leak <= 1e-12, {{"relative_control", leak}, {"tolerance", 1e-12}});
}

struct Certification {
  SpectralReport closed;
  SpectralReport open;
  bool ok = false;
};

Certification certify(const Scenario& s, const FeedbackLaw& law) {
  const ClosedLoopSystem sys = assemble_closed_loop(s.modes, s.params, law, s.basis);
  Certification c{spectral_report(sys.closed), spectral_report(sys.open_loop), false};
  c.ok = c.closed.n_unstable == 0 && c.closed.n_neutral == 1 && c.closed.decay_margin() >= 1e-3;
  return c;
}

}  // namespace

VerifyResult verify(const ScenarioConfig& config,
                    const std::function<void(const std::string&)>& progress) {
  Battery b(progress);
  std::mt19937_64 rng(config.seed);
  const Scenario s = build_scenario(config);
  const int k = s.modes.size();

  check_basis(b, s, rng);
  check_spectrum(b, s);

  const char* synthesis_checks[] = {"lift_identity", "lift_solve_residual", "lift_superposition",
                                    "coupler_positive_definite", "coupler_inverse",
                                    "coupler_cauchy_determinant", "feedback_summed_equals_aggregate",
                                    "feedback_zero_off_unstable_span", "closed_loop_certification",
                                    "k_doubling", "linear_decay", "open_loop_growth",
                                    "mass_conservation", "jacobian_consistency", "nonlinear_decay"};
  auto skip_rest = [&](const std::string& reason, size_t from) {
    for (size_t i = from; i < std::size(synthesis_checks); ++i) b.skip(synthesis_checks[i], reason);
  };

  if (!s.assumptions.ok() && !config.override_assumptions) {
    skip_rest("assumption check failed", 0);
    return {false, Json{{"status", "fail"}, {"config_hash", config.hash()}, {"checks", b.checks()}}};
  }

  FeedbackLaw law;
  try {
    law = synthesize_law(s);
  } catch (const SynthesisError& e) {
    b.add("synthesis", false, {{"error", e.what()}});
    skip_rest("synthesis failed", 0);
    return {false, Json{{"status", "fail"}, {"config_hash", config.hash()}, {"checks", b.checks()}}};
  }

  check_lifting(b, s, law, rng);
  check_coupler(b, s, law, rng);

  const Certification cert = certify(s, law);
  int negative = 0;
  for (const UnstableEntry& e : s.basis.entries) negative += e.kind == EntryKind::negative;
  b.add("closed_loop_certification", cert.ok && cert.open.n_unstable == negative,
        {{"convention", law.convention.name()},
         {"decay_margin", cert.closed.decay_margin()},
         {"closed_counts", {cert.closed.n_unstable, cert.closed.n_neutral, cert.closed.n_stable}},
         {"open_counts", {cert.open.n_unstable, cert.open.n_neutral, cert.open.n_stable}},
         {"open_leading", cert.open.eigenvalues.front().value.real()},
         {"minimum_margin", 1e-3}});
  const double c = cert.closed.decay_margin();

  if (config.phi_inf_table) {
    b.skip("k_doubling", "tabulated phi_inf is tied to the K-mode grid");
  } else {
    const Scenario s2 = build_scenario(config, 2 * k);
    try {
      const Certification cert2 = certify(s2, synthesize_law(s2));
      const double diff = std::abs(cert2.closed.decay_margin() - c);
      b.add("k_doubling", cert2.ok && diff < 1e-6,
            {{"k", k}, {"decay_margin", c}, {"decay_margin_2k", cert2.closed.decay_margin()},
             {"difference", diff}, {"tolerance", 1e-6}});
    } catch (const Error& e) {
      b.add("k_doubling", false, {{"error", e.what()}});
    }
  }

  const ClosedLoopSystem closed = assemble_closed_loop(s.modes, s.params, law, s.basis);
  double mass = 0.0;
  auto track_mass = [&](const Trajectory& tr) {
    const double scale = std::max(1.0, tr.states.front().norm());
    for (const Vector& x : tr.states) mass = std::max(mass, std::abs(x(0) - tr.states.front()(0)) / scale);
  };

  if (cert.ok) {
    const double t = config.t_final;
    double min_c2 = std::numeric_limits<double>::infinity();
    double min_r2 = std::numeric_limits<double>::infinity();
    bool fits_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      const Trajectory tr = integrate_linear(closed, random_mass_matched(k, 1.0, rng), t, config.dt);
      track_mass(tr);
      try {
        const DecayFit fit = fit_decay(tr, {0.25 * t, t});
        min_c2 = std::min(min_c2, fit.c2);
        min_r2 = std::min(min_r2, fit.r_squared);
      } catch (const ConfigError&) {
        fits_ok = false;
      }
    }
    const double required = 1.8 * c * 0.9;
    b.add("linear_decay", fits_ok && min_c2 >= required && min_r2 >= 0.98,
          {{"runs", 20}, {"window", {0.25 * t, t}}, {"min_rate", min_c2}, {"required_rate", required},
           {"min_r_squared", min_r2}});
  } else {
    b.skip("linear_decay", "closed loop not certified");
  }

  if (negative > 0) {
    const ClosedLoopSystem open = assemble_uncontrolled(s.modes, s.params, s.basis);
    const double growth = -s.basis[0].lambda;
    const double t = std::min(config.t_final, 20.0 / growth);
    const Trajectory tr = integrate_linear(open, s.basis.state(0, k), t, std::min(config.dt, t / 100.0));
    track_mass(tr);
    const double z0 = std::abs(modal_coordinates(tr.states.front(), s.basis, k)(0));
    const double z1 = std::abs(modal_coordinates(tr.states.back(), s.basis, k)(0));
    const double t_end = tr.times.back();
    const double rate = std::log(z1 / z0) / t_end;
    b.add("open_loop_growth", z1 >= std::exp(0.9 * growth * t_end) * z0,
          {{"rate", rate}, {"required_rate", 0.9 * growth}, {"horizon", t_end}});
  } else {
    b.skip("open_loop_growth", "no strictly negative eigenvalue");
  }

  const NonlinearModel model(s.modes, s.params, law, s.basis, s.equilibrium);
  if (config.phi_inf_table) {
    b.skip("jacobian_consistency", "linearization uses the mean of F''(phi_inf)");
  } else {
    const Matrix jac = finite_difference_jacobian(model, Vector::Zero(2 * k), 1e-6);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < jac.rows(); ++i) {
      const double scale = std::max(1.0, closed.closed.row(i).cwiseAbs().maxCoeff());
      worst = std::max(worst, (jac.row(i) - closed.closed.row(i)).cwiseAbs().maxCoeff() / scale);
    }
    b.add("jacobian_consistency", worst <= 1e-6, {{"max_row_relative_error", worst}, {"tolerance", 1e-6}});
  }

  if (cert.ok) {
    const double t = nonlinear_horizon(config, closed);
    const Vector x0 = random_mass_matched(k, 1e-2, rng);
    NonlinearOptions options;
    options.dt = config.dt_nonlinear;
    try {
      const Trajectory tr = integrate_nonlinear(model, x0, t, options);
      track_mass(tr);
      const double ratio = tr.norm.back() / tr.norm.front();
      b.add("nonlinear_decay", ratio <= 0.01,
            {{"amplitude", 1e-2}, {"horizon", t}, {"final_ratio", ratio}, {"required_ratio", 0.01}});
    } catch (const DivergenceError& e) {
      b.add("nonlinear_decay", false, {{"error", e.what()}});
    }
  } else {
    b.skip("nonlinear_decay", "closed loop not certified");
  }

  b.add("mass_conservation", mass <= 1e-10, {{"max_drift", mass}, {"tolerance", 1e-10}});

  return {b.passed(), Json{{"status", b.passed() ? "pass" : "fail"},
                           {"config_hash", config.hash()},
                           {"checks", b.checks()}}};
}

}  // namespace chstab::app
