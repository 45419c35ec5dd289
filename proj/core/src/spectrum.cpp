#include "chstab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chstab/errors.hpp"

namespace chstab {

PhysParams derive_params(double nu, double l0, double gamma0, double fbar) {
  if (!(nu > 0.0) || !(l0 > 0.0) || !(gamma0 > 0.0)) {
    throw ConfigError("nu, l0 and gamma0 must be positive");
  }
  if (!std::isfinite(nu) || !std::isfinite(l0) || !std::isfinite(gamma0) ||
      !std::isfinite(fbar)) {
    throw ConfigError("physical parameters must be finite");
  }
  PhysParams p;
  p.nu = nu;
  p.l0 = l0;
  p.gamma0 = gamma0;
  p.fbar = fbar;
  p.alpha0 = std::sqrt(gamma0 / l0);
  p.gamma = p.alpha0 * l0;
  p.l = gamma0 * l0;
  p.f_l = fbar + p.l;
  return p;
}

double lambda_bar(const PhysParams& p) { return (p.gamma * p.gamma - p.f_l) / p.nu; }

Equilibrium Equilibrium::constant(double phi, double theta) {
  if (!std::isfinite(phi) || !std::isfinite(theta)) {
    throw ConfigError("equilibrium values must be finite");
  }
  return Equilibrium(phi, std::nullopt, theta);
}

Equilibrium Equilibrium::tabulated(Vector phi_grid, double theta) {
  if (phi_grid.size() == 0 || !phi_grid.allFinite()) {
    throw ConfigError("tabulated phi_inf must be nonempty and finite");
  }
  return Equilibrium(0.0, std::move(phi_grid), theta);
}

Vector Equilibrium::phi_on_grid(const Transform& transform) const {
  if (is_constant()) return Vector::Constant(transform.grid_size(), phi_);
  if (table_->size() != transform.grid_size()) {
    throw ConfigError("tabulated phi_inf has " + std::to_string(table_->size()) +
                      " values, collocation grid has " +
                      std::to_string(transform.grid_size()));
  }
  return *table_;
}

Vector Equilibrium::phi_coefficients(const ModeSet& modes,
                                     const Transform& transform) const {
  if (is_constant()) {
    Vector c = Vector::Zero(modes.size());
    c(0) = phi_ * std::sqrt(modes.domain().measure());
    return c;
  }
  return transform.to_coeff(phi_on_grid(transform));
}

double effective_slope(const Equilibrium& eq, const ModeSet& modes) {
  if (eq.is_constant()) return potential_d2(eq.phi_constant());
  const Transform transform(modes);
  const Vector phi = eq.phi_on_grid(transform);
  const Vector f2 = phi.unaryExpr([](double v) { return potential_d2(v); });
  return transform.integrate(f2) / modes.domain().measure();
}

Eigen::Matrix2d mode_block(double mu, const PhysParams& p) {
  Eigen::Matrix2d m;
  m << p.nu * mu * mu - p.f_l * mu, p.gamma * mu,
       p.gamma * mu, -mu;
  return m;
}

RootPair quadratic_roots(double mu, const PhysParams& p) {
  if (!(mu < 0.0)) throw ConfigError("quadratic_roots requires mu < 0");
  const double b = (p.f_l + 1.0) * mu - p.nu * mu * mu;
  const double c = -p.nu * mu * mu * mu + (p.f_l - p.gamma * p.gamma) * mu * mu;
  double disc = b * b - 4.0 * c;
  // The discriminant equals (a - d)^2 + 4 b^2 of a symmetric block.
  if (disc < 0.0) {
    if (disc < -1e-12 * std::max({1.0, b * b, std::abs(4.0 * c)})) {
      throw Error("negative discriminant in per-mode quadratic; parameters corrupted");
    }
    disc = 0.0;
  }
  // Cancellation-free form: q = -(b + sign(b) sqrt(disc)) / 2, roots q and c/q.
  const double s = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
  double r1 = q;
  double r2 = q != 0.0 ? c / q : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

const char* to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::zero_sym: return "zero_sym";
    case EntryKind::zero_anti: return "zero_anti";
    case EntryKind::negative: return "negative";
  }
  return "?";
}

Vector UnstableBasis::lambdas() const {
  Vector v(size());
  for (int j = 0; j < size(); ++j) v(j) = (*this)[j].lambda;
  return v;
}

Vector UnstableBasis::state(int j, int modes) const {
  const StateLayout layout{modes};
  const UnstableEntry& e = (*this)[j];
  Vector x = Vector::Zero(layout.size());
  x(layout.y(e.mode)) = e.coeff_phi;
  x(layout.z(e.mode)) = e.coeff_psi;
  return x;
}

Matrix UnstableBasis::projector_rows(int modes) const {
  Matrix v(size(), 2 * modes);
  for (int j = 0; j < size(); ++j) v.row(j) = state(j, modes).transpose();
  return v;
}

UnstableBasis unstable_basis(const ModeSet& modes, const PhysParams& p) {
  // Negative eigenvalues only come from modes with (F_l - gamma^2)/nu <= mu < 0.
  const double threshold = (p.f_l - p.gamma * p.gamma) / p.nu;
  const double mu_last = modes[modes.size() - 1].mu;
  if (threshold < 0.0 && mu_last >= threshold) {
    std::ostringstream os;
    os << "truncation too small: modes must cover mu in [" << threshold
       << ", 0) but the smallest retained eigenvalue is " << mu_last
       << "; increase K";
    throw ConfigError(os.str());
  }

  UnstableBasis basis;
  if (modes[0].mu != 0.0) throw Error("mode set does not start with the constant mode");

  for (int k = 1; k < modes.size(); ++k) {
    const double mu = modes[k].mu;
    if (mu < threshold) continue;
    const RootPair roots = quadratic_roots(mu, p);
    const double lambda = roots.minus;
    const double scale = std::max(1.0, std::abs(roots.plus));
    if (std::abs(lambda) <= 1e-12 * scale) {
      std::ostringstream os;
      os << "mode " << k << " (mu = " << mu
         << ") sits on the boundary mu = (F_l - gamma^2)/nu and contributes a zero root; "
            "excluded from the negative entries";
      basis.warnings.push_back(os.str());
      continue;
    }
    if (lambda > 0.0) continue;
    const double gm = p.gamma * mu;
    const double r = std::hypot(gm, lambda + mu);
    UnstableEntry e;
    e.lambda = lambda;
    e.kind = EntryKind::negative;
    e.mode = k;
    e.coeff_phi = (lambda + mu) / r;
    e.coeff_psi = gm / r;
    basis.entries.push_back(e);
  }
  std::stable_sort(basis.entries.begin(), basis.entries.end(),
                   [](const UnstableEntry& a, const UnstableEntry& b) {
                     return a.lambda < b.lambda;
                   });

  const double h = 1.0 / std::sqrt(2.0);
  basis.entries.push_back({0.0, EntryKind::zero_sym, 0, h, h});
  basis.entries.push_back({0.0, EntryKind::zero_anti, 0, -h, h});
  return basis;
}

AssumptionReport check_assumptions(const ModeSet& modes, const PhysParams& p,
                                   const UnstableBasis& basis,
                                   const AssumptionTolerances& tol) {
  AssumptionReport r;
  r.necessary_condition = p.f_l - p.gamma * p.gamma <= 0.0;

  // (H0): any coincidence of lambda_bar with a nonzero Neumann eigenvalue of
  // -Delta is flagged, whatever its multiplicity.
  r.lambda_bar = lambda_bar(p);
  r.h0_nearest_distance = std::numeric_limits<double>::infinity();
  for (int k = 1; k < modes.size(); ++k) {
    const double mu = modes[k].mu;
    const double d = std::abs(r.lambda_bar + mu);
    if (d < r.h0_nearest_distance) {
      r.h0_nearest_distance = d;
      r.h0_nearest_mode = k;
    }
    if (d < tol.h0 * std::max(std::abs(r.lambda_bar), std::abs(mu))) r.h0_ok = false;
  }

  // (H1): negative eigenvalues simple, across all source modes.
  r.h1_min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < basis.size(); ++i) {
    if (basis[i].kind != EntryKind::negative) continue;
    for (int j = i + 1; j < basis.size(); ++j) {
      if (basis[j].kind != EntryKind::negative) continue;
      const double a = basis[i].lambda;
      const double b = basis[j].lambda;
      const double gap = std::abs(a - b);
      r.h1_min_gap = std::min(r.h1_min_gap, gap);
      if (gap <= tol.h1 * std::max(std::abs(a), std::abs(b))) r.h1_ok = false;
    }
  }

  // psi_j must not vanish identically on Gamma_1.
  const auto samples = modes.domain().gamma1_samples(4 * (modes.max_m() + modes.max_n() + 1));
  r.trace_sup.reserve(static_cast<size_t>(basis.size()));
  for (int j = 0; j < basis.size(); ++j) {
    double sup = 0.0;
    for (const Point& pt : samples) {
      sup = std::max(sup, std::abs(basis[j].coeff_psi * modes.eval(basis[j].mode, pt)));
    }
    r.trace_sup.push_back(sup);
    if (!(sup > tol.trace)) r.traces_ok = false;
  }
  return r;
}

}  // namespace chstab
