#include "chstab/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chstab/errors.hpp"

namespace chstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTieTolerance = 1e-12;

bool valid_length(double v) { return std::isfinite(v) && v > 0.0; }

std::vector<Side> normalize_sides(std::vector<Side> sides) {
  std::sort(sides.begin(), sides.end());
  sides.erase(std::unique(sides.begin(), sides.end()), sides.end());
  return sides;
}

double side_length(const Domain& d, Side s) {
  return (s == Side::left || s == Side::right) ? d.ly() : d.lx();
}

}  // namespace

std::string_view to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

std::string_view to_string(DomainKind kind) {
  return kind == DomainKind::interval ? "interval" : "rectangle";
}

Side parse_side(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  if (name == "bottom") return Side::bottom;
  if (name == "top") return Side::top;
  throw ConfigError("unknown boundary side '" + std::string(name) + "'");
}

Domain::Domain(DomainKind kind, double lx, double ly, std::vector<Side> gamma1)
    : kind_(kind), lx_(lx), ly_(ly), gamma1_(normalize_sides(std::move(gamma1))) {}

Domain Domain::interval(double length, std::vector<Side> gamma1) {
  if (!valid_length(length)) {
    throw ConfigError("interval length must be positive and finite");
  }
  if (gamma1.empty()) throw ConfigError("Gamma_1 must not be empty");
  for (Side s : gamma1) {
    if (s != Side::left && s != Side::right) {
      throw ConfigError("interval boundary sides are 'left' and 'right' only");
    }
  }
  return Domain(DomainKind::interval, length, 1.0, std::move(gamma1));
}

Domain Domain::rectangle(double lx, double ly, std::vector<Side> gamma1) {
  if (!valid_length(lx) || !valid_length(ly)) {
    throw ConfigError("rectangle side lengths must be positive and finite");
  }
  if (gamma1.empty()) throw ConfigError("Gamma_1 must not be empty");
  return Domain(DomainKind::rectangle, lx, ly, std::move(gamma1));
}

double Domain::measure() const {
  return kind_ == DomainKind::interval ? lx_ : lx_ * ly_;
}

double Domain::gamma1_measure() const {
  if (kind_ == DomainKind::interval) return static_cast<double>(gamma1_.size());
  double total = 0.0;
  for (Side s : gamma1_) total += side_length(*this, s);
  return total;
}

bool Domain::controls(Side side) const {
  return std::find(gamma1_.begin(), gamma1_.end(), side) != gamma1_.end();
}

std::vector<Point> Domain::gamma1_samples(int per_side) const {
  std::vector<Point> out;
  if (kind_ == DomainKind::interval) {
    for (Side s : gamma1_) out.push_back({s == Side::left ? 0.0 : lx_, 0.0});
    return out;
  }
  const int n = std::max(per_side, 1);
  for (Side s : gamma1_) {
    for (int k = 0; k < n; ++k) {
      const double t = (k + 0.5) / n;
      switch (s) {
        case Side::left: out.push_back({0.0, t * ly_}); break;
        case Side::right: out.push_back({lx_, t * ly_}); break;
        case Side::bottom: out.push_back({t * lx_, 0.0}); break;
        case Side::top: out.push_back({t * lx_, ly_}); break;
      }
    }
  }
  return out;
}

double cosine_mode(int m, double x, double length) {
  if (m == 0) return 1.0 / std::sqrt(length);
  return std::sqrt(2.0 / length) * std::cos(m * kPi * x / length);
}

ModeSet::ModeSet(Domain domain, std::vector<Mode> modes)
    : domain_(std::move(domain)), modes_(std::move(modes)) {
  const int k = size();
  trace_gram_.resize(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double v = compute_pairing(i, j);
      trace_gram_(i, j) = v;
      trace_gram_(j, i) = v;
    }
  }
}

Vector ModeSet::eigenvalues() const {
  Vector mu(size());
  for (int i = 0; i < size(); ++i) mu(i) = modes_[static_cast<size_t>(i)].mu;
  return mu;
}

int ModeSet::max_m() const {
  int v = 0;
  for (const Mode& m : modes_) v = std::max(v, m.m);
  return v;
}

int ModeSet::max_n() const {
  int v = 0;
  for (const Mode& m : modes_) v = std::max(v, m.n);
  return v;
}

bool ModeSet::has_degeneracy() const {
  return std::any_of(modes_.begin(), modes_.end(),
                     [](const Mode& m) { return m.degenerate; });
}

double ModeSet::eval(int i, Point p) const {
  const Mode& md = (*this)[i];
  double v = cosine_mode(md.m, p[0], domain_.lx());
  if (domain_.kind() == DomainKind::rectangle) {
    v *= cosine_mode(md.n, p[1], domain_.ly());
  }
  return v;
}

double ModeSet::trace_pairing(int i, int j) const {
  if (i < 0 || j < 0 || i >= size() || j >= size()) {
    throw ConfigError("trace_pairing: mode index out of range");
  }
  return trace_gram_(i, j);
}

double ModeSet::compute_pairing(int i, int j) const {
  const Mode& a = (*this)[i];
  const Mode& b = (*this)[j];
  const double lx = domain_.lx();
  const double ly = domain_.ly();
  double total = 0.0;
  for (Side s : domain_.gamma1()) {
    if (domain_.kind() == DomainKind::interval) {
      const double x = s == Side::left ? 0.0 : lx;
      total += cosine_mode(a.m, x, lx) * cosine_mode(b.m, x, lx);
      continue;
    }
    // Along a side the tangential cosines are L^2-orthonormal.
    switch (s) {
      case Side::left:
      case Side::right: {
        if (a.n != b.n) break;
        const double x = s == Side::left ? 0.0 : lx;
        total += cosine_mode(a.m, x, lx) * cosine_mode(b.m, x, lx);
        break;
      }
      case Side::bottom:
      case Side::top: {
        if (a.m != b.m) break;
        const double y = s == Side::bottom ? 0.0 : ly;
        total += cosine_mode(a.n, y, ly) * cosine_mode(b.n, y, ly);
        break;
      }
    }
  }
  return total;
}

ModeSet neumann_modes(const Domain& domain, int count) {
  if (count < 2) throw ConfigError("mode count K must be at least 2");

  const bool rect = domain.kind() == DomainKind::rectangle;
  const double lx = domain.lx();
  const double ly = domain.ly();

  // The K largest eigenvalues all have m, n < K: (0,0) .. (K-1,0) already
  // beat any mode with m >= K.
  std::vector<Mode> all;
  const int n_max = rect ? count : 1;
  all.reserve(static_cast<size_t>(count) * static_cast<size_t>(n_max));
  for (int m = 0; m < count; ++m) {
    for (int n = 0; n < n_max; ++n) {
      Mode md;
      md.m = m;
      md.n = n;
      const double kx = m * kPi / lx;
      const double ky = rect ? n * kPi / ly : 0.0;
      md.mu = (m == 0 && n == 0) ? 0.0 : -(kx * kx + ky * ky);
      md.norm_const = (m == 0 ? 1.0 / std::sqrt(lx) : std::sqrt(2.0 / lx));
      if (rect) md.norm_const *= (n == 0 ? 1.0 / std::sqrt(ly) : std::sqrt(2.0 / ly));
      all.push_back(md);
    }
  }

  auto lex = [](const Mode& a, const Mode& b) {
    return a.m != b.m ? a.m < b.m : a.n < b.n;
  };
  std::sort(all.begin(), all.end(), [&](const Mode& a, const Mode& b) {
    if (a.mu != b.mu) return a.mu > b.mu;
    return lex(a, b);
  });

  // Floating-point ties (e.g. (2,0) vs (0,1) when Lx = 2 Ly) are regrouped
  // and ordered lexicographically.
  for (size_t start = 0; start < all.size();) {
    size_t stop = start + 1;
    while (stop < all.size() &&
           std::abs(all[stop].mu - all[stop - 1].mu) <=
               kTieTolerance * std::max(1.0, std::abs(all[stop - 1].mu))) {
      ++stop;
    }
    if (stop - start > 1) {
      std::sort(all.begin() + static_cast<std::ptrdiff_t>(start),
                all.begin() + static_cast<std::ptrdiff_t>(stop), lex);
      for (size_t i = start; i < stop; ++i) all[i].degenerate = true;
    }
    start = stop;
  }

  all.resize(static_cast<size_t>(count));
  return ModeSet(domain, std::move(all));
}

double trace_pairing(const ModeSet& modes, int i, int j) {
  return modes.trace_pairing(i, j);
}

Transform::Transform(const ModeSet& modes) : modes_(modes.size()) {
  const Domain& d = modes.domain();
  const bool rect = d.kind() == DomainKind::rectangle;
  nx_ = 2 * (modes.max_m() + 1);
  ny_ = rect ? 2 * (modes.max_n() + 1) : 1;
  // Keep at least 2K points in 1D.
  if (!rect) nx_ = std::max(nx_, 2 * modes.size());

  const double hx = d.lx() / nx_;
  const double hy = rect ? d.ly() / ny_ : 1.0;
  points_.reserve(static_cast<size_t>(nx_ * ny_));
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      points_.push_back({(i + 0.5) * hx, rect ? (j + 0.5) * hy : 0.0});
    }
  }
  weights_ = Vector::Constant(grid_size(), hx * hy);

  synthesis_.resize(grid_size(), modes_);
  for (int g = 0; g < grid_size(); ++g) {
    for (int k = 0; k < modes_; ++k) {
      synthesis_(g, k) = modes.eval(k, points_[static_cast<size_t>(g)]);
    }
  }
  analysis_ = (synthesis_.array().colwise() * weights_.array()).matrix().transpose();
}

Vector Transform::to_grid(const Vector& coeffs) const {
  if (coeffs.size() != modes_) {
    throw ConfigError("to_grid: expected " + std::to_string(modes_) +
                      " coefficients, got " + std::to_string(coeffs.size()));
  }
  return synthesis_ * coeffs;
}

Vector Transform::to_coeff(const Vector& values) const {
  if (values.size() != grid_size()) {
    throw ConfigError("to_coeff: expected " + std::to_string(grid_size()) +
                      " grid values, got " + std::to_string(values.size()));
  }
  return analysis_ * values;
}

double Transform::integrate(const Vector& values) const {
  if (values.size() != grid_size()) throw ConfigError("integrate: grid size mismatch");
  return weights_.dot(values);
}

double Transform::l2_norm(const Vector& values) const {
  return std::sqrt(integrate(values.array().square().matrix()));
}

}  // namespace chstab
