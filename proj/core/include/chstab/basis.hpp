#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "chstab/types.hpp"

namespace chstab {

enum class DomainKind { interval, rectangle };

// Boundary sides. An interval only has `left` (x = 0) and `right` (x = L).
enum class Side { left, right, bottom, top };

std::string_view to_string(Side side);
std::string_view to_string(DomainKind kind);
Side parse_side(std::string_view name);

using Point = std::array<double, 2>;

// Interval (0, L) or rectangle (0, Lx) x (0, Ly) with the controlled boundary
// part Gamma_1 given as a nonempty set of sides.
class Domain {
 public:
  static Domain interval(double length, std::vector<Side> gamma1);
  static Domain rectangle(double lx, double ly, std::vector<Side> gamma1);

  DomainKind kind() const { return kind_; }
  int dimension() const { return kind_ == DomainKind::interval ? 1 : 2; }
  double lx() const { return lx_; }
  // 1 for an interval, so tensor formulas stay uniform.
  double ly() const { return ly_; }
  double measure() const;
  // Counting measure on endpoints in 1D, arc length in 2D.
  double gamma1_measure() const;
  const std::vector<Side>& gamma1() const { return gamma1_; }
  bool controls(Side side) const;

  // Sample points on Gamma_1: the endpoints in 1D, `per_side` midpoints per
  // side in 2D.
  std::vector<Point> gamma1_samples(int per_side) const;

 private:
  Domain(DomainKind kind, double lx, double ly, std::vector<Side> gamma1);

  DomainKind kind_;
  double lx_;
  double ly_;
  std::vector<Side> gamma1_;
};

// One Neumann-Laplacian eigenfunction
//   e(x, y) = norm_const * cos(m pi x / Lx) * cos(n pi y / Ly),  Delta e = mu e.
struct Mode {
  int m = 0;
  int n = 0;
  double mu = 0.0;
  double norm_const = 0.0;
  // True when mu ties with a neighbouring mode (rectangle degeneracy).
  bool degenerate = false;
};

// Normalized 1D cosine sqrt(2/L) cos(m pi x / L), or 1/sqrt(L) for m = 0.
double cosine_mode(int m, double x, double length);

class ModeSet {
 public:
  ModeSet(Domain domain, std::vector<Mode> modes);

  const Domain& domain() const { return domain_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const Mode& operator[](int i) const { return modes_[static_cast<size_t>(i)]; }
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }

  Vector eigenvalues() const;
  int max_m() const;
  int max_n() const;
  bool has_degeneracy() const;

  double eval(int i, Point p) const;
  // <e_i, e_j> in L^2(Gamma_1), closed form.
  double trace_pairing(int i, int j) const;
  // K x K matrix of trace pairings.
  const Matrix& trace_gram() const { return trace_gram_; }

 private:
  double compute_pairing(int i, int j) const;

  Domain domain_;
  std::vector<Mode> modes_;
  Matrix trace_gram_;
};

// The K eigenpairs of the Neumann Laplacian closest to zero, sorted by
// decreasing mu. Ties (rectangles) are broken by lexicographic (m, n).
ModeSet neumann_modes(const Domain& domain, int count);

double trace_pairing(const ModeSet& modes, int i, int j);

// Cosine collocation transform on a midpoint grid. The grid has 2(m_max + 1)
// points per direction, so products of up to four resolved modes integrate
// exactly and the cubic nonlinearity is computed alias-free.
class Transform {
 public:
  explicit Transform(const ModeSet& modes);

  int grid_size() const { return static_cast<int>(points_.size()); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  // Row-major in x: point (i, j) at index j * nx + i.
  const std::vector<Point>& points() const { return points_; }
  const Vector& weights() const { return weights_; }

  Vector to_grid(const Vector& coeffs) const;
  Vector to_coeff(const Vector& values) const;
  double integrate(const Vector& values) const;
  double l2_norm(const Vector& values) const;

 private:
  int modes_;
  int nx_;
  int ny_;
  std::vector<Point> points_;
  Vector weights_;
  Matrix synthesis_;  // grid x K
  Matrix analysis_;   // K x grid
};

}  // namespace chstab
