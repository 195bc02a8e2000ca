#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace envcrime {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Raised when a solver reaches a state that the discretization rules out
/// (degenerate stencil, missing admissible root, non-convergence).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform Cartesian grid on [0, xmax] x [0, ymax]. Counts are cells, so a
/// grid with nx cells per row has nx + 1 gridpoints per row. Gridpoint (i, j)
/// sits at (i * dx, j * dy) and is stored at index j * cols() + i.
class Grid2D {
 public:
  Grid2D() = default;

  Grid2D(int nx, int ny, double xmax, double ymax)
      : nx_(nx), ny_(ny), xmax_(xmax), ymax_(ymax) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("Grid2D: need at least 2 cells per axis");
    if (!(xmax > 0.0) || !(ymax > 0.0) || !std::isfinite(xmax) || !std::isfinite(ymax))
      throw std::invalid_argument("Grid2D: extents must be positive and finite");
    dx_ = xmax / nx;
    dy_ = ymax / ny;
  }

  /// Grid with exact spacings; extents follow from them.
  static Grid2D from_spacing(int nx, int ny, double dx, double dy) {
    Grid2D g(nx, ny, nx * dx, ny * dy);
    g.dx_ = dx;
    g.dy_ = dy;
    return g;
  }

  /// Square grid on the unit square with `points` gridpoints per axis.
  static Grid2D unit_square(int points) { return Grid2D(points - 1, points - 1, 1.0, 1.0); }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cols() const { return nx_ + 1; }
  int rows() const { return ny_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(cols()) * rows(); }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double xmax() const { return xmax_; }
  double ymax() const { return ymax_; }
  double cell_area() const { return dx_ * dy_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * cols() + i; }
  int col_of(std::size_t idx) const { return static_cast<int>(idx % cols()); }
  int row_of(std::size_t idx) const { return static_cast<int>(idx / cols()); }
  double x(int i) const { return i * dx_; }
  double y(int j) const { return j * dy_; }
  Point point(int i, int j) const { return {x(i), y(j)}; }
  bool valid(int i, int j) const { return i >= 0 && j >= 0 && i < cols() && j < rows(); }

  bool contains(Point p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= xmax_ && p.y <= ymax_;
  }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.dx_ == b.dx_ && a.dy_ == b.dy_;
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  double xmax_ = 0.0;
  double ymax_ = 0.0;
  double dx_ = 0.0;
  double dy_ = 0.0;
};

/// One double per gridpoint. Value functions use +inf for unreachable points.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid2D& grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}
  ScalarField(const Grid2D& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("ScalarField: value count does not match grid");
  }

  template <class Fn>
  static ScalarField from_function(const Grid2D& grid, Fn&& fn) {
    ScalarField out(grid);
    for (int j = 0; j < grid.rows(); ++j)
      for (int i = 0; i < grid.cols(); ++i) out(i, j) = fn(grid.x(i), grid.y(j));
    return out;
  }

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  ScalarField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

inline ScalarField operator*(ScalarField f, double s) { return f *= s; }

/// Inside-Omega flags per gridpoint. Everything outside carries Dirichlet data.
class DomainMask {
 public:
  DomainMask() = default;
  DomainMask(const Grid2D& grid, std::vector<std::uint8_t> inside)
      : grid_(grid), inside_(std::move(inside)) {
    if (inside_.size() != grid_.size())
      throw std::invalid_argument("DomainMask: flag count does not match grid");
    std::size_t n = 0;
    for (auto v : inside_) n += v ? 1 : 0;
    if (n == 0) throw std::invalid_argument("DomainMask: no inside gridpoints");
    if (n == inside_.size()) throw std::invalid_argument("DomainMask: no outside gridpoints");
    inside_count_ = n;
  }

  /// Rasterizes a membership predicate by gridpoint position.
  template <class Pred>
  static DomainMask from_predicate(const Grid2D& grid, Pred&& inside) {
    std::vector<std::uint8_t> flags(grid.size(), 0);
    for (int j = 0; j < grid.rows(); ++j)
      for (int i = 0; i < grid.cols(); ++i)
        flags[grid.index(i, j)] = inside(grid.x(i), grid.y(j)) ? 1 : 0;
    return DomainMask(grid, std::move(flags));
  }

  /// Open unit square: every gridpoint off the grid border is inside.
  static DomainMask open_rectangle(const Grid2D& grid) {
    std::vector<std::uint8_t> flags(grid.size(), 0);
    for (int j = 1; j < grid.rows() - 1; ++j)
      for (int i = 1; i < grid.cols() - 1; ++i) flags[grid.index(i, j)] = 1;
    return DomainMask(grid, std::move(flags));
  }

  const Grid2D& grid() const { return grid_; }
  bool inside(int i, int j) const { return inside_[grid_.index(i, j)] != 0; }
  bool inside(std::size_t idx) const { return inside_[idx] != 0; }
  std::size_t inside_count() const { return inside_count_; }
  std::span<const std::uint8_t> flags() const { return inside_; }

  /// True when (i, j) is outside and 4-adjacent to an inside point: the discrete boundary.
  bool on_boundary(int i, int j) const {
    if (inside(i, j)) return false;
    constexpr int di[] = {1, -1, 0, 0};
    constexpr int dj[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int ii = i + di[k], jj = j + dj[k];
      if (grid_.valid(ii, jj) && inside(ii, jj)) return true;
    }
    return false;
  }

 private:
  Grid2D grid_;
  std::vector<std::uint8_t> inside_;
  std::size_t inside_count_ = 0;
};

/// A full scenario. `kappa` is set when the travel cost is the constant field kappa.
struct Problem {
  Grid2D grid;
  DomainMask mask;
  ScalarField benefit;
  ScalarField psi;
  ScalarField speed;
  ScalarField cost;
  double p_tilde = 0.0;
  std::optional<double> kappa;

  void validate() const {
    const ScalarField* fields[] = {&benefit, &psi, &speed, &cost};
    for (const auto* f : fields)
      if (!(f->grid() == grid)) throw std::invalid_argument("Problem: field on a different grid");
    if (!(mask.grid() == grid)) throw std::invalid_argument("Problem: mask on a different grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!mask.inside(k)) continue;
      if (!(psi[k] >= 0.0)) throw std::invalid_argument("Problem: negative detection rate");
      if (!(speed[k] >= 0.0)) throw std::invalid_argument("Problem: negative speed");
      if (!(cost[k] > 0.0)) throw std::invalid_argument("Problem: travel cost must be positive");
      if (!(benefit[k] >= 0.0)) throw std::invalid_argument("Problem: negative benefit");
    }
  }
};

/// Rectangle-rule quadrature of field^exponent over inside gridpoints.
inline double integrate_field(const ScalarField& field, const DomainMask& mask, double exponent = 1.0) {
  if (!(exponent >= 1.0)) throw std::domain_error("integrate_field: exponent must be >= 1");
  const bool integral_exponent = exponent == std::floor(exponent);
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!mask.inside(k)) continue;
    double v = field[k];
    if (v < 0.0 && !integral_exponent)
      throw std::domain_error("integrate_field: negative value with non-integer exponent");
    sum += exponent == 1.0 ? v : std::pow(v, exponent);
  }
  return sum * field.grid().cell_area();
}

/// Scales `shape` by the constant that makes the patrol budget hold with equality.
inline ScalarField normalize_budget(const ScalarField& shape, const DomainMask& mask, double budget,
                                    double gamma = 1.0) {
  if (!(budget > 0.0)) throw std::invalid_argument("normalize_budget: budget must be positive");
  if (!(gamma >= 1.0)) throw std::invalid_argument("normalize_budget: gamma must be >= 1");
  for (std::size_t k = 0; k < shape.size(); ++k)
    if (mask.inside(k) && shape[k] < 0.0)
      throw std::invalid_argument("normalize_budget: negative detection shape");
  const double total = integrate_field(shape, mask, gamma);
  if (!(total > 0.0)) throw std::invalid_argument("normalize_budget: shape vanishes on the domain");
  const double mu = std::pow(budget / total, 1.0 / gamma);
  return shape * mu;
}

/// Bilinear interpolation; points on the far edge use the last cell.
inline double sample_bilinear(const ScalarField& field, Point p) {
  const Grid2D& g = field.grid();
  if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= g.xmax() * (1 + 1e-12) && p.y <= g.ymax() * (1 + 1e-12)))
    throw std::out_of_range("sample_bilinear: point outside grid box");
  const double sx = p.x / g.dx();
  const double sy = p.y / g.dy();
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx() - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny() - 1);
  const double tx = std::clamp(sx - i, 0.0, 1.0);
  const double ty = std::clamp(sy - j, 0.0, 1.0);
  const double v00 = field(i, j), v10 = field(i + 1, j);
  const double v01 = field(i, j + 1), v11 = field(i + 1, j + 1);
  // Skip zero-weight corners so an infinite neighbor does not poison exact node hits.
  auto term = [](double w, double v) { return w == 0.0 ? 0.0 : w * v; };
  return term((1 - tx) * (1 - ty), v00) + term(tx * (1 - ty), v10) + term((1 - tx) * ty, v01) +
         term(tx * ty, v11);
}

/// Nearest gridpoint to p (clamped to the grid).
inline std::pair<int, int> nearest_node(const Grid2D& g, Point p) {
  int i = static_cast<int>(std::lround(p.x / g.dx()));
  int j = static_cast<int>(std::lround(p.y / g.dy()));
  return {std::clamp(i, 0, g.nx()), std::clamp(j, 0, g.ny())};
}

/// True when every corner of the cell holding p is inside (p is not in a boundary cell).
inline bool in_interior_cell(const DomainMask& mask, Point p) {
  const Grid2D& g = mask.grid();
  const int i = std::clamp(static_cast<int>(std::floor(p.x / g.dx())), 0, g.nx() - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y / g.dy())), 0, g.ny() - 1);
  return mask.inside(i, j) && mask.inside(i + 1, j) && mask.inside(i, j + 1) && mask.inside(i + 1, j + 1);
}

/// Inside test for an arbitrary point: nearest gridpoint is inside.
inline bool point_inside(const DomainMask& mask, Point p) {
  if (!mask.grid().contains(p)) return false;
  auto [i, j] = nearest_node(mask.grid(), p);
  return mask.inside(i, j);
}

}  // namespace envcrime
