#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "envcrime/fast_marching.hpp"
#include "envcrime/grid.hpp"

namespace envcrime {

struct EikonalOptions {
  double f_min = 1e-6;       // speeds below this are impassable
  double rhs_floor = 1e-12;  // keeps lambda = 1 solves strictly causal
};

struct EikonalSolution {
  ScalarField u;
  std::vector<std::size_t> order;
};

enum class Direction : std::uint8_t { none, forward, backward };

/// Per-axis upwind choice at one gridpoint, taken from the U-field.
struct UpwindStencil {
  Direction x = Direction::none;
  Direction y = Direction::none;
};

namespace detail {

// Three-branch rule: forward when D+ <= min(-D-, 0), backward when -D- < min(D+, 0).
// Missing neighbors (off-grid) never win a branch.
inline Direction choose_direction(double center, double fwd, double bwd) {
  const double plus = fwd - center;   // D+ scaled by h
  const double minus = bwd - center;  // -D- scaled by h
  if (plus <= std::min(minus, 0.0)) return Direction::forward;
  if (minus < std::min(plus, 0.0)) return Direction::backward;
  return Direction::none;
}

inline double neighbor_or_inf(const ScalarField& u, int i, int j) {
  return u.grid().valid(i, j) ? u(i, j) : kInf;
}

inline std::vector<std::uint8_t> passable_mask(const DomainMask& mask, const ScalarField& f, double f_min) {
  std::vector<std::uint8_t> pass(f.size(), 0);
  for (std::size_t k = 0; k < f.size(); ++k) pass[k] = mask.inside(k) && f[k] >= f_min ? 1 : 0;
  return pass;
}

}  // namespace detail

inline UpwindStencil upwind_stencil(const ScalarField& u, int i, int j) {
  const double c = u(i, j);
  UpwindStencil s;
  s.x = detail::choose_direction(c, detail::neighbor_or_inf(u, i + 1, j), detail::neighbor_or_inf(u, i - 1, j));
  s.y = detail::choose_direction(c, detail::neighbor_or_inf(u, i, j + 1), detail::neighbor_or_inf(u, i, j - 1));
  return s;
}

/// Value of the neighbor selected by `d` along an axis (x when `x_axis`).
inline double stencil_neighbor(const ScalarField& w, int i, int j, Direction d, bool x_axis) {
  if (d == Direction::none) return w(i, j);
  const int s = d == Direction::forward ? 1 : -1;
  return x_axis ? w(i + s, j) : w(i, j + s);
}

/// One-point update of f * |grad u| = rhs from the smaller neighbor per axis.
/// Solves the two-sided quadratic when both neighbors stay upwind of the
/// root, otherwise the one-sided update from the smaller neighbor.
inline double point_update(AxisValues n, double f, double rhs, double dx, double dy) {
  const double c = rhs / f;
  const bool hx = std::isfinite(n.x), hy = std::isfinite(n.y);
  if (!hx && !hy) return kInf;
  if (!hy) return n.x + c * dx;
  if (!hx) return n.y + c * dy;
  // Order the axes so `a` is the smaller neighbor.
  double a = n.x, b = n.y, ha = dx, hb = dy;
  if (b < a) {
    std::swap(a, b);
    std::swap(ha, hb);
  }
  if ((b - a) >= c * ha) return a + c * ha;  // the larger neighbor cannot be upwind
  const double alpha = 1.0 / (ha * ha), beta = 1.0 / (hb * hb);
  const double disc = (alpha + beta) * c * c - alpha * beta * (a - b) * (a - b);
  const double root = (alpha * a + beta * b + std::sqrt(std::max(disc, 0.0))) / (alpha + beta);
  return std::max(root, b);
}

inline EikonalSolution solve_eikonal(const DomainMask& mask, const ScalarField& f, const ScalarField& rhs,
                                     const EikonalOptions& opt = {}) {
  const Grid2D& g = mask.grid();
  if (!(f.grid() == g) || !(rhs.grid() == g)) throw std::invalid_argument("solve_eikonal: grid mismatch");
  const auto pass = detail::passable_mask(mask, f, opt.f_min);
  const double dx = g.dx(), dy = g.dy();
  auto res = fast_march(mask, pass, [&](std::size_t p, AxisValues n) {
    return point_update(n, f[p], std::max(rhs[p], opt.rhs_floor), dx, dy);
  });
  return {ScalarField(g, std::move(res.values)), std::move(res.order)};
}

/// Max |f * |D u| - rhs| over inside points with finite u, using the upwind operator.
inline double eikonal_residual(const DomainMask& mask, const ScalarField& f, const ScalarField& rhs,
                               const ScalarField& u, const EikonalOptions& opt = {}) {
  const Grid2D& g = mask.grid();
  double worst = 0.0;
  for (int j = 0; j < g.rows(); ++j)
    for (int i = 0; i < g.cols(); ++i) {
      if (!mask.inside(i, j) || !std::isfinite(u(i, j))) continue;
      const auto s = upwind_stencil(u, i, j);
      const double gx = (u(i, j) - stencil_neighbor(u, i, j, s.x, true)) / g.dx();
      const double gy = (u(i, j) - stencil_neighbor(u, i, j, s.y, false)) / g.dy();
      const double lhs = f(i, j) * std::sqrt(gx * gx + gy * gy);
      worst = std::max(worst, std::abs(lhs - std::max(rhs(i, j), opt.rhs_floor)));
    }
  return worst;
}

/// Solves grad v . grad U = rhs_v in the acceptance order of `eik`, with
/// stencils taken from U, for the two right-hand sides psi*K_lambda/f^2 and
/// K*K_lambda/f^2. Both results vanish outside the domain.
inline std::pair<ScalarField, ScalarField> solve_transport_pair(const DomainMask& mask, const EikonalSolution& eik,
                                                                const ScalarField& f, const ScalarField& psi,
                                                                const ScalarField& cost,
                                                                const ScalarField& cost_lambda) {
  const Grid2D& g = mask.grid();
  const ScalarField& u = eik.u;
  ScalarField v1(g, 0.0), v2(g, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (mask.inside(k) && !std::isfinite(u[k])) v1[k] = v2[k] = kInf;

  const double ix2 = 1.0 / (g.dx() * g.dx()), iy2 = 1.0 / (g.dy() * g.dy());
  for (std::size_t p : eik.order) {
    const int i = g.col_of(p), j = g.row_of(p);
    const auto s = upwind_stencil(u, i, j);
    double wsum = 0.0, acc1 = 0.0, acc2 = 0.0;
    auto add = [&](Direction d, bool x_axis, double inv_h2) {
      if (d == Direction::none) return;
      const int sgn = d == Direction::forward ? 1 : -1;
      const int ii = x_axis ? i + sgn : i, jj = x_axis ? j : j + sgn;
      const double w = (u[p] - u(ii, jj)) * inv_h2;
      if (w == 0.0) return;
      wsum += w;
      acc1 += w * v1(ii, jj);
      acc2 += w * v2(ii, jj);
    };
    add(s.x, true, ix2);
    add(s.y, false, iy2);
    if (!(wsum > 0.0))
      throw SolverError("solve_transport_pair: degenerate upwind stencil at gridpoint (" + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
    const double scale = cost_lambda[p] / (f[p] * f[p]);
    v1[p] = (psi[p] * scale + acc1) / wsum;
    v2[p] = (cost[p] * scale + acc2) / wsum;
  }
  return {std::move(v1), std::move(v2)};
}

struct SweepingOptions {
  EikonalOptions eikonal;
  double tol = 1e-13;
  int max_sweeps = 2000;  // one sweep = all four orderings
};

/// Gauss-Seidel on the same discrete system, alternating four diagonal orderings.
inline EikonalSolution solve_eikonal_sweeping(const DomainMask& mask, const ScalarField& f, const ScalarField& rhs,
                                              const SweepingOptions& opt = {}) {
  const Grid2D& g = mask.grid();
  ScalarField u(g, 0.0);
  std::vector<std::uint8_t> pass = detail::passable_mask(mask, f, opt.eikonal.f_min);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (mask.inside(k)) u[k] = kInf;

  auto relax = [&](int i, int j) {
    const std::size_t p = g.index(i, j);
    if (!pass[p]) return 0.0;
    AxisValues n{std::min(detail::neighbor_or_inf(u, i + 1, j), detail::neighbor_or_inf(u, i - 1, j)),
                 std::min(detail::neighbor_or_inf(u, i, j + 1), detail::neighbor_or_inf(u, i, j - 1))};
    const double v = point_update(n, f[p], std::max(rhs[p], opt.eikonal.rhs_floor), g.dx(), g.dy());
    if (v < u[p]) {
      const double change = std::isfinite(u[p]) ? u[p] - v : kInf;
      u[p] = v;
      return change;
    }
    return 0.0;
  };

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int dir = 0; dir < 4; ++dir) {
      const bool rev_i = dir == 1 || dir == 2, rev_j = dir >= 2;
      for (int jj = 0; jj < g.rows(); ++jj) {
        const int j = rev_j ? g.rows() - 1 - jj : jj;
        for (int ii = 0; ii < g.cols(); ++ii) change = std::max(change, relax(rev_i ? g.cols() - 1 - ii : ii, j));
      }
    }
    if (change < opt.tol) {
      std::vector<std::size_t> order;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (mask.inside(k) && std::isfinite(u[k])) order.push_back(k);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return u[a] < u[b]; });
      return {std::move(u), std::move(order)};
    }
  }
  throw SolverError("solve_eikonal_sweeping: no convergence within sweep cap");
}

}  // namespace envcrime
