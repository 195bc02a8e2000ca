#pragma once

#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "envcrime/eikonal.hpp"
#include "envcrime/grid.hpp"
#include "envcrime/loot_grid.hpp"
#include "envcrime/parallel.hpp"

namespace envcrime {

/// Expected remaining cost when a detection confiscates loot worth b and
/// sends the extractor home along the cheapest route.
struct TerminatedSolution {
  double b = 0.0;
  ScalarField u_bar;
  std::vector<std::size_t> order;
};

namespace detail {

/// Local coefficients of f |grad w| = alpha - psi * w at one gridpoint.
struct TerminatedCoeffs {
  double f;
  double alpha;  // K + psi (b + R)
  double psi;
};

inline double terminated_one_sided(double a, double h, const TerminatedCoeffs& c) {
  if (c.alpha - c.psi * a <= 0.0) return a;  // effective cost clamped at zero
  return (a * c.f + c.alpha * h) / (c.f + c.psi * h);
}

}  // namespace detail

/// Per-point update for the randomly-terminated scheme. The right-hand side
/// depends on the unknown, so the two-sided case is a quadratic whose
/// admissible root lies in [larger neighbor, alpha / psi].
inline double terminated_update(AxisValues n, double dx, double dy, const detail::TerminatedCoeffs& c) {
  const bool hx = std::isfinite(n.x), hy = std::isfinite(n.y);
  if (!hx && !hy) return kInf;
  if (!hy) return detail::terminated_one_sided(n.x, dx, c);
  if (!hx) return detail::terminated_one_sided(n.y, dy, c);
  double a = n.x, b = n.y, ha = dx, hb = dy;
  if (b < a) {
    std::swap(a, b);
    std::swap(ha, hb);
  }
  const double one = detail::terminated_one_sided(a, ha, c);
  if (one <= b) return one;

  const double wmax = c.psi > 0.0 ? c.alpha / c.psi : kInf;
  auto g = [&](double w) {
    const double ex = (w - a) / ha, ey = std::max(w - b, 0.0) / hb;
    return std::sqrt(ex * ex + ey * ey) - (c.alpha - c.psi * w) / c.f;
  };
  const double ia = 1.0 / (ha * ha), ib = 1.0 / (hb * hb), k2 = c.psi * c.psi / (c.f * c.f);
  const double A = ia + ib - k2;
  const double B = a * ia + b * ib - c.alpha * c.psi / (c.f * c.f);
  const double C = a * a * ia + b * b * ib - c.alpha * c.alpha / (c.f * c.f);
  const double slack = 1e-12 * std::max(1.0, std::abs(b));
  double best = kInf, best_res = kInf;
  auto consider = [&](double w) {
    if (!std::isfinite(w) || w < b - slack || w > wmax + slack) return;
    const double r = std::abs(g(w));
    if (r < best_res) {
      best = w;
      best_res = r;
    }
  };
  if (std::abs(A) > 1e-14 * (ia + ib)) {
    const double disc = B * B - A * C;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      consider((B + s) / A);
      consider((B - s) / A);
    }
  } else if (B != 0.0) {
    consider(C / (2.0 * B));
  }
  const double tol = 1e-10 * std::max(1.0, std::abs(c.alpha / c.f));
  if (best_res <= tol) return std::max(best, b);

  // Bisection on the monotone residual as a fallback for ill-conditioned quadratics.
  double lo = b, hi = std::isfinite(wmax) ? wmax : one;
  if (g(hi) < 0.0) throw SolverError("terminated_update: no admissible root");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline TerminatedSolution solve_terminated(const Problem& pb, const ScalarField& R, double b,
                                           const EikonalOptions& opt = {}) {
  if (!(b >= 0.0)) throw std::invalid_argument("solve_terminated: loot value must be non-negative");
  if (!(R.grid() == pb.grid)) throw std::invalid_argument("solve_terminated: R on a different grid");
  const auto pass = detail::passable_mask(pb.mask, pb.speed, opt.f_min);
  const double dx = pb.grid.dx(), dy = pb.grid.dy();
  auto res = fast_march(pb.mask, pass, [&](std::size_t p, AxisValues n) {
    const detail::TerminatedCoeffs c{pb.speed[p], pb.cost[p] + pb.psi[p] * (b + R[p]), pb.psi[p]};
    return terminated_update(n, dx, dy, c);
  });
  return {b, ScalarField(pb.grid, std::move(res.values)), std::move(res.order)};
}

/// Max residual of the discrete randomly-terminated equation over inside
/// points with finite values (effective cost clamped at zero).
inline double terminated_residual(const Problem& pb, const ScalarField& R, const TerminatedSolution& sol) {
  const Grid2D& g = pb.grid;
  const ScalarField& w = sol.u_bar;
  double worst = 0.0;
  for (int j = 0; j < g.rows(); ++j)
    for (int i = 0; i < g.cols(); ++i) {
      if (!pb.mask.inside(i, j) || !std::isfinite(w(i, j))) continue;
      auto axis = [&](double fwd, double bwd, double h) { return std::min({(fwd - w(i, j)) / h, (bwd - w(i, j)) / h, 0.0}); };
      const double gx = axis(detail::neighbor_or_inf(w, i + 1, j), detail::neighbor_or_inf(w, i - 1, j), g.dx());
      const double gy = axis(detail::neighbor_or_inf(w, i, j + 1), detail::neighbor_or_inf(w, i, j - 1), g.dy());
      const double cost = std::max(pb.cost(i, j) + pb.psi(i, j) * (sol.b + R(i, j) - w(i, j)), 0.0);
      worst = std::max(worst, std::abs(std::sqrt(gx * gx + gy * gy) - cost / pb.speed(i, j)));
    }
  return worst;
}

inline std::vector<TerminatedSolution> run_b_sweep(const Problem& pb, const ScalarField& R, int n_b, int workers = 1,
                                                   const EikonalOptions& opt = {}) {
  const LootGrid loot(pb.benefit, pb.mask, n_b);
  std::vector<TerminatedSolution> out(loot.nodes().size());
  parallel_for(out.size(), workers, [&](std::size_t m) {
    try {
      out[m] = solve_terminated(pb, R, loot.nodes()[m], opt);
    } catch (const SolverError& e) {
      throw SolverError("loot index " + std::to_string(m) + ": " + e.what());
    }
  });
  return out;
}

/// Two-sided bracket of the Model G profit. `lower` uses the loot node above
/// B and `upper` the node below, so lower <= upper and the gap is at most
/// the loot-grid width.
struct ProfitBracketG {
  ScalarField lower;
  ScalarField upper;
  double b_min = 0.0;
  double b_max = 0.0;
  int n_b = 0;

  ScalarField midpoint() const {
    ScalarField mid(lower.grid());
    for (std::size_t p = 0; p < mid.size(); ++p) mid[p] = 0.5 * (lower[p] + upper[p]);
    return mid;
  }

  /// Gridpoints whose bracket straddles the threshold.
  std::vector<std::uint8_t> straddling(double p_tilde) const {
    std::vector<std::uint8_t> out(lower.size(), 0);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = lower[p] <= p_tilde && p_tilde <= upper[p];
    return out;
  }
};

namespace detail {

inline ProfitBracketG assemble_bracket(const Problem& pb, const ScalarField& R, const LootGrid& loot,
                                       const ScalarField& u_lo, const ScalarField& u_hi) {
  ProfitBracketG out{ScalarField(pb.grid), ScalarField(pb.grid), loot.min(), loot.max(), loot.intervals()};
  for (std::size_t p = 0; p < pb.grid.size(); ++p) {
    auto profit = [&](double u) {
      const double v = pb.benefit[p] - u - R[p];
      return std::isnan(v) ? -kInf : v;
    };
    out.upper[p] = profit(u_lo[p]);
    out.lower[p] = profit(u_hi[p]);
  }
  return out;
}

inline std::vector<int> bracket_indices(const Problem& pb, const LootGrid& loot) {
  std::vector<int> idx(pb.grid.size(), 0);
  for (std::size_t p = 0; p < idx.size(); ++p)
    if (pb.mask.inside(p)) idx[p] = loot.bracket(pb.benefit[p]);
  return idx;
}

}  // namespace detail

inline ProfitBracketG profit_bracket_g(const Problem& pb, const std::vector<TerminatedSolution>& sweep,
                                       const ScalarField& R) {
  const LootGrid loot(pb.benefit, pb.mask, std::max<int>(1, static_cast<int>(sweep.size()) - 1));
  if (loot.nodes().size() != sweep.size()) throw std::invalid_argument("profit_bracket_g: sweep does not match loot grid");
  const auto idx = detail::bracket_indices(pb, loot);
  ScalarField u_lo(pb.grid, 0.0), u_hi(pb.grid, 0.0);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (!pb.mask.inside(p)) continue;
    u_lo[p] = sweep[idx[p]].u_bar[p];
    u_hi[p] = sweep[loot.upper(idx[p])].u_bar[p];
  }
  return detail::assemble_bracket(pb, R, loot, u_lo, u_hi);
}

/// Same as profit_bracket_g(run_b_sweep(...)) without retaining every solve.
inline ProfitBracketG model_g_profit(const Problem& pb, const ScalarField& R, int n_b, int workers = 1,
                                     const EikonalOptions& opt = {}) {
  const LootGrid loot(pb.benefit, pb.mask, n_b);
  const auto idx = detail::bracket_indices(pb, loot);
  ScalarField u_lo(pb.grid, 0.0), u_hi(pb.grid, 0.0);
  std::mutex lock;
  parallel_for(loot.nodes().size(), workers, [&](std::size_t m) {
    TerminatedSolution s;
    try {
      s = solve_terminated(pb, R, loot.nodes()[m], opt);
    } catch (const SolverError& e) {
      throw SolverError("loot index " + std::to_string(m) + ": " + e.what());
    }
    std::lock_guard guard(lock);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (!pb.mask.inside(p)) continue;
      if (idx[p] == static_cast<int>(m)) u_lo[p] = s.u_bar[p];
      if (loot.upper(idx[p]) == static_cast<int>(m)) u_hi[p] = s.u_bar[p];
    }
  });
  return detail::assemble_bracket(pb, R, loot, u_lo, u_hi);
}

}  // namespace envcrime
