#pragma once

#include <cmath>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "envcrime/eikonal.hpp"
#include "envcrime/grid.hpp"
#include "envcrime/loot_grid.hpp"
#include "envcrime/parallel.hpp"

namespace envcrime {

/// Convex combination lambda * psi + (1 - lambda) * K, floored at `floor`.
inline ScalarField scalarized_cost(const ScalarField& psi, const ScalarField& cost, double lambda,
                                   double floor = EikonalOptions{}.rhs_floor) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("scalarized_cost: lambda outside [0, 1]");
  ScalarField out(psi.grid());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::max(lambda * psi[k] + (1.0 - lambda) * cost[k], floor);
  return out;
}

/// Scalarized value U and the restricted path functionals V1 (detection) and
/// V2 (travel cost) for one weight.
struct ValueTriplet {
  double lambda = 0.0;
  ScalarField U;
  ScalarField V1;
  ScalarField V2;
};

struct LambdaSweep {
  std::vector<ValueTriplet> triplets;

  double lambda(std::size_t k) const { return triplets[k].lambda; }
  std::size_t size() const { return triplets.size(); }
};

inline ValueTriplet solve_scalarized(const Problem& pb, double lambda, const EikonalOptions& opt = {}) {
  ScalarField k_lambda = scalarized_cost(pb.psi, pb.cost, lambda, opt.rhs_floor);
  EikonalSolution eik = solve_eikonal(pb.mask, pb.speed, k_lambda, opt);
  auto [v1, v2] = solve_transport_pair(pb.mask, eik, pb.speed, pb.psi, pb.cost, k_lambda);
  return {lambda, std::move(eik.u), std::move(v1), std::move(v2)};
}

inline double lambda_node(int k, int n_lambda) { return k == n_lambda ? 1.0 : static_cast<double>(k) / n_lambda; }

struct SweepOptions {
  int workers = 1;
  EikonalOptions eikonal;
  /// Called once per solved weight (possibly from worker threads, serialized).
  std::function<void(int k, const ValueTriplet&)> observer;
};

/// Solves every weight lambda_k = k / n_lambda and hands each triplet to
/// `sink` under a lock. Triplets are not retained.
template <class Sink>
void for_each_lambda(const Problem& pb, int n_lambda, const SweepOptions& opt, Sink&& sink) {
  if (n_lambda < 1) throw std::invalid_argument("lambda sweep: need n_lambda >= 1");
  std::mutex lock;
  parallel_for(static_cast<std::size_t>(n_lambda) + 1, opt.workers, [&](std::size_t k) {
    ValueTriplet t;
    try {
      t = solve_scalarized(pb, lambda_node(static_cast<int>(k), n_lambda), opt.eikonal);
    } catch (const SolverError& e) {
      throw SolverError("lambda index " + std::to_string(k) + ": " + e.what());
    }
    std::lock_guard guard(lock);
    if (opt.observer) opt.observer(static_cast<int>(k), t);
    sink(static_cast<int>(k), t);
  });
}

inline LambdaSweep run_lambda_sweep(const Problem& pb, int n_lambda, const SweepOptions& opt = {}) {
  LambdaSweep sweep;
  sweep.triplets.resize(static_cast<std::size_t>(n_lambda) + 1);
  for_each_lambda(pb, n_lambda, opt, [&](int k, ValueTriplet& t) { sweep.triplets[k] = std::move(t); });
  return sweep;
}

/// Cheapest pre-extraction cost from the boundary: kappa * tau for constant
/// cost, otherwise the Eikonal solve with rhs = K.
inline ScalarField compute_R(const Problem& pb, const EikonalOptions& opt = {}) {
  if (pb.kappa) {
    ScalarField tau = solve_eikonal(pb.mask, pb.speed, ScalarField(pb.grid, 1.0), opt).u;
    return tau * *pb.kappa;
  }
  return solve_eikonal(pb.mask, pb.speed, pb.cost, opt).u;
}

struct ProfitMapA {
  ScalarField P_a;
  std::vector<int> argmax;  // -1 where no weight reaches the point
  ScalarField R;
};

/// Payoff B e^{-J1} - J2 of one triplet at one gridpoint.
inline double lambda_payoff(double benefit, double j1, double j2) {
  if (!std::isfinite(j2)) return -kInf;
  return benefit * std::exp(-j1) - j2;
}

/// Running per-gridpoint max over weights; ties keep the smaller index.
class PayoffReducer {
 public:
  PayoffReducer(const ScalarField& benefit, ScalarField R)
      : benefit_(&benefit), best_(benefit.grid(), -kInf), argmax_(benefit.size(), -1), R_(std::move(R)) {}

  void add(int k, const ValueTriplet& t) {
    for (std::size_t p = 0; p < best_.size(); ++p) {
      const double v = lambda_payoff((*benefit_)[p], t.V1[p], t.V2[p]);
      const bool better = argmax_[p] < 0 ? v > -kInf : (v > best_[p] || (v == best_[p] && k < argmax_[p]));
      if (better) {
        best_[p] = v;
        argmax_[p] = k;
      }
    }
  }

  ProfitMapA finish() && {
    ScalarField P(best_.grid());
    for (std::size_t p = 0; p < P.size(); ++p) P[p] = best_[p] - R_[p];
    for (std::size_t p = 0; p < P.size(); ++p)
      if (std::isnan(P[p])) P[p] = -kInf;
    return {std::move(P), std::move(argmax_), std::move(R_)};
  }

 private:
  const ScalarField* benefit_;
  ScalarField best_;
  std::vector<int> argmax_;
  ScalarField R_;
};

/// Lambda-grid search over a stored sweep.
inline ProfitMapA profit_map_a(const Problem& pb, const LambdaSweep& sweep, const ScalarField& R) {
  PayoffReducer red(pb.benefit, R);
  for (std::size_t k = 0; k < sweep.size(); ++k) red.add(static_cast<int>(k), sweep.triplets[k]);
  return std::move(red).finish();
}

/// Same result as profit_map_a(run_lambda_sweep(...)) without keeping the sweep in memory.
inline ProfitMapA model_a_profit(const Problem& pb, const ScalarField& R, int n_lambda, const SweepOptions& opt = {}) {
  PayoffReducer red(pb.benefit, R);
  for_each_lambda(pb, n_lambda, opt, [&](int k, const ValueTriplet& t) { red.add(k, t); });
  return std::move(red).finish();
}

/// Per-gridpoint largest payoff jump between consecutive weights.
inline ScalarField lambda_payoff_gap(const Problem& pb, const LambdaSweep& sweep) {
  ScalarField gap(pb.grid, 0.0);
  for (std::size_t k = 0; k + 1 < sweep.size(); ++k)
    for (std::size_t p = 0; p < gap.size(); ++p) {
      const double a = lambda_payoff(pb.benefit[p], sweep.triplets[k].V1[p], sweep.triplets[k].V2[p]);
      const double b = lambda_payoff(pb.benefit[p], sweep.triplets[k + 1].V1[p], sweep.triplets[k + 1].V2[p]);
      if (std::isfinite(a) && std::isfinite(b)) gap[p] = std::max(gap[p], std::abs(a - b));
    }
  return gap;
}

/// Linearized-cost profit B - (B + 1) u^{lambda#} - R with lambda# = b / (b + 1),
/// evaluated on the loot grid and interpolated linearly in B between the
/// bracketing nodes. A constant benefit takes a single solve.
inline ScalarField profit_sharp(const Problem& pb, const ScalarField& R, int n_b, const SweepOptions& opt = {}) {
  const LootGrid loot(pb.benefit, pb.mask, n_b);
  const std::size_t n = pb.grid.size();
  std::vector<int> bracket(n, 0);
  for (std::size_t p = 0; p < n; ++p)
    if (pb.mask.inside(p)) bracket[p] = loot.bracket(pb.benefit[p]);
  ScalarField lower(pb.grid, 0.0), upper(pb.grid, 0.0);
  std::mutex lock;
  parallel_for(loot.nodes().size(), opt.workers, [&](std::size_t m) {
    const double b = loot.nodes()[m];
    const double lam = b / (b + 1.0);
    ScalarField rhs = scalarized_cost(pb.psi, pb.cost, lam, opt.eikonal.rhs_floor);
    ScalarField w = solve_eikonal(pb.mask, pb.speed, rhs, opt.eikonal).u;
    w *= (b + 1.0);
    std::lock_guard guard(lock);
    for (std::size_t p = 0; p < n; ++p) {
      if (!pb.mask.inside(p)) continue;
      if (bracket[p] == static_cast<int>(m)) lower[p] = w[p];
      if (loot.upper(bracket[p]) == static_cast<int>(m)) upper[p] = w[p];
    }
  });
  ScalarField out(pb.grid, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (!pb.mask.inside(p)) {
      out[p] = pb.benefit[p];
      continue;
    }
    double w = lower[p];
    if (!loot.degenerate()) {
      const double b0 = loot.nodes()[bracket[p]], b1 = loot.nodes()[bracket[p] + 1];
      const double t = std::clamp((pb.benefit[p] - b0) / (b1 - b0), 0.0, 1.0);
      w = std::isfinite(lower[p]) && std::isfinite(upper[p]) ? (1 - t) * lower[p] + t * upper[p] : kInf;
    }
    out[p] = pb.benefit[p] - w - R[p];
    if (std::isnan(out[p])) out[p] = -kInf;
  }
  return out;
}

/// Single-site lower bound using the exact benefit at x0.
inline double profit_sharp_at(const Problem& pb, const ScalarField& R, Point x0, const EikonalOptions& opt = {}) {
  const double b = sample_bilinear(pb.benefit, x0);
  const double lam = b / (b + 1.0);
  ScalarField u = solve_eikonal(pb.mask, pb.speed, scalarized_cost(pb.psi, pb.cost, lam, opt.rhs_floor), opt).u;
  return b - (b + 1.0) * sample_bilinear(u, x0) - sample_bilinear(R, x0);
}

/// One row of the lambda profile at a point.
struct LambdaSample {
  double lambda = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double payoff = 0.0;  // B e^{-J1} - J2 - R
};

inline LambdaSample sample_triplet(const Problem& pb, const ValueTriplet& t, double R_at, Point x0) {
  const double j1 = sample_bilinear(t.V1, x0), j2 = sample_bilinear(t.V2, x0);
  return {t.lambda, j1, j2, lambda_payoff(sample_bilinear(pb.benefit, x0), j1, j2) - R_at};
}

inline std::vector<LambdaSample> lambda_profile_at(const Problem& pb, const LambdaSweep& sweep, const ScalarField& R,
                                                   Point x0) {
  if (!point_inside(pb.mask, x0)) throw std::invalid_argument("lambda_profile_at: point outside the domain");
  std::vector<LambdaSample> rows;
  const double r = sample_bilinear(R, x0);
  for (const auto& t : sweep.triplets) rows.push_back(sample_triplet(pb, t, r, x0));
  return rows;
}

/// Non-dominated subset of (J1, J2) samples, sorted by J1 ascending; exact
/// duplicates are kept once.
inline std::vector<LambdaSample> pareto_filter(std::vector<LambdaSample> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.J1 < b.J1 || (a.J1 == b.J1 && a.J2 < b.J2);
  });
  std::vector<LambdaSample> front;
  for (const auto& r : rows) {
    if (!std::isfinite(r.J1) || !std::isfinite(r.J2)) continue;
    // Sorted by J1, so r is dominated iff some earlier point has J2 <= r.J2.
    if (!front.empty() && front.back().J2 <= r.J2) continue;
    front.push_back(r);
  }
  return front;
}

inline std::vector<LambdaSample> pareto_front_at(const Problem& pb, const LambdaSweep& sweep, const ScalarField& R,
                                                 Point x0) {
  return pareto_filter(lambda_profile_at(pb, sweep, R, x0));
}

}  // namespace envcrime
