#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "envcrime/multiobjective.hpp"
#include "envcrime/parallel.hpp"
#include "envcrime/scenarios.hpp"

namespace envcrime {

struct RegionStats {
  std::vector<std::uint8_t> pristine;
  double A_p = 0.0;  // pristine inside gridpoints / inside gridpoints
  double V_p = 0.0;  // benefit share of the pristine region
  double P_max = -kInf;
};

inline RegionStats region_stats(const ScalarField& P, const ScalarField& B, const DomainMask& mask, double p_tilde = 0.0) {
  if (!(P.grid() == mask.grid()) || !(B.grid() == mask.grid()))
    throw std::invalid_argument("region_stats: fields on different grids");
  RegionStats s;
  s.pristine.assign(P.size(), 0);
  std::size_t count = 0;
  double b_all = 0.0, b_pristine = 0.0;
  for (std::size_t k = 0; k < P.size(); ++k) {
    if (!mask.inside(k)) continue;
    const bool quiet = !(P[k] > p_tilde);
    s.pristine[k] = quiet;
    count += quiet;
    b_all += B[k];
    if (quiet) b_pristine += B[k];
    if (P[k] > s.P_max) s.P_max = P[k];
  }
  s.A_p = static_cast<double>(count) / static_cast<double>(mask.inside_count());
  s.V_p = b_all > 0.0 ? b_pristine / b_all : s.A_p;
  return s;
}

/// Points whose gross payoff P + R is at least (1 - epsilon) of its maximum.
inline std::vector<std::uint8_t> high_value_region(const ScalarField& P, const ScalarField& R, const DomainMask& mask,
                                                   double epsilon = 0.85) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("high_value_region: epsilon outside [0, 1)");
  double best = -kInf;
  for (std::size_t k = 0; k < P.size(); ++k)
    if (mask.inside(k)) best = std::max(best, P[k] + R[k]);
  std::vector<std::uint8_t> out(P.size(), 0);
  const double threshold = (1.0 - epsilon) * best;
  for (std::size_t k = 0; k < P.size(); ++k)
    out[k] = mask.inside(k) && P[k] + R[k] >= threshold;
  return out;
}

/// Share of inside points flagged in `region`.
inline double region_share(const std::vector<std::uint8_t>& region, const DomainMask& mask) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < region.size(); ++k) n += mask.inside(k) && region[k];
  return static_cast<double>(n) / static_cast<double>(mask.inside_count());
}

/// Model A pipeline for one spec: R, lambda sweep, profit map, stats.
struct ModelARun {
  Problem problem;
  ProfitMapA profit;
  RegionStats stats;
};

inline ModelARun run_model_a(const ScenarioSpec& spec, const Grid2D& grid, int n_lambda, const SweepOptions& opt = {}) {
  ModelARun run{build_scenario(spec, grid), {}, {}};
  ScalarField R = compute_R(run.problem, opt.eikonal);
  run.profit = model_a_profit(run.problem, R, n_lambda, opt);
  run.stats = region_stats(run.profit.P_a, run.problem.benefit, run.problem.mask, run.problem.p_tilde);
  return run;
}

struct CandidateResult {
  double A_p = 0.0;
  double V_p = 0.0;
  double P_max = 0.0;
};

/// Exhaustive search result. `best` holds every index whose A_p is within
/// `tie_tolerance` of the maximum.
template <class Param>
struct SearchResult {
  std::vector<Param> candidates;
  std::vector<CandidateResult> results;
  std::vector<std::size_t> best;
};

struct SearchOptions {
  int n_lambda = 101;
  double tie_tolerance = 0.0;
  /// Workers across candidates; each candidate sweep runs sequentially.
  int workers = 1;
  EikonalOptions eikonal;
  std::function<void(std::size_t, const CandidateResult&)> progress;
};

namespace detail {

template <class Param, class MakeSpec>
SearchResult<Param> grid_search(std::vector<Param> candidates, const Grid2D& grid, const SearchOptions& opt,
                                MakeSpec&& make_spec) {
  if (candidates.empty()) throw std::invalid_argument("grid search: no candidates");
  SearchResult<Param> out;
  out.candidates = std::move(candidates);
  out.results.resize(out.candidates.size());
  std::mutex lock;
  parallel_for(out.candidates.size(), opt.workers, [&](std::size_t c) {
    SweepOptions sw;
    sw.eikonal = opt.eikonal;
    const ModelARun run = run_model_a(make_spec(out.candidates[c]), grid, opt.n_lambda, sw);
    const CandidateResult r{run.stats.A_p, run.stats.V_p, run.stats.P_max};
    std::lock_guard guard(lock);
    out.results[c] = r;
    if (opt.progress) opt.progress(c, r);
  });
  double top = -kInf;
  for (const auto& r : out.results) top = std::max(top, r.A_p);
  for (std::size_t c = 0; c < out.results.size(); ++c)
    if (out.results[c].A_p >= top - opt.tie_tolerance) out.best.push_back(c);
  return out;
}

}  // namespace detail

/// Uniform (n+1) x (n+1) lattice of station candidates on [0,1]^2.
inline std::vector<Point> station_lattice(int n = 10) {
  std::vector<Point> pts;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) pts.push_back({static_cast<double>(a) / n, static_cast<double>(b) / n});
  return pts;
}

inline SearchResult<Point> optimize_station(const std::vector<Point>& candidates, const Grid2D& grid,
                                            const SearchOptions& opt = {},
                                            std::function<ScenarioSpec(Point)> make_spec = nullptr) {
  if (!make_spec) make_spec = [](Point p) { return scenarios::example3(p); };
  return detail::grid_search(candidates, grid, opt, make_spec);
}

/// Weight search over w1 in {0, 1/n_w, ..., 1}.
inline SearchResult<double> optimize_weights(int n_w, const Grid2D& grid, const SearchOptions& opt = {},
                                             std::function<ScenarioSpec(double)> make_spec = nullptr) {
  if (n_w < 1) throw std::invalid_argument("optimize_weights: need at least one weight step");
  if (!make_spec) make_spec = [](double w) { return scenarios::example4(w); };
  std::vector<double> ws;
  for (int k = 0; k <= n_w; ++k) ws.push_back(k == n_w ? 1.0 : static_cast<double>(k) / n_w);
  return detail::grid_search(ws, grid, opt, make_spec);
}

}  // namespace envcrime
