#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "envcrime/io.hpp"
#include "envcrime/multiobjective.hpp"
#include "envcrime/planning.hpp"
#include "envcrime/random_termination.hpp"
#include "envcrime/scenarios.hpp"
#include "envcrime/trajectories.hpp"

namespace envcrime {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run can be configured with. Unset optionals fall back to the
/// scenario defaults.
struct RunConfig {
  std::string scenario = "example1";
  std::string raster;
  std::optional<int> points;
  std::optional<int> n_lambda;
  std::optional<int> n_b;
  std::optional<double> budget;
  std::optional<double> gamma;
  std::optional<double> p_tilde;
  double epsilon = 0.85;
  std::string model = "A";
  std::string out = ".";
  std::string format = "text";
  std::vector<std::string> trace_points;
  double step_factor = 0.5;
  int workers = 1;
  int candidates = 10;
  int n_w = 100;
  double tie_tolerance = 0.0;
  std::optional<std::string> station;
  std::optional<double> weight;
  std::string profit_file;
  std::string benefit_file;
  std::string mask_file;
};

inline Point parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("point '" + s + "' must be x,y");
  try {
    std::size_t a = 0, b = 0;
    const std::string xs = s.substr(0, comma), ys = s.substr(comma + 1);
    Point p{std::stod(xs, &a), std::stod(ys, &b)};
    if (a != xs.size() || b != ys.size()) throw std::invalid_argument(s);
    return p;
  } catch (const std::logic_error&) {
    throw UsageError("point '" + s + "' must be x,y");
  }
}

namespace detail {

template <class T>
T config_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_integral_v<T>)
      out = static_cast<T>(std::stol(v, &used));
    else
      out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::logic_error&) {
    throw UsageError("config key '" + key + "': bad number '" + v + "'");
  }
}

}  // namespace detail

/// Applies key=value pairs (flag names without dashes) to `cfg`.
inline void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    using detail::config_number;
    if (k == "scenario") cfg.scenario = v;
    else if (k == "raster") cfg.raster = v;
    else if (k == "n") cfg.points = config_number<int>(k, v);
    else if (k == "nlambda") cfg.n_lambda = config_number<int>(k, v);
    else if (k == "nb") cfg.n_b = config_number<int>(k, v);
    else if (k == "budget") cfg.budget = config_number<double>(k, v);
    else if (k == "gamma") cfg.gamma = config_number<double>(k, v);
    else if (k == "ptilde") cfg.p_tilde = config_number<double>(k, v);
    else if (k == "epsilon") cfg.epsilon = config_number<double>(k, v);
    else if (k == "model") cfg.model = v;
    else if (k == "out") cfg.out = v;
    else if (k == "format") cfg.format = v;
    else if (k == "step-factor") cfg.step_factor = config_number<double>(k, v);
    else if (k == "workers") cfg.workers = config_number<int>(k, v);
    else if (k == "candidates") cfg.candidates = config_number<int>(k, v);
    else if (k == "nw") cfg.n_w = config_number<int>(k, v);
    else if (k == "tie-tol") cfg.tie_tolerance = config_number<double>(k, v);
    else if (k == "station") cfg.station = v;
    else if (k == "weight") cfg.weight = config_number<double>(k, v);
    else if (k == "point") {
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ';')) cfg.trace_points.push_back(item);
    } else {
      throw UsageError("unknown config key '" + k + "'");
    }
  }
}

namespace cli {

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
};

inline FieldFormat field_format(const RunConfig& cfg) {
  if (cfg.format == "text") return FieldFormat::text;
  if (cfg.format == "packed") return FieldFormat::packed;
  throw UsageError("format must be text or packed");
}

inline std::string output_path(const RunConfig& cfg, const std::string& stem) {
  std::filesystem::create_directories(cfg.out);
  const char* ext = field_format(cfg) == FieldFormat::packed ? ".hjbf" : ".txt";
  return (std::filesystem::path(cfg.out) / (stem + ext)).string();
}

inline std::string text_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

inline void write_field(const RunConfig& cfg, const ScalarField& f, const std::string& stem) {
  export_field(f, output_path(cfg, stem), field_format(cfg));
}

inline ScalarField flags_field(const Grid2D& g, const std::vector<std::uint8_t>& flags) {
  ScalarField f(g, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = flags[k] ? 1.0 : 0.0;
  return f;
}

inline ScenarioSpec resolve_spec(const RunConfig& cfg) {
  ScenarioSpec spec;
  if (!cfg.raster.empty()) {
    spec = scenarios::terrain(load_elevation(cfg.raster));
  } else if (cfg.scenario == "example3" && cfg.station) {
    spec = scenarios::example3(parse_point(*cfg.station));
  } else if (cfg.scenario == "example4" && cfg.weight) {
    spec = scenarios::example4(*cfg.weight);
  } else {
    try {
      spec = scenario_spec(cfg.scenario);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (cfg.budget) spec.budget = *cfg.budget;
  if (cfg.gamma) spec.gamma = *cfg.gamma;
  if (cfg.p_tilde) spec.p_tilde = *cfg.p_tilde;
  if (cfg.n_lambda) spec.n_lambda = *cfg.n_lambda;
  if (cfg.n_b) spec.n_b = *cfg.n_b;
  else if (cfg.n_lambda) spec.n_b = *cfg.n_lambda;
  return spec;
}

inline Problem resolve_problem(const RunConfig& cfg, const ScenarioSpec& spec) {
  if (spec.fixed_grid && cfg.points) throw UsageError("--n cannot be combined with a raster scenario");
  if (cfg.points && *cfg.points < 3) throw UsageError("--n must be at least 3");
  return build_scenario(spec, spec.grid(cfg.points));
}

inline void print_stats(std::ostream& os, const std::string& prefix, const RegionStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%sP_max=%.6f\n%sA_p=%.2f\n%sV_p=%.2f\n", prefix.c_str(), s.P_max, prefix.c_str(),
                100.0 * s.A_p, prefix.c_str(), 100.0 * s.V_p);
  os << buf;
}

inline void print_percent(std::ostream& os, const std::string& key, double share) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s=%.2f\n", key.c_str(), 100.0 * share);
  os << buf;
}

inline SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.workers = cfg.workers;
  return o;
}

inline void write_scenario_fields(Context& ctx, const Problem& pb) {
  write_field(ctx.cfg, pb.benefit, "B");
  write_field(ctx.cfg, pb.psi, "psi");
  write_field(ctx.cfg, pb.speed, "f");
  write_field(ctx.cfg, pb.cost, "K");
  write_field(ctx.cfg, mask_as_field(pb.mask), "mask");
}

inline int cmd_scenario(Context& ctx) {
  const ScenarioSpec spec = resolve_spec(ctx.cfg);
  const Problem pb = resolve_problem(ctx.cfg, spec);
  write_scenario_fields(ctx, pb);
  ctx.out << "scenario=" << spec.name << "\ncols=" << pb.grid.cols() << "\nrows=" << pb.grid.rows()
          << "\ninside=" << pb.mask.inside_count() << "\nbudget=" << detail::format_number(integrate_field(pb.psi, pb.mask, spec.gamma))
          << "\nnlambda=" << spec.n_lambda << "\nnb=" << spec.n_b << "\n";
  return 0;
}

struct SolveAOutput {
  ProfitMapA profit;
  RegionStats stats;
};

inline SolveAOutput solve_a(Context& ctx, const ScenarioSpec& spec, const Problem& pb, const ScalarField& R) {
  SolveAOutput o{model_a_profit(pb, R, spec.n_lambda, sweep_options(ctx.cfg)), {}};
  o.stats = region_stats(o.profit.P_a, pb.benefit, pb.mask, pb.p_tilde);
  write_field(ctx.cfg, o.profit.P_a, "P_a");
  write_field(ctx.cfg, R, "R");
  ScalarField lam(pb.grid, -1.0);
  for (std::size_t p = 0; p < lam.size(); ++p)
    if (o.profit.argmax[p] >= 0) lam[p] = lambda_node(o.profit.argmax[p], spec.n_lambda);
  write_field(ctx.cfg, lam, "argmax_lambda");
  write_field(ctx.cfg, flags_field(pb.grid, o.stats.pristine), "pristine_a");
  const auto hv = high_value_region(o.profit.P_a, R, pb.mask, ctx.cfg.epsilon);
  write_field(ctx.cfg, flags_field(pb.grid, hv), "high_value");
  const ScalarField sharp = profit_sharp(pb, R, spec.n_b, sweep_options(ctx.cfg));
  write_field(ctx.cfg, sharp, "P_sharp");
  const RegionStats s_sharp = region_stats(sharp, pb.benefit, pb.mask, pb.p_tilde);

  ctx.out << "model=A\nscenario=" << spec.name << "\nnlambda=" << spec.n_lambda << "\n";
  print_stats(ctx.out, "", o.stats);
  print_percent(ctx.out, "A_p_sharp", s_sharp.A_p);
  print_percent(ctx.out, "V_p_sharp", s_sharp.V_p);
  print_percent(ctx.out, "high_value_share", region_share(hv, pb.mask));
  return o;
}

inline ProfitBracketG solve_g(Context& ctx, const ScenarioSpec& spec, const Problem& pb, const ScalarField& R) {
  ProfitBracketG br = model_g_profit(pb, R, spec.n_b, ctx.cfg.workers);
  const ScalarField mid = br.midpoint();
  write_field(ctx.cfg, br.lower, "P_g_minus");
  write_field(ctx.cfg, br.upper, "P_g_plus");
  write_field(ctx.cfg, mid, "P_g_mid");
  const RegionStats s = region_stats(mid, pb.benefit, pb.mask, pb.p_tilde);
  write_field(ctx.cfg, flags_field(pb.grid, s.pristine), "pristine_g");
  const RegionStats conservative = region_stats(br.upper, pb.benefit, pb.mask, pb.p_tilde);
  write_field(ctx.cfg, flags_field(pb.grid, br.straddling(pb.p_tilde)), "straddle_g");
  ctx.out << "model=G\nscenario=" << spec.name << "\nnb=" << spec.n_b << "\n";
  print_stats(ctx.out, "", s);
  print_percent(ctx.out, "A_p_conservative", conservative.A_p);
  print_percent(ctx.out, "V_p_conservative", conservative.V_p);
  return br;
}

inline int cmd_solve_a(Context& ctx) {
  const ScenarioSpec spec = resolve_spec(ctx.cfg);
  const Problem pb = resolve_problem(ctx.cfg, spec);
  write_scenario_fields(ctx, pb);
  solve_a(ctx, spec, pb, compute_R(pb));
  return 0;
}

inline int cmd_solve_g(Context& ctx) {
  const ScenarioSpec spec = resolve_spec(ctx.cfg);
  const Problem pb = resolve_problem(ctx.cfg, spec);
  write_scenario_fields(ctx, pb);
  solve_g(ctx, spec, pb, compute_R(pb));
  return 0;
}

/// One polyline per line: "x y t J1 J2" for every vertex.
inline void write_trajectories(const std::string& path, const std::vector<Trajectory>& paths) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  for (const auto& tr : paths) {
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      if (k) os << ' ';
      os << detail::format_number(tr.points[k].x) << ' ' << detail::format_number(tr.points[k].y) << ' '
         << detail::format_number(tr.times[k]) << ' ' << detail::format_number(tr.J1[k]) << ' '
         << detail::format_number(tr.J2[k]);
    }
    os << '\n';
  }
  if (!os.flush()) throw IoError(path + ": write failed");
}

/// Rows "lambda J1 J2 payoff".
inline void write_front(const std::string& path, const std::vector<LambdaSample>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  for (const auto& r : rows)
    os << detail::format_number(r.lambda) << ' ' << detail::format_number(r.J1) << ' ' << detail::format_number(r.J2)
       << ' ' << detail::format_number(r.payoff) << '\n';
  if (!os.flush()) throw IoError(path + ": write failed");
}

inline std::vector<Point> trace_starts(const RunConfig& cfg, const Problem& pb) {
  std::vector<Point> pts;
  for (const auto& s : cfg.trace_points) {
    const Point p = parse_point(s);
    if (!point_inside(pb.mask, p)) throw UsageError("trace point " + s + " is outside the domain");
    pts.push_back(p);
  }
  return pts;
}

inline void trace_model_a(Context& ctx, const ScenarioSpec& spec, const Problem& pb, const ScalarField& R,
                          const std::vector<Point>& starts) {
  const int n = spec.n_lambda;
  std::vector<std::vector<LambdaSample>> profiles(starts.size(), std::vector<LambdaSample>(n + 1));
  std::vector<double> r_at(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) r_at[i] = sample_bilinear(R, starts[i]);
  SweepOptions so = sweep_options(ctx.cfg);
  for_each_lambda(pb, n, so, [&](int k, const ValueTriplet& t) {
    for (std::size_t i = 0; i < starts.size(); ++i) profiles[i][k] = sample_triplet(pb, t, r_at[i], starts[i]);
  });

  DescentOptions dopt;
  dopt.step_factor = ctx.cfg.step_factor;
  const ValueTriplet t0 = solve_scalarized(pb, 0.0), t1 = solve_scalarized(pb, 1.0);
  std::vector<Trajectory> by_role[4];
  const char* role_names[4] = {"argmax", "lambda0", "lambda1", "sharp"};
  for (std::size_t i = 0; i < starts.size(); ++i) {
    int best = 0;
    for (int k = 1; k <= n; ++k)
      if (profiles[i][k].payoff > profiles[i][best].payoff) best = k;
    const double b = sample_bilinear(pb.benefit, starts[i]);
    const double lambdas[4] = {lambda_node(best, n), 0.0, 1.0, b / (b + 1.0)};
    for (int role = 0; role < 4; ++role) {
      const ScalarField* u = role == 1 ? &t0.U : role == 2 ? &t1.U : nullptr;
      ValueTriplet tmp;
      if (!u) {
        tmp = solve_scalarized(pb, lambdas[role]);
        u = &tmp.U;
      }
      Trajectory tr = trace_descent(*u, pb.speed, pb.mask, starts[i], dopt);
      const PathFunctionals pf = path_functionals(tr, pb.psi, pb.cost);
      char buf[320];
      std::snprintf(buf, sizeof buf, "point=%zu role=%s lambda=%.6f J1=%.6f J2=%.6f payoff=%.6f terminated=%s\n", i,
                    role_names[role], lambdas[role], pf.J1, pf.J2, lambda_payoff(b, pf.J1, pf.J2) - r_at[i],
                    std::string(to_string(tr.terminated)).c_str());
      ctx.out << buf;
      by_role[role].push_back(std::move(tr));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "point=%zu P_a=%.6f P_sharp=%.6f\n", i, profiles[i][best].payoff,
                  profit_sharp_at(pb, R, starts[i]));
    ctx.out << buf;
    write_front(text_path(ctx.cfg, "lambda_profile_" + std::to_string(i) + ".txt"), profiles[i]);
    write_front(text_path(ctx.cfg, "front_" + std::to_string(i) + ".txt"), pareto_filter(profiles[i]));
  }
  for (int role = 0; role < 4; ++role)
    write_trajectories(text_path(ctx.cfg, std::string("paths_") + role_names[role] + ".txt"), by_role[role]);
}

inline void trace_model_g(Context& ctx, const Problem& pb, const ScalarField& R, const std::vector<Point>& starts) {
  DescentOptions dopt;
  dopt.step_factor = ctx.cfg.step_factor;
  const ScalarField u_K = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  std::vector<Trajectory> pre, post;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double b = sample_bilinear(pb.benefit, starts[i]);
    const TerminatedSolution sol = solve_terminated(pb, R, b);
    const Trajectory probe = trace_descent(sol.u_bar, pb.speed, pb.mask, starts[i], dopt);
    std::vector<Point> detections;
    for (int q = 1; q <= 3 && probe.points.size() > 1; ++q)
      detections.push_back(probe.points[q * (probe.points.size() - 1) / 4]);
    ModelGPaths g = model_g_paths(pb, sol, u_K, starts[i], detections, dopt);
    char buf[256];
    std::snprintf(buf, sizeof buf, "point=%zu role=pre_detection J1=%.6f J2=%.6f terminated=%s\n", i,
                  g.pre_detection.J1.back(), g.pre_detection.J2.back(),
                  std::string(to_string(g.pre_detection.terminated)).c_str());
    ctx.out << buf;
    pre.push_back(std::move(g.pre_detection));
    for (auto& tr : g.post_detection) post.push_back(std::move(tr));
  }
  write_trajectories(text_path(ctx.cfg, "paths_g_pre.txt"), pre);
  write_trajectories(text_path(ctx.cfg, "paths_g_post.txt"), post);
}

inline bool wants(const RunConfig& cfg, char model) {
  if (cfg.model == "both") return true;
  if (cfg.model != "A" && cfg.model != "G") throw UsageError("model must be A, G or both");
  return cfg.model[0] == model;
}

inline int cmd_trace(Context& ctx) {
  const ScenarioSpec spec = resolve_spec(ctx.cfg);
  const Problem pb = resolve_problem(ctx.cfg, spec);
  const auto starts = trace_starts(ctx.cfg, pb);
  if (starts.empty()) throw UsageError("trace needs at least one --point");
  const ScalarField R = compute_R(pb);
  if (wants(ctx.cfg, 'A')) trace_model_a(ctx, spec, pb, R, starts);
  if (wants(ctx.cfg, 'G')) trace_model_g(ctx, pb, R, starts);
  return 0;
}

template <class Param, class Show>
void print_search(std::ostream& os, const SearchResult<Param>& res, Show&& show) {
  char buf[256];
  for (std::size_t c = 0; c < res.candidates.size(); ++c) {
    std::snprintf(buf, sizeof buf, "candidate=%s A_p=%.4f V_p=%.4f P_max=%.6f\n", show(res.candidates[c]).c_str(),
                  100 * res.results[c].A_p, 100 * res.results[c].V_p, res.results[c].P_max);
    os << buf;
  }
  for (std::size_t b : res.best) {
    std::snprintf(buf, sizeof buf, "best=%s A_p=%.2f V_p=%.2f P_max=%.6f\n", show(res.candidates[b]).c_str(),
                  100 * res.results[b].A_p, 100 * res.results[b].V_p, res.results[b].P_max);
    os << buf;
  }
}

inline SearchOptions search_options(const RunConfig& cfg, const ScenarioSpec& base) {
  SearchOptions o;
  o.n_lambda = cfg.n_lambda.value_or(base.n_lambda);
  o.tie_tolerance = cfg.tie_tolerance;
  o.workers = cfg.workers;
  return o;
}

inline int cmd_optimize_station(Context& ctx) {
  const ScenarioSpec base = scenarios::example3();
  const Grid2D grid = base.grid(ctx.cfg.points);
  if (ctx.cfg.candidates < 1) throw UsageError("--candidates must be >= 1");
  const auto res = optimize_station(station_lattice(ctx.cfg.candidates), grid, search_options(ctx.cfg, base),
                                    [&](Point p) {
                                      ScenarioSpec s = scenarios::example3(p);
                                      if (ctx.cfg.budget) s.budget = *ctx.cfg.budget;
                                      return s;
                                    });
  print_search(ctx.out, res, [](Point p) {
    char b[64];
    std::snprintf(b, sizeof b, "%.4f,%.4f", p.x, p.y);
    return std::string(b);
  });
  return 0;
}

inline int cmd_optimize_weights(Context& ctx) {
  const ScenarioSpec base = scenarios::example4();
  const Grid2D grid = base.grid(ctx.cfg.points);
  if (ctx.cfg.n_w < 1) throw UsageError("--nw must be >= 1");
  const auto res = optimize_weights(ctx.cfg.n_w, grid, search_options(ctx.cfg, base), [&](double w) {
    ScenarioSpec s = scenarios::example4(w);
    if (ctx.cfg.budget) s.budget = *ctx.cfg.budget;
    return s;
  });
  print_search(ctx.out, res, [](double w) {
    char b[64];
    std::snprintf(b, sizeof b, "%.4f,%.4f", w, 1.0 - w);
    return std::string(b);
  });
  return 0;
}

inline int cmd_stats(Context& ctx) {
  if (ctx.cfg.profit_file.empty()) throw UsageError("stats needs --profit");
  const ScalarField P = load_field(ctx.cfg.profit_file);
  const Grid2D& g = P.grid();
  ScalarField B(g, 1.0);
  if (!ctx.cfg.benefit_file.empty()) B = load_field(ctx.cfg.benefit_file);
  std::vector<std::uint8_t> flags(g.size(), 0);
  if (!ctx.cfg.mask_file.empty()) {
    const ScalarField m = load_field(ctx.cfg.mask_file);
    if (!(m.grid() == g)) throw UsageError("mask grid does not match the profit grid");
    for (std::size_t k = 0; k < g.size(); ++k) flags[k] = m[k] != 0.0;
  } else {
    for (int j = 1; j < g.rows() - 1; ++j)
      for (int i = 1; i < g.cols() - 1; ++i) flags[g.index(i, j)] = 1;
  }
  if (!(B.grid() == g)) throw UsageError("benefit grid does not match the profit grid");
  const DomainMask mask(g, std::move(flags));
  print_stats(ctx.out, "", region_stats(P, B, mask, ctx.cfg.p_tilde.value_or(0.0)));
  return 0;
}

inline int cmd_export_figure_data(Context& ctx) {
  const ScenarioSpec spec = resolve_spec(ctx.cfg);
  const Problem pb = resolve_problem(ctx.cfg, spec);
  const auto starts = trace_starts(ctx.cfg, pb);
  const ScalarField R = compute_R(pb);
  write_scenario_fields(ctx, pb);
  if (wants(ctx.cfg, 'A')) {
    solve_a(ctx, spec, pb, R);
    if (!starts.empty()) trace_model_a(ctx, spec, pb, R, starts);
  }
  if (wants(ctx.cfg, 'G')) {
    solve_g(ctx, spec, pb, R);
    if (!starts.empty()) trace_model_g(ctx, pb, R, starts);
  }
  return 0;
}

/// Pre-pass for --config so that the file sits below environment and flags.
inline std::optional<std::string> find_config_arg(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

}  // namespace cli

/// Entry point of the command-line tool. Exit codes: 0 success, 1 usage or
/// input error, 2 solver failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    if (auto path = cli::find_config_arg(argc, argv)) apply_config(cfg, read_config_file(*path));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (std::getenv("HJB_WORKERS")) cfg.workers = default_workers();

  CLI::App app{"Expected-profit maps for illegal extraction under aerial (A) and ground (G) patrols"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; flags override it");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; flags override it");
    sub->add_option("--scenario", cfg.scenario, "built-in scenario name");
    sub->add_option("--raster", cfg.raster, "elevation raster for a terrain scenario");
    sub->add_option("--n", cfg.points, "gridpoints per axis")->check(CLI::Range(3, 100000));
    sub->add_option("--nlambda", cfg.n_lambda, "lambda intervals")->check(CLI::PositiveNumber);
    sub->add_option("--nb", cfg.n_b, "loot-grid intervals (defaults to --nlambda)")->check(CLI::PositiveNumber);
    sub->add_option("--budget,--E", cfg.budget, "patrol budget E")->check(CLI::PositiveNumber);
    sub->add_option("--gamma", cfg.gamma, "budget exponent")->check(CLI::Range(1.0, 1e9));
    sub->add_option("--ptilde", cfg.p_tilde, "profit threshold");
    sub->add_option("--epsilon", cfg.epsilon, "high-value fraction")->check(CLI::Range(0.0, 0.999999999));
    sub->add_option("--model", cfg.model, "A, G or both");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--format", cfg.format, "text or packed");
    sub->add_option("--workers", cfg.workers, "solver threads (env HJB_WORKERS)")->check(CLI::PositiveNumber);
    sub->add_option("--station", cfg.station, "example3 station x,y");
    sub->add_option("--weight", cfg.weight, "example4 weight w1")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--point", cfg.trace_points, "trace start x,y (repeatable)");
    sub->add_option("--step-factor", cfg.step_factor, "descent step / min(dx, dy)")->check(CLI::Range(1e-6, 1.0));
  };

  using Handler = int (*)(cli::Context&);
  struct Command {
    const char* name;
    const char* help;
    Handler fn;
  };
  const Command commands[] = {
      {"scenario", "write the scenario fields", cli::cmd_scenario},
      {"solve-a", "Model A profit map and statistics", cli::cmd_solve_a},
      {"solve-g", "Model G profit bracket and statistics", cli::cmd_solve_g},
      {"trace", "optimal paths from start points", cli::cmd_trace},
      {"optimize-station", "grid search over one station position", cli::cmd_optimize_station},
      {"optimize-weights", "grid search over two-station weights", cli::cmd_optimize_weights},
      {"stats", "statistics of an exported profit map", cli::cmd_stats},
      {"export-figure-data", "every field, path and front file for plotting", cli::cmd_export_figure_data},
  };
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    subs.emplace_back(sub, c.fn);
  }
  for (auto& [sub, fn] : subs) {
    const std::string name = sub->get_name();
    if (name == "optimize-station") {
      sub->add_option("--candidates", cfg.candidates, "lattice intervals per axis")->check(CLI::PositiveNumber);
      sub->add_option("--tie-tol", cfg.tie_tolerance, "A_p tolerance for reported maximizers")->check(CLI::NonNegativeNumber);
    } else if (name == "optimize-weights") {
      sub->add_option("--nw", cfg.n_w, "weight intervals")->check(CLI::PositiveNumber);
      sub->add_option("--tie-tol", cfg.tie_tolerance, "A_p tolerance for reported maximizers")->check(CLI::NonNegativeNumber);
    } else if (name == "stats") {
      sub->add_option("--profit", cfg.profit_file, "profit map file");
      sub->add_option("--benefit", cfg.benefit_file, "benefit map file");
      sub->add_option("--mask", cfg.mask_file, "inside mask file (default: all but the outer ring)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  cli::Context ctx{cfg, out, err};
  for (auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    try {
      return fn(ctx);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const ParseError& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const IoError& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err << "solver error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}

}  // namespace envcrime
