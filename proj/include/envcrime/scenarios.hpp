#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "envcrime/eikonal.hpp"
#include "envcrime/grid.hpp"
#include "envcrime/io.hpp"

namespace envcrime {

/// Closed-form scenario: field builders plus run defaults. Travel cost is the
/// constant kappa unless `cost` is set.
struct ScenarioSpec {
  using FieldFn = std::function<ScalarField(const Grid2D&, const DomainMask&)>;

  std::string name;
  std::function<DomainMask(const Grid2D&)> mask;
  FieldFn benefit;
  FieldFn psi_shape;
  FieldFn speed;
  FieldFn cost;
  double budget = 1.0;
  double gamma = 1.0;
  double kappa = 1.0;
  double p_tilde = 0.0;
  int n_lambda = 101;
  int n_b = 101;
  int points = 501;
  std::optional<Grid2D> fixed_grid;

  /// Solve grid: the fixed raster grid, or the unit square with `points`
  /// gridpoints per axis (spec default when unset).
  Grid2D grid(std::optional<int> points_override = std::nullopt) const {
    if (fixed_grid) {
      if (points_override) throw std::invalid_argument(name + ": grid is fixed by the raster");
      return *fixed_grid;
    }
    return Grid2D::unit_square(points_override.value_or(points));
  }
};

inline Problem build_scenario(const ScenarioSpec& spec, const Grid2D& grid) {
  Problem pb;
  pb.grid = grid;
  pb.mask = spec.mask(grid);
  pb.benefit = spec.benefit(grid, pb.mask);
  pb.psi = normalize_budget(spec.psi_shape(grid, pb.mask), pb.mask, spec.budget, spec.gamma);
  pb.speed = spec.speed ? spec.speed(grid, pb.mask) : ScalarField(grid, 1.0);
  if (spec.cost) {
    pb.cost = spec.cost(grid, pb.mask);
  } else {
    pb.cost = ScalarField(grid, spec.kappa);
    pb.kappa = spec.kappa;
  }
  pb.p_tilde = spec.p_tilde;
  pb.validate();
  return pb;
}

inline Problem build_scenario(const ScenarioSpec& spec, std::optional<int> points = std::nullopt) {
  return build_scenario(spec, spec.grid(points));
}

namespace scenarios {

inline double gauss(double x, double y, double cx, double cy, double a) {
  return std::exp(-a * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
}

/// Banded detection shape 1 / (50 (d - 0.3)^2 + 0.5) in the distance d to the boundary.
inline double banded_shape(double d) { return 1.0 / (50.0 * (d - 0.3) * (d - 0.3) + 0.5); }

inline double square_distance(double x, double y) { return std::min({x, 1.0 - x, y, 1.0 - y}); }

inline DomainMask unit_square_mask(const Grid2D& g) { return DomainMask::open_rectangle(g); }

inline ScenarioSpec::FieldFn constant(double c) {
  return [c](const Grid2D& g, const DomainMask&) { return ScalarField(g, c); };
}

inline ScenarioSpec::FieldFn closed_form(std::function<double(double, double)> fn) {
  return [fn = std::move(fn)](const Grid2D& g, const DomainMask&) { return ScalarField::from_function(g, fn); };
}

inline double two_hills_benefit(double x, double y) { return gauss(x, y, 0.25, 0.5, 10.0) + gauss(x, y, 0.75, 0.5, 10.0); }

inline ScenarioSpec example1() {
  ScenarioSpec s;
  s.name = "example1";
  s.mask = [](const Grid2D& g) {
    return DomainMask::from_predicate(g, [](double x, double y) {
      return (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) < 0.25;
    });
  };
  s.benefit = constant(2.0);
  s.psi_shape = closed_form([](double x, double y) {
    const double d = std::max(0.0, 0.5 - std::hypot(x - 0.5, y - 0.5));
    return banded_shape(d);
  });
  s.budget = 2.5;
  s.n_lambda = 1;
  s.n_b = 1;
  return s;
}

inline ScenarioSpec example2() {
  ScenarioSpec s;
  s.name = "example2";
  s.mask = unit_square_mask;
  s.benefit = closed_form(two_hills_benefit);
  s.psi_shape = closed_form([](double x, double y) { return banded_shape(square_distance(x, y)); });
  s.budget = 2.0;
  return s;
}

/// Single drone station at (sx, sy).
inline ScenarioSpec example3(Point station = {0.5, 0.3}) {
  ScenarioSpec s;
  s.name = "example3";
  s.mask = unit_square_mask;
  s.benefit = closed_form(two_hills_benefit);
  s.psi_shape = closed_form([station](double x, double y) { return gauss(x, y, station.x, station.y, 30.0); });
  s.budget = 2.0;
  s.points = 201;
  return s;
}

/// Two stations at (0.5, 0.3) and (0.5, 0.7) sharing the budget with weights (w1, 1 - w1).
inline ScenarioSpec example4(double w1 = 0.43) {
  if (!(w1 >= 0.0 && w1 <= 1.0)) throw std::invalid_argument("example4: weight outside [0, 1]");
  ScenarioSpec s;
  s.name = "example4";
  s.mask = unit_square_mask;
  s.benefit = closed_form(two_hills_benefit);
  s.psi_shape = closed_form([w1](double x, double y) {
    return w1 * gauss(x, y, 0.5, 0.3, 30.0) + (1.0 - w1) * gauss(x, y, 0.5, 0.7, 30.0);
  });
  s.budget = 2.0;
  s.points = 201;
  return s;
}

struct GaussianBump {
  double weight;
  Point center;
  double sigma;
};

/// Eight-bump patrol density for the patrol-gap scenario.
inline const std::vector<GaussianBump>& patrol_gap_bumps() {
  static const std::vector<GaussianBump> bumps = {
      {1.0, {0.70, 0.78}, 0.07}, {1.0, {0.70, 0.22}, 0.07}, {0.8, {0.90, 0.62}, 0.05},
      {0.8, {0.90, 0.38}, 0.05}, {0.9, {0.45, 0.50}, 0.08}, {0.6, {0.55, 0.68}, 0.05},
      {0.5, {0.25, 0.25}, 0.10}, {0.5, {0.25, 0.75}, 0.10},
  };
  return bumps;
}

inline ScenarioSpec example5() {
  ScenarioSpec s;
  s.name = "example5";
  s.mask = unit_square_mask;
  s.benefit = closed_form([](double x, double y) { return 3.0 + 7.5 * gauss(x, y, 0.7, 0.5, 10.0); });
  s.psi_shape = closed_form([](double x, double y) {
    double v = 0.0;
    for (const auto& b : patrol_gap_bumps()) {
      const double r2 = (x - b.center.x) * (x - b.center.x) + (y - b.center.y) * (y - b.center.y);
      v += b.weight * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
    }
    return v;
  });
  s.budget = 2.0;
  s.n_lambda = 401;
  s.n_b = 401;
  return s;
}

/// Terrain scenario on an elevation raster: speed from the slope law,
/// B(d) = 8 d (2 d_m - d) / d_m and the band psi = (0.7 d_m - d) / d_m on
/// 0.3 d_m < d < 0.7 d_m, where d is the discrete distance to the boundary.
inline ScenarioSpec terrain(const ElevationRaster& elev, double budget = 3e4) {
  auto distance = std::make_shared<ScalarField>(
      solve_eikonal(elev.mask, ScalarField(elev.grid(), 1.0), ScalarField(elev.grid(), 1.0)).u);
  double dm = 0.0;
  for (std::size_t k = 0; k < distance->size(); ++k)
    if (elev.mask.inside(k) && std::isfinite((*distance)[k])) dm = std::max(dm, (*distance)[k]);
  auto speed = std::make_shared<ScalarField>(speed_from_slope(elev));
  auto mask = std::make_shared<DomainMask>(elev.mask);

  ScenarioSpec s;
  s.name = "terrain";
  s.fixed_grid = elev.grid();
  s.mask = [mask](const Grid2D&) { return *mask; };
  s.benefit = [distance, dm](const Grid2D& g, const DomainMask&) {
    ScalarField b(g, 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double d = (*distance)[k];
      b[k] = std::isfinite(d) ? 8.0 * d * (2.0 * dm - d) / dm : 0.0;
    }
    return b;
  };
  s.psi_shape = [distance, dm](const Grid2D& g, const DomainMask&) {
    ScalarField p(g, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double d = (*distance)[k];
      p[k] = d > 0.3 * dm && d < 0.7 * dm ? (0.7 * dm - d) / dm : 0.0;
    }
    return p;
  };
  s.speed = [speed](const Grid2D&, const DomainMask&) { return *speed; };
  s.budget = budget;
  s.n_lambda = 21;
  s.n_b = 21;
  return s;
}

/// Synthetic 500 x 400 elevation map (30 length units spacing): an irregular
/// oval park over a sum of smooth bumps with one steep ridge.
inline ElevationRaster synthetic_terrain(int cols = 500, int rows = 400, double spacing = 30.0) {
  const Grid2D g = Grid2D::from_spacing(cols - 1, rows - 1, spacing, spacing);
  const double cx = 0.5 * g.xmax(), cy = 0.5 * g.ymax();
  const double ax = 0.454 * g.xmax(), ay = 0.443 * g.ymax();
  struct Bump {
    double a, x, y, s;
  };
  const Bump bumps[] = {
      {900.0, 0.27, 0.58, 500.0},  {600.0, 0.60, 0.33, 1500.0}, {400.0, 0.73, 0.67, 1200.0},
      {-300.0, 0.40, 0.29, 2000.0}, {500.0, 0.20, 0.25, 1000.0}, {350.0, 0.80, 0.46, 800.0},
  };
  constexpr double nodata = -9999.0;
  Raster r;
  r.grid = g;
  r.values = ScalarField(g, nodata);
  r.nodata = nodata;
  std::vector<std::uint8_t> inside(g.size(), 0);
  for (int j = 0; j < g.rows(); ++j)
    for (int i = 0; i < g.cols(); ++i) {
      const double x = g.x(i), y = g.y(j);
      const double th = std::atan2((y - cy) / ay, (x - cx) / ax);
      const double rad = 1.0 + 0.08 * std::sin(3 * th) + 0.05 * std::cos(5 * th);
      const double q = std::hypot((x - cx) / ax, (y - cy) / ay);
      if (q >= rad) continue;
      double z = 1200.0;
      for (const auto& b : bumps) {
        const double bx = b.x * g.xmax(), by = b.y * g.ymax();
        z += b.a * std::exp(-((x - bx) * (x - bx) + (y - by) * (y - by)) / (2 * b.s * b.s));
      }
      r.values(i, j) = z;
      inside[g.index(i, j)] = 1;
    }
  DomainMask mask(g, std::move(inside));
  return {std::move(r), std::move(mask)};
}

}  // namespace scenarios

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"example1", "example2", "example3", "example4", "example5",
                                                 "terrain-synthetic"};
  return names;
}

inline ScenarioSpec scenario_spec(const std::string& name) {
  if (name == "example1") return scenarios::example1();
  if (name == "example2") return scenarios::example2();
  if (name == "example3") return scenarios::example3();
  if (name == "example4") return scenarios::example4();
  if (name == "example5") return scenarios::example5();
  if (name == "terrain-synthetic") {
    auto s = scenarios::terrain(scenarios::synthetic_terrain());
    s.name = name;
    return s;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace envcrime
