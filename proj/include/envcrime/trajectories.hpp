#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "envcrime/grid.hpp"
#include "envcrime/random_termination.hpp"

namespace envcrime {

enum class Termination { reached_boundary, stalled, step_cap };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_boundary: return "reached_boundary";
    case Termination::stalled: return "stalled";
    case Termination::step_cap: return "step_cap";
  }
  return "unknown";
}

/// Polyline with cumulative time and path integrals per vertex.
struct Trajectory {
  std::vector<Point> points;
  std::vector<double> times;
  std::vector<double> J1;  // cumulative integral of psi
  std::vector<double> J2;  // cumulative integral of K
  Termination terminated = Termination::reached_boundary;

  double total_time() const { return times.empty() ? 0.0 : times.back(); }
  double length() const {
    double s = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) s += std::hypot(points[k].x - points[k - 1].x, points[k].y - points[k - 1].y);
    return s;
  }
};

struct DescentOptions {
  double step_factor = 0.5;
  double f_min = 1e-6;
  double min_gradient = 1e-12;
};

namespace detail {

// Central difference at a node, one-sided where a neighbor is off-grid or infinite.
inline double node_derivative(const ScalarField& u, int i, int j, bool x_axis) {
  const Grid2D& g = u.grid();
  const double h = x_axis ? g.dx() : g.dy();
  const int fi = x_axis ? i + 1 : i, fj = x_axis ? j : j + 1;
  const int bi = x_axis ? i - 1 : i, bj = x_axis ? j : j - 1;
  const double c = u(i, j);
  const bool hf = g.valid(fi, fj) && std::isfinite(u(fi, fj));
  const bool hb = g.valid(bi, bj) && std::isfinite(u(bi, bj));
  if (!std::isfinite(c)) return 0.0;
  if (hf && hb) return (u(fi, fj) - u(bi, bj)) / (2 * h);
  if (hf) return (u(fi, fj) - c) / h;
  if (hb) return (c - u(bi, bj)) / h;
  return 0.0;
}

inline Point interpolated_gradient(const ScalarField& u, Point p) {
  const Grid2D& g = u.grid();
  const double sx = p.x / g.dx(), sy = p.y / g.dy();
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx() - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny() - 1);
  const double tx = std::clamp(sx - i, 0.0, 1.0), ty = std::clamp(sy - j, 0.0, 1.0);
  Point grad{0.0, 0.0};
  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  const int ci[4] = {i, i + 1, i, i + 1}, cj[4] = {j, j, j + 1, j + 1};
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0.0) continue;
    grad.x += w[k] * node_derivative(u, ci[k], cj[k], true);
    grad.y += w[k] * node_derivative(u, ci[k], cj[k], false);
  }
  return grad;
}

}  // namespace detail

/// Explicit first-order descent along -grad u at constant spatial step;
/// time advances by step / f. Stops in the first cell that touches the
/// outside of the domain.
inline Trajectory trace_descent(const ScalarField& u, const ScalarField& f, const DomainMask& mask, Point x0,
                                const DescentOptions& opt = {}) {
  if (!(opt.step_factor > 0.0 && opt.step_factor <= 1.0))
    throw std::invalid_argument("trace_descent: step factor must be in (0, 1]");
  const Grid2D& g = u.grid();
  if (!g.contains(x0)) throw std::out_of_range("trace_descent: start outside grid box");
  if (!std::isfinite(sample_bilinear(u, x0))) throw std::invalid_argument("trace_descent: unreachable start point");

  Trajectory tr;
  tr.points.push_back(x0);
  tr.times.push_back(0.0);
  const double step = opt.step_factor * std::min(g.dx(), g.dy());
  const long cap = static_cast<long>(10.0 * (g.nx() + g.ny()) / opt.step_factor);
  Point p = x0;
  double t = 0.0;
  for (long s = 0;; ++s) {
    if (!in_interior_cell(mask, p)) {
      tr.terminated = Termination::reached_boundary;
      break;
    }
    if (s >= cap) {
      tr.terminated = Termination::step_cap;
      break;
    }
    const Point grad = detail::interpolated_gradient(u, p);
    const double norm = std::hypot(grad.x, grad.y);
    const double speed = sample_bilinear(f, p);
    if (!(norm >= opt.min_gradient) || !(speed >= opt.f_min)) {
      tr.terminated = Termination::stalled;
      break;
    }
    Point q{p.x - step * grad.x / norm, p.y - step * grad.y / norm};
    q.x = std::clamp(q.x, 0.0, g.xmax());
    q.y = std::clamp(q.y, 0.0, g.ymax());
    t += std::hypot(q.x - p.x, q.y - p.y) / speed;
    p = q;
    tr.points.push_back(p);
    tr.times.push_back(t);
  }
  tr.J1.assign(tr.points.size(), 0.0);
  tr.J2.assign(tr.points.size(), 0.0);
  return tr;
}

struct PathFunctionals {
  double J1 = 0.0;
  double J2 = 0.0;
  double P_detect_free = 1.0;
};

/// Midpoint-rule integrals of psi and K along the path; fills the cumulative
/// per-vertex arrays of `tr`.
inline PathFunctionals path_functionals(Trajectory& tr, const ScalarField& psi, const ScalarField& cost) {
  tr.J1.assign(tr.points.size(), 0.0);
  tr.J2.assign(tr.points.size(), 0.0);
  for (std::size_t k = 1; k < tr.points.size(); ++k) {
    const Point m{0.5 * (tr.points[k].x + tr.points[k - 1].x), 0.5 * (tr.points[k].y + tr.points[k - 1].y)};
    const double dt = tr.times[k] - tr.times[k - 1];
    tr.J1[k] = tr.J1[k - 1] + sample_bilinear(psi, m) * dt;
    tr.J2[k] = tr.J2[k - 1] + sample_bilinear(cost, m) * dt;
  }
  PathFunctionals out;
  if (!tr.points.empty()) {
    out.J1 = tr.J1.back();
    out.J2 = tr.J2.back();
  }
  out.P_detect_free = std::exp(-out.J1);
  return out;
}

inline PathFunctionals path_functionals(const Trajectory& tr, const ScalarField& psi, const ScalarField& cost) {
  Trajectory copy = tr;
  return path_functionals(copy, psi, cost);
}

struct ModelGPaths {
  Trajectory pre_detection;
  std::vector<Trajectory> post_detection;
};

/// Pre-detection path descends u_bar; each post-detection path descends the
/// cost-optimal field u_K from its detection point.
inline ModelGPaths model_g_paths(const Problem& pb, const TerminatedSolution& sol, const ScalarField& u_K, Point x0,
                                 const std::vector<Point>& detection_points, const DescentOptions& opt = {}) {
  ModelGPaths out;
  out.pre_detection = trace_descent(sol.u_bar, pb.speed, pb.mask, x0, opt);
  path_functionals(out.pre_detection, pb.psi, pb.cost);
  for (const Point& d : detection_points) {
    Trajectory tr = trace_descent(u_K, pb.speed, pb.mask, d, opt);
    path_functionals(tr, pb.psi, pb.cost);
    out.post_detection.push_back(std::move(tr));
  }
  return out;
}

}  // namespace envcrime
