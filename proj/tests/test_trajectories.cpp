#include <gtest/gtest.h>

#include <cmath>

#include "envcrime/multiobjective.hpp"
#include "envcrime/scenarios.hpp"
#include "envcrime/trajectories.hpp"

using namespace envcrime;

namespace {

Problem unit_problem(int n) {
  const Grid2D g = Grid2D::unit_square(n);
  Problem pb;
  pb.grid = g;
  pb.mask = DomainMask::open_rectangle(g);
  pb.benefit = ScalarField(g, 1.0);
  pb.psi = ScalarField(g, 0.0);
  pb.speed = ScalarField(g, 1.0);
  pb.cost = ScalarField(g, 1.0);
  pb.kappa = 1.0;
  return pb;
}

}  // namespace

TEST(TraceDescent, StraightToTheNearestEdge) {
  const Problem pb = unit_problem(101);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  const Trajectory tr = trace_descent(u, pb.speed, pb.mask, {0.2, 0.55});
  EXPECT_EQ(tr.terminated, Termination::reached_boundary);
  for (const Point& p : tr.points) EXPECT_NEAR(p.y, 0.55, 2 * pb.grid.dy());
  EXPECT_LT(tr.points.back().x, 2 * pb.grid.dx());
  EXPECT_NEAR(tr.total_time(), 0.2, 2 * pb.grid.dx());
  EXPECT_NEAR(tr.total_time(), tr.length(), 1e-12);
}

TEST(TraceDescent, TimeScalesWithSpeed) {
  Problem pb = unit_problem(61);
  pb.speed = ScalarField(pb.grid, 2.0);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  const Trajectory tr = trace_descent(u, pb.speed, pb.mask, {0.7, 0.4});
  EXPECT_NEAR(tr.total_time(), 0.5 * tr.length(), 1e-12);
}

TEST(TraceDescent, StepFactorControlsVertexSpacing) {
  const Problem pb = unit_problem(51);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  DescentOptions opt;
  opt.step_factor = 0.25;
  const Trajectory tr = trace_descent(u, pb.speed, pb.mask, {0.4, 0.3}, opt);
  for (std::size_t k = 1; k + 1 < tr.points.size(); ++k)
    EXPECT_NEAR(std::hypot(tr.points[k].x - tr.points[k - 1].x, tr.points[k].y - tr.points[k - 1].y), 0.25 * pb.grid.dx(),
                1e-12);
}

TEST(TraceDescent, RejectsBadInput) {
  const Problem pb = unit_problem(21);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  DescentOptions opt;
  opt.step_factor = 0.0;
  EXPECT_THROW(trace_descent(u, pb.speed, pb.mask, {0.5, 0.5}, opt), std::invalid_argument);
  EXPECT_THROW(trace_descent(u, pb.speed, pb.mask, {1.5, 0.5}), std::out_of_range);
  ScalarField blocked = u;
  blocked(10, 10) = kInf;
  EXPECT_THROW(trace_descent(blocked, pb.speed, pb.mask, pb.grid.point(10, 10)), std::invalid_argument);
}

TEST(TraceDescent, StartOnTheBoundaryIsASinglePoint) {
  const Problem pb = unit_problem(21);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  const Trajectory tr = trace_descent(u, pb.speed, pb.mask, {0.0, 0.5});
  EXPECT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.total_time(), 0.0);
}

TEST(TraceDescent, FlatFieldStalls) {
  const Problem pb = unit_problem(21);
  const Trajectory tr = trace_descent(ScalarField(pb.grid, 1.0), pb.speed, pb.mask, {0.5, 0.5});
  EXPECT_EQ(tr.terminated, Termination::stalled);
  EXPECT_EQ(to_string(tr.terminated), "stalled");
}

TEST(PathFunctionals, ConstantIntegrandsGiveTimeMultiples) {
  const Problem pb = unit_problem(41);
  const ScalarField u = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  Trajectory tr = trace_descent(u, pb.speed, pb.mask, {0.3, 0.6});
  const auto fn = path_functionals(tr, ScalarField(pb.grid, 3.0), ScalarField(pb.grid, 0.5));
  EXPECT_NEAR(fn.J1, 3 * tr.total_time(), 1e-12);
  EXPECT_NEAR(fn.J2, 0.5 * tr.total_time(), 1e-12);
  EXPECT_NEAR(fn.P_detect_free, std::exp(-fn.J1), 1e-15);
  ASSERT_EQ(tr.J1.size(), tr.points.size());
  for (std::size_t k = 1; k < tr.J1.size(); ++k) EXPECT_GE(tr.J1[k], tr.J1[k - 1]);
}

TEST(PathFunctionals, PayoffMatchesTheProfitMap) {
  const ScenarioSpec spec = scenarios::example2();
  const Problem pb = build_scenario(spec, 201);
  const ScalarField R = compute_R(pb);
  const auto sweep = run_lambda_sweep(pb, 20);
  const auto pa = profit_map_a(pb, sweep, R);
  const Point x0{0.3, 0.62};
  const auto& t = sweep.triplets[pa.argmax[pb.grid.index(60, 124)]];
  Trajectory tr = trace_descent(t.U, pb.speed, pb.mask, x0);
  const auto fn = path_functionals(tr, pb.psi, pb.cost);
  const double payoff = std::exp(-fn.J1) * pb.benefit(60, 124) - fn.J2;
  EXPECT_NEAR(payoff, sample_bilinear(pa.P_a, x0) + sample_bilinear(R, x0), 5e-2);
}

TEST(ModelGPaths, PostDetectionPathsFollowTheCostField) {
  Problem pb = unit_problem(81);
  pb.psi = ScalarField::from_function(pb.grid, [](double x, double y) { return 3 * std::exp(-20 * ((x - .5) * (x - .5) + (y - .5) * (y - .5))); });
  const ScalarField R = compute_R(pb);
  const auto sol = solve_terminated(pb, R, 1.0);
  const ScalarField uK = solve_eikonal(pb.mask, pb.speed, pb.cost).u;
  const std::vector<Point> det = {{0.3, 0.5}, {0.6, 0.8}};
  const auto paths = model_g_paths(pb, sol, uK, {0.45, 0.4}, det);
  ASSERT_EQ(paths.post_detection.size(), 2u);
  EXPECT_EQ(paths.pre_detection.terminated, Termination::reached_boundary);
  for (const Point& p : paths.post_detection[0].points) EXPECT_NEAR(p.y, 0.5, 2 * pb.grid.dy());
  EXPECT_NEAR(paths.post_detection[1].points.back().y, 1.0, 2 * pb.grid.dy());
  EXPECT_NEAR(paths.post_detection[1].points.back().x, 0.6, 2 * pb.grid.dx());
}
