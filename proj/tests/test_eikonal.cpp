#include <gtest/gtest.h>

#include <cmath>

#include "envcrime/eikonal.hpp"
#include "envcrime/multiobjective.hpp"
#include "envcrime/scenarios.hpp"

using namespace envcrime;

namespace {

struct Square {
  Grid2D g;
  DomainMask m;
  explicit Square(int n) : g(Grid2D::unit_square(n)), m(DomainMask::open_rectangle(g)) {}
};

ScalarField ones(const Grid2D& g) { return ScalarField(g, 1.0); }

}  // namespace

TEST(PointUpdate, OneSidedAndSymmetric) {
  const double h = 0.1;
  EXPECT_DOUBLE_EQ(point_update({0.0, kInf}, 1.0, 1.0, h, h), h);
  EXPECT_DOUBLE_EQ(point_update({kInf, 0.0}, 1.0, 1.0, h, h), h);
  EXPECT_NEAR(point_update({0.0, 0.0}, 1.0, 1.0, h, h), h / std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(std::isinf(point_update({kInf, kInf}, 1.0, 1.0, h, h)));
}

TEST(PointUpdate, RejectsNonUpwindNeighbor) {
  const double h = 0.01;
  EXPECT_DOUBLE_EQ(point_update({0.0, 10.0}, 1.0, 1.0, h, h), h);
  // The two-sided quadratic would give a root below 10; check the branch by hand.
  const double a = 0.0, b = 10.0;
  const double disc = 2 - (a - b) * (a - b) / (h * h);
  EXPECT_LT(disc, 0.0);
}

TEST(PointUpdate, SolvesTheQuadraticOnUnequalSpacing) {
  const double a = 0.3, b = 0.35, dx = 0.1, dy = 0.05, c = 2.0;
  const double u = point_update({a, b}, 1.0, c, dx, dy);
  EXPECT_GE(u, b);
  EXPECT_NEAR((u - a) * (u - a) / (dx * dx) + (u - b) * (u - b) / (dy * dy), c * c, 1e-10);
}

TEST(UpwindStencil, FollowsTheThreeBranchRule) {
  const Grid2D g = Grid2D::unit_square(3);
  ScalarField u(g, 0.0);
  u(1, 1) = 1.0;
  u(2, 1) = 0.5;
  u(0, 1) = 0.5;  // exact tie: forward wins (<=)
  u(1, 2) = 0.7;
  u(1, 0) = 0.4;  // backward strictly smaller
  auto s = upwind_stencil(u, 1, 1);
  EXPECT_EQ(s.x, Direction::forward);
  EXPECT_EQ(s.y, Direction::backward);
  u(2, 1) = 2.0;
  u(0, 1) = 2.0;
  EXPECT_EQ(upwind_stencil(u, 1, 1).x, Direction::none);
}

TEST(SolveEikonal, DistanceOnTheSquareConverges) {
  double prev = kInf;
  for (int n : {51, 101, 201}) {
    Square s(n);
    const auto sol = solve_eikonal(s.m, ones(s.g), ones(s.g));
    const double err = std::abs(sol.u(n / 2, n / 2) - 0.5);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(SolveEikonal, DiskCenterApproachesOneHalf) {
  const auto spec = scenarios::example1();
  const Grid2D g = Grid2D::unit_square(201);
  const DomainMask m = spec.mask(g);
  const auto sol = solve_eikonal(m, ones(g), ones(g));
  EXPECT_NEAR(sol.u(100, 100), 0.5, 0.02);
}

TEST(SolveEikonal, OutsideZeroAndOrderMonotone) {
  Square s(41);
  const ScalarField rhs = ScalarField::from_function(s.g, [](double x, double y) { return 1 + x * y; });
  const auto sol = solve_eikonal(s.m, ones(s.g), rhs);
  for (std::size_t k = 0; k < s.g.size(); ++k) {
    if (!s.m.inside(k)) {
      EXPECT_EQ(sol.u[k], 0.0);
    }
    EXPECT_GE(sol.u[k], 0.0);
  }
  ASSERT_EQ(sol.order.size(), s.m.inside_count());
  for (std::size_t k = 1; k < sol.order.size(); ++k) EXPECT_LE(sol.u[sol.order[k - 1]], sol.u[sol.order[k]]);
  EXPECT_LE(eikonal_residual(s.m, ones(s.g), rhs, sol.u), 1e-9);
}

TEST(SolveEikonal, DoublingSpeedHalvesValues) {
  Square s(61);
  const ScalarField rhs = ScalarField::from_function(s.g, [](double x, double y) { return 1 + std::sin(3 * x) * y; });
  const auto u1 = solve_eikonal(s.m, ones(s.g), rhs).u;
  const auto u2 = solve_eikonal(s.m, ScalarField(s.g, 2.0), rhs).u;
  for (std::size_t k = 0; k < u1.size(); ++k) EXPECT_NEAR(u2[k], 0.5 * u1[k], 1e-12 * std::max(1.0, u1[k]));
}

TEST(SolveEikonal, ObstaclesEncloseUnreachablePoints) {
  Square s(21);
  ScalarField f = ones(s.g);
  for (int k = 5; k <= 15; ++k) f(5, k) = f(15, k) = f(k, 5) = f(k, 15) = 0.0;
  const auto sol = solve_eikonal(s.m, f, ones(s.g));
  EXPECT_TRUE(std::isinf(sol.u(10, 10)));
  EXPECT_TRUE(std::isinf(sol.u(5, 5)));
  EXPECT_TRUE(std::isfinite(sol.u(2, 2)));
  EXPECT_LE(eikonal_residual(s.m, f, ones(s.g), sol.u), 1e-9);
}

TEST(SolveEikonal, AllObstacleInteriorIsInfiniteWithoutError) {
  Square s(11);
  const auto sol = solve_eikonal(s.m, ScalarField(s.g, 0.0), ones(s.g));
  EXPECT_TRUE(std::isinf(sol.u(5, 5)));
  EXPECT_TRUE(sol.order.empty());
}

TEST(Sweeping, MatchesFastMarching) {
  Square s(81);
  const ScalarField f = ScalarField::from_function(s.g, [](double x, double y) { return 1 + 0.5 * std::cos(5 * x * y); });
  const ScalarField rhs = ScalarField::from_function(s.g, [](double x, double y) { return 0.2 + x * x + y; });
  const auto a = solve_eikonal(s.m, f, rhs).u;
  const auto b = solve_eikonal_sweeping(s.m, f, rhs).u;
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
}

TEST(Sweeping, SingleInsidePoint) {
  const Grid2D g = Grid2D::unit_square(5);
  std::vector<std::uint8_t> flags(g.size(), 0);
  flags[g.index(2, 2)] = 1;
  const DomainMask m(g, flags);
  const auto sol = solve_eikonal_sweeping(m, ones(g), ones(g));
  EXPECT_DOUBLE_EQ(sol.u(2, 2), point_update({0.0, 0.0}, 1.0, 1.0, g.dx(), g.dy()));
}

TEST(Sweeping, ThrowsWhenTheCapIsTooSmall) {
  Square s(41);
  SweepingOptions opt;
  opt.max_sweeps = 1;
  const ScalarField f = ScalarField::from_function(s.g, [](double x, double) { return x < 0.5 ? 1.0 : 0.1; });
  EXPECT_THROW(solve_eikonal_sweeping(s.m, f, ones(s.g), opt), SolverError);
}

TEST(Transport, ZeroDetectionGivesZeroV1) {
  Square s(41);
  const ScalarField psi(s.g, 0.0), cost = ones(s.g);
  const ScalarField kl = scalarized_cost(psi, cost, 0.3);
  const auto eik = solve_eikonal(s.m, ones(s.g), kl);
  const auto [v1, v2] = solve_transport_pair(s.m, eik, ones(s.g), psi, cost, kl);
  for (std::size_t k = 0; k < v1.size(); ++k) EXPECT_EQ(v1[k], 0.0);
}

TEST(Transport, CostOnlyWeightReproducesU) {
  Square s(41);
  const ScalarField psi = ScalarField::from_function(s.g, [](double x, double y) { return x + y; });
  const ScalarField kl = scalarized_cost(psi, ones(s.g), 0.0);
  const auto eik = solve_eikonal(s.m, ones(s.g), kl);
  const auto [v1, v2] = solve_transport_pair(s.m, eik, ones(s.g), psi, ones(s.g), kl);
  for (std::size_t k = 0; k < v2.size(); ++k) EXPECT_NEAR(v2[k], eik.u[k], 1e-12);
}

TEST(Transport, IdentityHoldsForEveryWeight) {
  Square s(61);
  const ScalarField f = ScalarField::from_function(s.g, [](double x, double y) { return 0.7 + 0.3 * x * y; });
  const ScalarField psi =
      ScalarField::from_function(s.g, [](double x, double y) { return 4 * std::exp(-20 * ((x - .4) * (x - .4) + (y - .6) * (y - .6))); });
  const ScalarField cost = ScalarField::from_function(s.g, [](double x, double) { return 1 + x; });
  for (double lam : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const ScalarField kl = scalarized_cost(psi, cost, lam);
    const auto eik = solve_eikonal(s.m, f, kl);
    const auto [v1, v2] = solve_transport_pair(s.m, eik, f, psi, cost, kl);
    for (std::size_t k = 0; k < v1.size(); ++k) {
      EXPECT_NEAR(lam * v1[k] + (1 - lam) * v2[k], eik.u[k], 1e-10);
      EXPECT_GE(v1[k], 0.0);
      EXPECT_GE(v2[k], 0.0);
    }
  }
}

TEST(Transport, DegenerateStencilIsReported) {
  Square s(5);
  EikonalSolution eik{ScalarField(s.g, 0.0), {s.g.index(2, 2)}};
  eik.u(2, 2) = 0.0;  // no upwind neighbor strictly below
  const ScalarField one = ones(s.g);
  EXPECT_THROW(solve_transport_pair(s.m, eik, one, one, one, one), SolverError);
}
