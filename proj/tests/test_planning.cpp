#include <gtest/gtest.h>

#include "envcrime/planning.hpp"

using namespace envcrime;

namespace {

struct Unit {
  Grid2D g = Grid2D::unit_square(11);
  DomainMask m = DomainMask::open_rectangle(g);
};

}  // namespace

TEST(RegionStats, AllNegativeMapIsPristine) {
  Unit u;
  const auto s = region_stats(ScalarField(u.g, -0.5), ScalarField(u.g, 2.0), u.m);
  EXPECT_EQ(s.A_p, 1.0);
  EXPECT_EQ(s.V_p, 1.0);
  EXPECT_EQ(s.P_max, -0.5);
}

TEST(RegionStats, CountsInsidePointsAndWeighsByBenefit) {
  Unit u;
  const ScalarField P = ScalarField::from_function(u.g, [](double x, double) { return x - 0.45; });
  const ScalarField B = ScalarField::from_function(u.g, [](double x, double) { return x; });
  const auto s = region_stats(P, B, u.m);
  // columns 1..4 are pristine out of 1..9
  EXPECT_NEAR(s.A_p, 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(s.V_p, (1 + 2 + 3 + 4) / 45.0, 1e-15);
  EXPECT_NEAR(s.P_max, 0.45, 1e-15);
  EXPECT_FALSE(s.pristine[u.g.index(0, 5)]);
}

TEST(RegionStats, ThresholdAndZeroLevel) {
  Unit u;
  ScalarField P(u.g, 0.0);
  EXPECT_EQ(region_stats(P, ScalarField(u.g, 1.0), u.m).A_p, 1.0);  // P = 0 is not profitable
  P(5, 5) = 0.2;
  EXPECT_NEAR(region_stats(P, ScalarField(u.g, 1.0), u.m, 0.1).A_p, 80.0 / 81.0, 1e-15);
  EXPECT_EQ(region_stats(P, ScalarField(u.g, 1.0), u.m, 0.3).A_p, 1.0);
  EXPECT_THROW(region_stats(P, ScalarField(Grid2D::unit_square(12), 1.0), u.m), std::invalid_argument);
}

TEST(RegionStats, ZeroBenefitFallsBackToArea) {
  Unit u;
  const ScalarField P = ScalarField::from_function(u.g, [](double x, double) { return x - 0.45; });
  const auto s = region_stats(P, ScalarField(u.g, 0.0), u.m);
  EXPECT_EQ(s.V_p, s.A_p);
}

TEST(HighValueRegion, ThresholdOnGrossPayoff) {
  Unit u;
  const ScalarField P = ScalarField::from_function(u.g, [](double x, double) { return x; });
  const ScalarField R(u.g, 0.0);
  const auto hv = high_value_region(P, R, u.m, 0.5);
  EXPECT_TRUE(hv[u.g.index(9, 3)]);
  EXPECT_TRUE(hv[u.g.index(5, 3)]);  // 0.5 >= 0.5 * 0.9
  EXPECT_FALSE(hv[u.g.index(4, 3)]);
  EXPECT_FALSE(hv[u.g.index(10, 3)]);  // outside
  EXPECT_NEAR(region_share(hv, u.m), 5.0 / 9.0, 1e-15);
  EXPECT_THROW(high_value_region(P, R, u.m, 1.0), std::invalid_argument);
}

TEST(StationLattice, SizeAndCorners) {
  const auto lat = station_lattice(10);
  ASSERT_EQ(lat.size(), 121u);
  EXPECT_EQ(lat.front().x, 0.0);
  EXPECT_EQ(lat.back().y, 1.0);
  EXPECT_EQ(station_lattice(1).size(), 4u);
}

TEST(OptimizeStation, SingleCandidateIsTheMaximizer) {
  SearchOptions opt;
  opt.n_lambda = 4;
  const auto res = optimize_station({{0.5, 0.3}}, Grid2D::unit_square(41), opt);
  ASSERT_EQ(res.best.size(), 1u);
  EXPECT_EQ(res.best[0], 0u);
  EXPECT_THROW(optimize_station({}, Grid2D::unit_square(41), opt), std::invalid_argument);
}

TEST(OptimizeStation, MirrorCandidatesTieAndSearchIsDeterministic) {
  SearchOptions opt;
  opt.n_lambda = 6;
  const std::vector<Point> cands = {{0.5, 0.3}, {0.5, 0.7}, {0.1, 0.1}};
  const Grid2D g = Grid2D::unit_square(41);
  const auto a = optimize_station(cands, g, opt);
  opt.workers = 2;
  const auto b = optimize_station(cands, g, opt);
  for (std::size_t c = 0; c < cands.size(); ++c) {
    EXPECT_EQ(a.results[c].A_p, b.results[c].A_p);
    EXPECT_EQ(a.results[c].P_max, b.results[c].P_max);
  }
  EXPECT_NEAR(a.results[0].A_p, a.results[1].A_p, 1e-3);
  opt.tie_tolerance = 1e-3;
  const auto c = optimize_station(cands, g, opt);
  EXPECT_TRUE(std::find(c.best.begin(), c.best.end(), 0u) != c.best.end());
  EXPECT_TRUE(std::find(c.best.begin(), c.best.end(), 1u) != c.best.end());
}

TEST(OptimizeWeights, SingleIntervalHasTwoWeights) {
  SearchOptions opt;
  opt.n_lambda = 3;
  const auto res = optimize_weights(1, Grid2D::unit_square(31), opt);
  ASSERT_EQ(res.candidates.size(), 2u);
  EXPECT_EQ(res.candidates[0], 0.0);
  EXPECT_EQ(res.candidates[1], 1.0);
  EXPECT_FALSE(res.best.empty());
}
