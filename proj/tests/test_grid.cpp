#include <gtest/gtest.h>

#include <cmath>

#include "envcrime/grid.hpp"
#include "envcrime/scenarios.hpp"

using namespace envcrime;

TEST(Grid2D, GeometryAndIndexing) {
  const Grid2D g(4, 2, 2.0, 1.0);
  EXPECT_EQ(g.cols(), 5);
  EXPECT_EQ(g.rows(), 3);
  EXPECT_EQ(g.size(), 15u);
  EXPECT_DOUBLE_EQ(g.dx(), 0.5);
  EXPECT_DOUBLE_EQ(g.dy(), 0.5);
  EXPECT_EQ(g.index(3, 2), 13u);
  EXPECT_EQ(g.col_of(13), 3);
  EXPECT_EQ(g.row_of(13), 2);
  EXPECT_DOUBLE_EQ(g.x(3), 1.5);
  EXPECT_TRUE(g.valid(4, 2));
  EXPECT_FALSE(g.valid(5, 0));
}

TEST(Grid2D, RejectsDegenerateGrids) {
  EXPECT_THROW(Grid2D(1, 5, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid2D(5, 5, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Grid2D(5, 5, 1.0, std::nan("")), std::invalid_argument);
}

TEST(Grid2D, FromSpacingKeepsSpacingExact) {
  const Grid2D g = Grid2D::from_spacing(499, 399, 30.0, 30.0);
  EXPECT_EQ(g.dx(), 30.0);
  EXPECT_EQ(g.x(499), 499 * 30.0);
}

TEST(DomainMask, NeedsInsideAndOutsidePoints) {
  const Grid2D g = Grid2D::unit_square(5);
  EXPECT_THROW(DomainMask(g, std::vector<std::uint8_t>(g.size(), 0)), std::invalid_argument);
  EXPECT_THROW(DomainMask(g, std::vector<std::uint8_t>(g.size(), 1)), std::invalid_argument);
  const DomainMask m = DomainMask::open_rectangle(g);
  EXPECT_EQ(m.inside_count(), 9u);
  EXPECT_TRUE(m.on_boundary(0, 2));
  EXPECT_FALSE(m.on_boundary(0, 0));
  EXPECT_FALSE(m.on_boundary(2, 2));
}

TEST(IntegrateField, ConstantOneGivesInsideArea) {
  const Grid2D g = Grid2D::unit_square(101);
  const DomainMask m = DomainMask::open_rectangle(g);
  const double area = integrate_field(ScalarField(g, 1.0), m);
  EXPECT_NEAR(area, 1.0, 4 * g.dx());
  EXPECT_DOUBLE_EQ(area, 99.0 * 99.0 * g.cell_area());
}

TEST(IntegrateField, ZeroFieldAndErrors) {
  const Grid2D g = Grid2D::unit_square(11);
  const DomainMask m = DomainMask::open_rectangle(g);
  EXPECT_EQ(integrate_field(ScalarField(g, 0.0), m), 0.0);
  EXPECT_THROW(integrate_field(ScalarField(g, 1.0), m, 0.5), std::domain_error);
  EXPECT_THROW(integrate_field(ScalarField(g, -1.0), m, 1.5), std::domain_error);
  EXPECT_DOUBLE_EQ(integrate_field(ScalarField(g, -1.0), m, 2.0), 81 * g.cell_area());
}

TEST(NormalizeBudget, UniformShapes) {
  const Grid2D g = Grid2D::unit_square(101);
  const DomainMask m = DomainMask::open_rectangle(g);
  const double inside_area = integrate_field(ScalarField(g, 1.0), m);
  const ScalarField a = normalize_budget(ScalarField(g, 1.0), m, 2.0, 1.0);
  EXPECT_NEAR(a(50, 50), 2.0 / inside_area, 1e-12);
  EXPECT_NEAR(a(50, 50), 2.0, 0.1);
  const ScalarField b = normalize_budget(ScalarField(g, 1.0), m, 4.0, 2.0);
  EXPECT_NEAR(b(50, 50), std::sqrt(4.0 / inside_area), 1e-12);
  EXPECT_NEAR(b(50, 50), 2.0, 0.1);
}

TEST(NormalizeBudget, RoundTripsAndIsHomogeneous) {
  const Grid2D g = Grid2D::unit_square(201);
  const DomainMask m = DomainMask::open_rectangle(g);
  const ScalarField shape = ScalarField::from_function(
      g, [](double x, double y) { return scenarios::banded_shape(scenarios::square_distance(x, y)); });
  for (double gamma : {1.0, 1.5, 2.0}) {
    const ScalarField psi = normalize_budget(shape, m, 2.0, gamma);
    EXPECT_NEAR(integrate_field(psi, m, gamma), 2.0, 2e-10) << gamma;
    const ScalarField scaled = normalize_budget(shape * 37.5, m, 2.0, gamma);
    for (std::size_t k = 0; k < psi.size(); k += 97) EXPECT_NEAR(scaled[k], psi[k], 1e-12 * std::abs(psi[k]));
  }
}

TEST(NormalizeBudget, RejectsInfeasibleShapes) {
  const Grid2D g = Grid2D::unit_square(11);
  const DomainMask m = DomainMask::open_rectangle(g);
  EXPECT_THROW(normalize_budget(ScalarField(g, 0.0), m, 1.0), std::invalid_argument);
  EXPECT_THROW(normalize_budget(ScalarField(g, 1.0), m, -1.0), std::invalid_argument);
  EXPECT_THROW(normalize_budget(ScalarField(g, 1.0), m, 1.0, 0.5), std::invalid_argument);
}

TEST(SampleBilinear, ReproducesNodesAndBilinearFunctions) {
  const Grid2D g(10, 8, 2.0, 1.0);
  const ScalarField f = ScalarField::from_function(g, [](double x, double y) { return 3 * x - 2 * y + x * y + 1; });
  EXPECT_DOUBLE_EQ(sample_bilinear(f, g.point(3, 5)), f(3, 5));
  for (Point p : {Point{0.3, 0.7}, Point{1.95, 0.01}, Point{2.0, 1.0}, Point{0.0, 0.0}})
    EXPECT_NEAR(sample_bilinear(f, p), 3 * p.x - 2 * p.y + p.x * p.y + 1, 1e-12);
  const ScalarField c(g, 4.25);
  EXPECT_DOUBLE_EQ(sample_bilinear(c, {0.5 * g.dx(), 0.5 * g.dy()}), 4.25);
}

TEST(SampleBilinear, OutOfBoxThrowsAndInfiniteCornersAreIgnoredAtNodes) {
  const Grid2D g = Grid2D::unit_square(5);
  ScalarField f(g, 1.0);
  EXPECT_THROW(sample_bilinear(f, {-0.1, 0.5}), std::out_of_range);
  EXPECT_THROW(sample_bilinear(f, {0.5, 1.5}), std::out_of_range);
  f(3, 2) = kInf;
  EXPECT_EQ(sample_bilinear(f, g.point(2, 2)), 1.0);
  EXPECT_TRUE(std::isinf(sample_bilinear(f, {0.6, 0.5})));
}

TEST(Problem, ValidateChecksSignsAndGrids) {
  const Grid2D g = Grid2D::unit_square(6);
  Problem pb{g, DomainMask::open_rectangle(g), ScalarField(g, 1.0), ScalarField(g, 0.0), ScalarField(g, 1.0),
             ScalarField(g, 1.0), 0.0, std::nullopt};
  EXPECT_NO_THROW(pb.validate());
  pb.psi(2, 2) = -1.0;
  EXPECT_THROW(pb.validate(), std::invalid_argument);
  pb.psi(2, 2) = 0.0;
  pb.cost(2, 2) = 0.0;
  EXPECT_THROW(pb.validate(), std::invalid_argument);
  pb.cost = ScalarField(Grid2D::unit_square(7), 1.0);
  EXPECT_THROW(pb.validate(), std::invalid_argument);
}
