#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace specpack;
using namespace specpack::spectrum;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Assemble, MatrixEntriesAndRowSums) {
  auto s = testsupport::random_graph(5, 20, 10, 2, false);
  auto lap = assemble(s);
  Eigen::MatrixXd L(lap.L);
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    EXPECT_NEAR(L.row(i).sum(), 0.0, 1e-13);
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      EXPECT_EQ(L(i, j), L(j, i));
      if (i != j) {
        EXPECT_LE(L(i, j), 0.0);
      }
    }
    EXPECT_EQ(lap.mass[i], s.measure(static_cast<PointId>(i)));
  }
}

TEST(Eigenvalues, ThreePointPath) {
  auto s = MetricMeasureSpace::from_graph(3, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {1, 1, 1}, 1);
  auto res = eigenvalues(s, 3);
  ASSERT_EQ(res.eigenvalues.size(), 3u);
  EXPECT_NEAR(res.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(res.eigenvalues[1], 1.0, 1e-14);
  EXPECT_NEAR(res.eigenvalues[2], 3.0, 1e-14);
}

TEST(Eigenvalues, CycleClosedForm) {
  for (std::size_t n : {5u, 12u, 40u}) {
    auto res = eigenvalues(domains::cycle(n), n);
    std::vector<double> exact;
    for (std::size_t j = 0; j < n; ++j) exact.push_back(2.0 - 2.0 * std::cos(2.0 * kPi * j / n));
    std::sort(exact.begin(), exact.end());
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(res.eigenvalues[j], exact[j], 1e-12) << n << " " << j;
  }
}

TEST(Eigenvalues, DisconnectedHasRepeatedZero) {
  std::vector<std::vector<double>> d{{0, 1, 5, 6}, {1, 0, 4, 5}, {5, 4, 0, 1}, {6, 5, 1, 0}};
  auto s = MetricMeasureSpace::from_distance_matrix(d, {1, 1, 1, 1}, 1, {{0, 1, 1, 1}, {2, 3, 1, 1}});
  auto res = eigenvalues(s, 4);
  EXPECT_NEAR(res.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(res.eigenvalues[1], 0.0, 1e-14);
  EXPECT_NEAR(res.eigenvalues[2], 2.0, 1e-14);
}

TEST(Eigenvalues, MatchIndependentDenseSolve) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto s = testsupport::random_graph(seed, 60, 40, 2, false);
    auto oracle = testsupport::dense_spectrum(s);
    auto res = eigenvalues(s, 20);
    for (std::size_t j = 0; j < 20; ++j) EXPECT_LE(rel(res.eigenvalues[j], oracle[j]), 1e-10);
    for (double r : res.residuals) EXPECT_LE(r, 1e-9);
  }
}

TEST(Eigenvalues, KrylovAgreesWithDense) {
  std::vector<MetricMeasureSpace> spaces{domains::grid(20, 25, 0.1), domains::torus_grid(18, 20),
                                         testsupport::random_graph(9, 400, 300, 2, false),
                                         domains::point_cloud(300, 4, 0.15)};
  for (const auto& s : spaces) {
    const std::size_t m = 30;
    auto dense = eigenvalues(assemble(s), m, 1e-12, Method::Dense);
    auto kry = eigenvalues(assemble(s), m, 1e-12, Method::Krylov, 3);
    EXPECT_EQ(kry.method, "krylov");
    for (std::size_t j = 0; j < m; ++j) EXPECT_LE(rel(kry.eigenvalues[j], dense.eigenvalues[j]), 1e-8) << j;
  }
}

TEST(Eigenvalues, ScalingMultipliesByInverseSquare) {
  auto s = testsupport::random_graph(21, 50, 30, 2, false);
  auto base = eigenvalues(s, 10);
  for (double t : {0.5, 2.0, 3.0}) {
    auto scaled = eigenvalues(scale_space(s, t), 10);
    for (std::size_t j = 1; j < 10; ++j)
      EXPECT_LE(rel(scaled.eigenvalues[j] * t * t, base.eigenvalues[j]), 1e-9);
  }
}

TEST(Eigenvalues, Errors) {
  auto s = testsupport::unit_path(5);
  EXPECT_THROW(eigenvalues(s, 0), DomainError);
  EXPECT_THROW(eigenvalues(s, 6), DomainError);
  EXPECT_THROW(eigenvalues(s, 2, 0.0), DomainError);
  auto lonely = MetricMeasureSpace::from_distance_matrix({{0.0}}, {1.0}, 1);
  EXPECT_THROW(eigenvalues(lonely, 1), DomainError);
}

TEST(Continuum, RectangleValues) {
  auto v = rectangle_neumann_values(1.0, 1.0, 6);
  const double pi2 = kPi * kPi;
  EXPECT_EQ(v, (std::vector<double>{0.0, pi2, pi2, 2 * pi2, 4 * pi2, 4 * pi2}));
}

TEST(Continuum, UnitSquareSixteenth) {
  // Coarse companion of the acceptance run: h = 1/16, first six nonzero within 2%.
  auto rows = continuum_check(1.0, 1.0, 1.0 / 16.0, 7);
  EXPECT_NEAR(rows[0].discrete, 0.0, 1e-10);
  for (std::size_t i = 1; i < 7; ++i) EXPECT_LE(rows[i].relative_error, 0.02) << i;
  EXPECT_LE(std::abs(rows[1].discrete - rows[2].discrete), 1e-9);
  // Finite differences underestimate the Neumann spectrum.
  for (std::size_t i = 1; i < 7; ++i) EXPECT_LT(rows[i].discrete, rows[i].continuum);
}

TEST(Continuum, ErrorShrinksUnderRefinement) {
  double prev = 1.0;
  for (double h : {1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0}) {
    auto rows = continuum_check(2.0, 1.0, h, 4);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.relative_error);
    EXPECT_LT(worst, prev);
    prev = worst;
  }
}
