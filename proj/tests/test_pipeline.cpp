#include <gtest/gtest.h>

#include "support.hpp"

using namespace specpack;
using namespace specpack::pipeline;
using geometry::ConstantsVariant;
using geometry::theorem2_constants;

namespace {

std::string failures(const PipelineReport& rep) {
  std::string out;
  for (const auto& c : rep.checks)
    if (!c.pass) out += c.name + " (margin " + std::to_string(c.margin) + "); ";
  return out;
}

}  // namespace

TEST(PipelineScale, Branches) {
  auto c = theorem2_constants(2);
  const double denom = 8.0 * c.C1 * c.C1 * c.omega_prime_n;
  EXPECT_EQ(pipeline_scale(c, 1.5, 10.0), 1.5);
  EXPECT_EQ(pipeline_scale(c, 0.0, 10.0), 1.0);
  // Large volume: rescale so that k_0 = 1 after scaling.
  const double t = pipeline_scale(c, 0.0, 100.0 * denom);
  EXPECT_NEAR(t * t * 100.0 * denom, 0.5 * denom, 1e-6 * denom);
  EXPECT_EQ(geometry::schedule_radius(c, t * t * 100.0 * denom, 1).k_0, 1u);
}

TEST(Pipeline, TorusSmallVolume) {
  auto s = domains::torus_grid(32, 32);
  auto rep = theorem2_pipeline(s, theorem2_constants(2), 0.0, 4);
  EXPECT_TRUE(rep.pass()) << failures(rep);
  EXPECT_EQ(rep.t, 1.0);
  EXPECT_EQ(rep.k0, 1u);
  EXPECT_EQ(rep.N, 8u);
  EXPECT_EQ(rep.family.A.size(), 8u);
  EXPECT_EQ(rep.q.selected.size(), 4u);
  EXPECT_LE(rep.lambda_k, rep.constructed_bound);
  EXPECT_LE(rep.constructed_bound, rep.minmax_selected.bounds[3] * rep.t * rep.t * (1 + 1e-15));
  EXPECT_EQ(rep.certified_bound, std::min(rep.constructed_bound, rep.theorem_bound));
  EXPECT_NEAR(rep.lambda_k, 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 32.0), 1e-10);
}

TEST(Pipeline, LargeVolumeCurvedBranchBelowK0) {
  // V far above 8 C1^2 omega' so that k < k_0 at a = 1 (t = 1).
  auto s = domains::torus_grid(16, 16, 200.0);
  auto c = theorem2_constants(2);
  for (std::size_t k : {1u, 2u, 3u}) {
    auto rep = theorem2_pipeline(s, c, 1.0, k);
    ASSERT_GT(rep.k0, k);
    EXPECT_EQ(rep.k_eff, rep.k0);
    EXPECT_EQ(rep.N, 2 * rep.k0);
    EXPECT_TRUE(rep.pass()) << failures(rep);
    EXPECT_NEAR(rep.proof_bound, rep.theorem_bound, 1e-12 * rep.theorem_bound);
  }
}

TEST(Pipeline, LargeVolumeFlatBranchRescales) {
  auto s = domains::torus_grid(16, 16, 200.0);
  auto c = theorem2_constants(2);
  auto rep = theorem2_pipeline(s, c, 0.0, 3);
  EXPECT_LT(rep.t, 1.0);
  EXPECT_EQ(rep.k0, 1u);
  EXPECT_EQ(rep.k_eff, 3u);
  EXPECT_TRUE(rep.pass()) << failures(rep);
  EXPECT_NEAR(rep.proof_bound, rep.theorem_bound, 1e-12 * rep.theorem_bound);
}

TEST(Pipeline, EuclideanVariantAndSweep) {
  auto s = domains::rectangle(1.0, 1.0, 1.0 / 16.0);
  PipelineOptions opt;
  opt.kmax = 20;
  auto rep = theorem2_pipeline(s, theorem2_constants(2, ConstantsVariant::Euclidean), 0.0, 5, opt);
  EXPECT_TRUE(rep.pass()) << failures(rep);
  ASSERT_EQ(rep.sweep.size(), 20u);
  for (const auto& row : rep.sweep) EXPECT_LE(row.lambda, row.bound);
}

TEST(Pipeline, BoundShapeInvariant) {
  for (int n : {2, 3}) {
    auto c = theorem2_constants(n);
    for (double a : {0.0, 0.5, 2.0})
      for (double V : {1.0, 1e3, 1e7})
        for (std::size_t k : {1u, 10u, 100u}) {
          const double weyl = std::pow(static_cast<double>(k) / V, 2.0 / n);
          const double shaped = geometry::bound_theorem2(c, a, V, k) / weyl;
          EXPECT_LE(shaped, (c.B_n + c.A_n * a * a / weyl) * (1 + 1e-14));
        }
  }
}

TEST(Pipeline, RejectsBadArguments) {
  auto s = domains::torus_grid(8, 8);
  EXPECT_THROW(theorem2_pipeline(s, theorem2_constants(2), 0.0, 0), DomainError);
  EXPECT_THROW(theorem2_pipeline(s, theorem2_constants(2), -1.0, 1), DomainError);
  EXPECT_THROW(theorem2_pipeline(s, theorem2_constants(3), 0.0, 1), DomainError);
  EXPECT_THROW(theorem2_pipeline(s, theorem2_constants(2, ConstantsVariant::Euclidean), 1.0, 1), DomainError);
}
