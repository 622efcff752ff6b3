#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "formpc/avoidance.h"
#include "formpc/errors.h"
#include "oracles.h"

namespace formpc {
namespace {

PlanarTrajectory points(std::initializer_list<Eigen::Vector2d> pts) {
  PlanarTrajectory t(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index k = 0;
  for (const auto& p : pts) t.row(k++) = p.transpose();
  return t;
}

TEST(ReduceObstacle, AddsMargin) {
  EXPECT_DOUBLE_EQ(reduce_obstacle({{10, 0}, 2.0}, 1.0).effective_radius(), 3.0);
  EXPECT_DOUBLE_EQ(reduce_obstacle({{10, 0}, 2.0}, 0.0).effective_radius(), 2.0);
  const CircleObstacle a = reduce_obstacle({{0, 0}, 1.0}, 0.5);
  const CircleObstacle b = reduce_obstacle({{0, 0.5}, 2.0}, 0.5);
  EXPECT_DOUBLE_EQ(a.effective_radius(), 1.5);
  EXPECT_DOUBLE_EQ(b.effective_radius(), 2.5);
}

TEST(ReduceObstacle, RejectsBadInput) {
  EXPECT_THROW(reduce_obstacle({{0, 0}, 0.0}, 1.0), ConfigError);
  EXPECT_THROW(reduce_obstacle({{0, 0}, -1.0}, 1.0), ConfigError);
  EXPECT_THROW(reduce_obstacle({{0, 0}, 1.0}, -0.1), ConfigError);
}

TEST(ObstacleConstraints, SupportingHalfPlane) {
  const CircleObstacle o{{10, 0}, 3.0, 0.0};
  const ConstraintSet set = obstacle_constraints(points({{6, 0}}), o);
  ASSERT_EQ(set.rows.size(), 1u);
  const HalfPlane& h = set.rows[0];
  EXPECT_EQ(h.step, 1);
  EXPECT_TRUE(h.soft);
  EXPECT_TRUE(h.normal.isApprox(Eigen::Vector2d(-1, 0)));
  // -(x - 10) >= 3  <=>  -x >= -7
  EXPECT_DOUBLE_EQ(h.offset, -7.0);
  EXPECT_DOUBLE_EQ(h.slack_at({7, 0}), 0.0);
  EXPECT_DOUBLE_EQ(h.slack_at({6, 0}), 1.0);
}

TEST(ObstacleConstraints, BoundaryPointIsTangent) {
  const CircleObstacle o{{0, 0}, 2.0, 1.0};
  const Eigen::Vector2d p(3.0 / std::sqrt(2.0), 3.0 / std::sqrt(2.0));
  const ConstraintSet set = obstacle_constraints(points({p}), o);
  EXPECT_NEAR(set.rows[0].slack_at(p), 0.0, 1e-14);
}

TEST(ObstacleConstraints, FarPointSlackIsDistanceToDisk) {
  const CircleObstacle o{{1, 2}, 2.0, 0.5};
  const Eigen::Vector2d p(20, -7);
  const ConstraintSet set = obstacle_constraints(points({p}), o);
  EXPECT_NEAR(set.rows[0].slack_at(p), (p - o.center).norm() - 2.5, 1e-12);
}

TEST(ObstacleConstraints, CenterFallsBackToPlusX) {
  const CircleObstacle o{{4, 4}, 1.0, 0.0};
  const ConstraintSet set = obstacle_constraints(points({{4, 4}, {8, 4}}), o);
  ASSERT_EQ(set.rows.size(), 2u);
  EXPECT_EQ(set.rows[0].normal, Eigen::Vector2d::UnitX());
  EXPECT_EQ(set.diagnostics.size(), 1u);
  EXPECT_EQ(set.rows[1].step, 2);
}

TEST(ObstacleConstraints, OuterApproximationIsSound) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const CircleObstacle o{testing::random_vector(rng, 2, 10.0), 1.0 + std::abs(u(rng)) * 4.0,
                           std::abs(u(rng))};
    const Eigen::Vector2d lin = o.center + testing::random_vector(rng, 2, 15.0);
    const HalfPlane h = obstacle_constraints(points({lin}), o).rows[0];
    // Any point on the feasible side is outside (or on) the disk.
    const Eigen::Vector2d q = o.center + testing::random_vector(rng, 2, 20.0);
    if (h.slack_at(q) >= 0.0) {
      EXPECT_GE((q - o.center).norm(), o.effective_radius() - 1e-12);
    }
    // The boundary line touches the circle at exactly one point.
    const Eigen::Vector2d touch = o.center + o.effective_radius() * h.normal;
    EXPECT_NEAR(h.slack_at(touch), 0.0, 1e-10);
  }
}

TEST(SeparationConstraints, GeometryExample) {
  const SeparationSet set =
      separation_constraints(points({{0, 0}}), points({{4, 0}}), SeparationSpec{2.0});
  ASSERT_EQ(set.rows.size(), 1u);
  const auto& c = set.rows[0];
  EXPECT_TRUE(c.normal.isApprox(Eigen::Vector2d(-1, 0)));
  EXPECT_DOUBLE_EQ(c.distance, 2.0);
  EXPECT_DOUBLE_EQ(c.fixed_other().slack_at({0, 0}), 2.0);
}

TEST(SeparationConstraints, TightAtMinimumDistance) {
  const SeparationSet set =
      separation_constraints(points({{0, 0}}), points({{0, 2}}), SeparationSpec{2.0});
  EXPECT_NEAR(set.rows[0].fixed_other().slack_at({0, 0}), 0.0, 1e-15);
}

TEST(SeparationConstraints, SymmetricCallMirrors) {
  const PlanarTrajectory a = points({{1, 2}, {3, 1}});
  const PlanarTrajectory b = points({{4, 6}, {3, 5}});
  const SeparationSpec spec{1.5};
  const SeparationSet ij = separation_constraints(a, b, spec);
  const SeparationSet ji = separation_constraints(b, a, spec);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_TRUE(ij.rows[k].normal.isApprox(-ji.rows[k].normal));
    // Satisfying both at the linearization points implies the distance bound.
    const Eigen::Vector2d pi = a.row(static_cast<Eigen::Index>(k)).transpose();
    const Eigen::Vector2d pj = b.row(static_cast<Eigen::Index>(k)).transpose();
    EXPECT_GE(ij.rows[k].normal.dot(pi - pj), spec.d_min);
    EXPECT_GE((pi - pj).norm(), ij.rows[k].normal.dot(pi - pj) - 1e-12);
  }
}

TEST(SeparationConstraints, CoincidentPairDiagnosed) {
  const SeparationSet set =
      separation_constraints(points({{1, 1}}), points({{1, 1}}), SeparationSpec{2.0});
  EXPECT_EQ(set.rows[0].normal, Eigen::Vector2d::UnitX());
  EXPECT_EQ(set.diagnostics.size(), 1u);
}

TEST(SeparationConstraints, LengthMismatchThrows) {
  EXPECT_THROW(separation_constraints(points({{0, 0}}), points({{1, 0}, {2, 0}}), {2.0}),
               ConfigError);
}

TEST(SideBias, PushesHeadOnPointsLeft) {
  const CircleObstacle o{{10, 0}, 3.0, 0.0};
  const PlanarTrajectory lin = points({{5, 0}, {15, 0}, {5, 2}});
  const PlanarTrajectory travel = points({{1, 0}, {1, 0}, {1, 0}});
  const PlanarTrajectory out = side_biased_points(lin, travel, o, 0.75);
  EXPECT_TRUE(out.row(0).isApprox(Eigen::RowVector2d(5, 0.75)));
  EXPECT_TRUE(out.row(1).isApprox(lin.row(1)));  // past the center
  EXPECT_TRUE(out.row(2).isApprox(lin.row(2)));  // already offset
  // The moved point still yields a tangent half-plane.
  const HalfPlane h = obstacle_constraints(out.topRows(1), o).rows[0];
  EXPECT_NEAR(h.slack_at(o.center + 3.0 * h.normal), 0.0, 1e-12);
}

TEST(SideBias, KeepsSideOfSmallOffsets) {
  const CircleObstacle o{{0, 0}, 1.0, 0.0};
  const PlanarTrajectory out =
      side_biased_points(points({{-4, -0.1}}), points({{2, 0}}), o, 0.5);
  EXPECT_NEAR(out(0, 1), -0.5, 1e-15);
}

TEST(ValidateClearance, TangencyAllowed) {
  const CircleObstacle o{{0, 0}, 2.0, 1.0};
  const ClearanceReport r = validate_clearance({points({{3, 0}})}, {o}, {1.0});
  EXPECT_TRUE(r.violations.empty());
  ASSERT_TRUE(r.min_obstacle_clearance);
  EXPECT_DOUBLE_EQ(*r.min_obstacle_clearance, 0.0);
}

TEST(ValidateClearance, PenetrationRecorded) {
  const CircleObstacle o{{0, 0}, 2.0, 1.0};
  const ClearanceReport r = validate_clearance({points({{2.9, 0}, {5, 0}})}, {o}, {1.0});
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::obstacle);
  EXPECT_EQ(r.violations[0].sample, 0);
  EXPECT_NEAR(*r.min_obstacle_clearance, -0.1, 1e-12);
}

TEST(ValidateClearance, SeparationChecks) {
  const std::vector<PlanarTrajectory> t = {points({{0, 0}, {0, 0}}), points({{2, 0}, {1.5, 0}})};
  const ClearanceReport r = validate_clearance(t, {}, {2.0});
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::separation);
  EXPECT_EQ(r.violations[0].sample, 1);
  EXPECT_DOUBLE_EQ(*r.min_pairwise_distance, 1.5);
  EXPECT_FALSE(r.min_obstacle_clearance);
}

TEST(ValidateClearance, EmptyInputsReportAbsence) {
  const ClearanceReport r = validate_clearance({points({{0, 0}, {1, 1}})}, {}, {2.0});
  EXPECT_TRUE(r.violations.empty());
  EXPECT_FALSE(r.min_obstacle_clearance);
  EXPECT_FALSE(r.min_pairwise_distance);
}

TEST(FeasibilityGuard, ThinObstacleWarns) {
  const GuardResult g = feasibility_guard({{0, 0}, 0.5, 0.0}, 4.0, 0.5);
  EXPECT_FALSE(g.ok);
  EXPECT_NE(g.message.find("dt"), std::string::npos);
  EXPECT_NE(g.message.find("margin"), std::string::npos);
}

TEST(FeasibilityGuard, WideObstacleOk) {
  EXPECT_TRUE(feasibility_guard({{0, 0}, 5.0, 0.0}, 4.0, 0.5).ok);
}

TEST(FeasibilityGuard, BoundaryIsOk) {
  EXPECT_TRUE(feasibility_guard({{0, 0}, 0.75, 0.25}, 4.0, 0.5).ok);
}

}  // namespace
}  // namespace formpc
