#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "formpc/errors.h"
#include "formpc/vehicle_models.h"
#include "oracles.h"

namespace formpc {
namespace {

TEST(DoubleIntegrator, UnitStepBlocks) {
  const StateSpaceModel m = double_integrator_3d(1.0);
  ASSERT_EQ(m.states(), 6);
  ASSERT_EQ(m.inputs(), 3);
  ASSERT_EQ(m.outputs(), 3);
  for (int axis = 0; axis < 3; ++axis) {
    EXPECT_DOUBLE_EQ(m.A(axis, axis), 1.0);
    EXPECT_DOUBLE_EQ(m.A(axis, axis + 3), 1.0);
    EXPECT_DOUBLE_EQ(m.A(axis + 3, axis), 0.0);
    EXPECT_DOUBLE_EQ(m.A(axis + 3, axis + 3), 1.0);
    EXPECT_DOUBLE_EQ(m.B(axis, axis), 0.5);
    EXPECT_DOUBLE_EQ(m.B(axis + 3, axis), 1.0);
  }
  // Axes are decoupled.
  EXPECT_DOUBLE_EQ(m.A(0, 4), 0.0);
  EXPECT_DOUBLE_EQ(m.B(0, 1), 0.0);
}

TEST(DoubleIntegrator, RestIsFixedPoint) {
  const StateSpaceModel m = double_integrator_3d(0.37);
  Eigen::VectorXd x(6);
  x << 1, -2, 3, 0, 0, 0;
  EXPECT_TRUE(step(m, x, Eigen::Vector3d::Zero()).isApprox(x));
}

TEST(DoubleIntegrator, HandIntegration) {
  const StateSpaceModel m = double_integrator_3d(1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  const Eigen::Vector3d u(1.0, 0.0, 0.0);
  x = step(m, x, u);
  EXPECT_DOUBLE_EQ(x(0), 0.5);
  x = step(m, x, u);
  EXPECT_DOUBLE_EQ(x(0), 2.0);
  EXPECT_DOUBLE_EQ(x(3), 2.0);
}

TEST(DoubleIntegrator, ZeroOrderHoldMatchesFineIntegration) {
  const double dt = 0.4;
  const StateSpaceModel m = double_integrator_3d(dt);
  std::mt19937_64 rng(7);
  Eigen::VectorXd x = testing::random_vector(rng, 6, 3.0);
  Eigen::VectorXd fine = x;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector3d u = testing::random_vector(rng, 3, 2.0);
    x = step(m, x, u);
    // Exact constant-acceleration substeps.
    const int sub = 64;
    const double h = dt / sub;
    for (int s = 0; s < sub; ++s) {
      fine.head<3>() += h * fine.tail<3>() + 0.5 * h * h * u;
      fine.tail<3>() += h * u;
    }
  }
  EXPECT_LT((x - fine).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + fine.norm()));
}

TEST(StateSpace, StepIsAffineMap) {
  std::mt19937_64 rng(3);
  StateSpaceModel m{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 2),
                    Eigen::MatrixXd::Identity(3, 3), 0.1};
  const Eigen::VectorXd x = testing::random_vector(rng, 3);
  EXPECT_EQ(step(m, x, Eigen::Vector2d(1, 2)), x);

  m.A = testing::random_matrix(rng, 3, 3);
  m.B = testing::random_matrix(rng, 3, 2);
  m.C = testing::random_matrix(rng, 2, 3);
  const Eigen::VectorXd u = testing::random_vector(rng, 2);
  Eigen::VectorXd expected(3);
  for (int i = 0; i < 3; ++i) {
    expected(i) = 0.0;
    for (int j = 0; j < 3; ++j) expected(i) += m.A(i, j) * x(j);
    for (int j = 0; j < 2; ++j) expected(i) += m.B(i, j) * u(j);
  }
  EXPECT_TRUE(step(m, x, u).isApprox(expected, 1e-14));
  Eigen::VectorXd y(2);
  for (int i = 0; i < 2; ++i) y(i) = m.C(i, 0) * x(0) + m.C(i, 1) * x(1) + m.C(i, 2) * x(2);
  EXPECT_TRUE(output(m, x).isApprox(y, 1e-14));
}

TEST(StateSpace, OutputSelectsPosition) {
  const StateSpaceModel m = double_integrator_3d(0.5);
  Eigen::VectorXd x(6);
  x << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(output(m, x), Eigen::Vector3d(1, 2, 3));
}

TEST(StateSpace, ValidateRejectsBadModels) {
  StateSpaceModel m = double_integrator_3d(0.5);
  EXPECT_NO_THROW(m.validate());
  m.dt = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = double_integrator_3d(0.5);
  m.B = Eigen::MatrixXd::Zero(5, 3);
  EXPECT_THROW(m.validate(), ConfigError);
  m = double_integrator_3d(0.5);
  m.A(0, 0) = std::nan("");
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_THROW(double_integrator_3d(-1.0), ConfigError);
}

TEST(Heading, FromVelocityAndHold) {
  EXPECT_NEAR(heading_from_velocity({0, 1, 0}, 0.0), std::numbers::pi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(heading_from_velocity({0, 0, 3}, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(heading_from_velocity({1e-8, 0, 0}, -1.0), -1.0);
  EXPECT_NEAR(heading_from_velocity({-1, 0, 0}, 0.0), std::numbers::pi, 1e-15);
}

TEST(Heading, WrapIntoHalfOpenInterval) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(wrap_angle(3 * pi), pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-pi), pi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.5 * pi - 4 * pi), -0.5 * pi, 1e-12);
}

TEST(VehicleState, PackRoundTrip) {
  VehicleState s{{1, 2, 3}, {0, -2, 0}, 0.0};
  const Eigen::VectorXd x = to_state_vector(s);
  ASSERT_EQ(x.size(), 6);
  const VehicleState back = to_vehicle_state(x, 0.0);
  EXPECT_EQ(back.position, s.position);
  EXPECT_EQ(back.velocity, s.velocity);
  EXPECT_NEAR(back.heading, -std::numbers::pi / 2, 1e-15);
}

TEST(ActuatorLimits, MustBePositive) {
  EXPECT_NO_THROW((ActuatorLimits{1.0, 2.0}.validate()));
  EXPECT_THROW((ActuatorLimits{0.0, 2.0}.validate()), ConfigError);
  EXPECT_THROW((ActuatorLimits{1.0, -2.0}.validate()), ConfigError);
}

TEST(Replicate, BlockDiagonal) {
  const StateSpaceModel m = double_integrator_3d(0.5);
  const StateSpaceModel r = replicate(m, 3);
  ASSERT_EQ(r.states(), 18);
  ASSERT_EQ(r.inputs(), 9);
  EXPECT_EQ(r.A.block(6, 6, 6, 6), m.A);
  EXPECT_TRUE(r.A.block(0, 6, 6, 6).isZero());
  EXPECT_EQ(r.B.block(12, 6, 6, 3), m.B);
  EXPECT_EQ(r.C.block(3, 6, 3, 6), m.C);
  EXPECT_DOUBLE_EQ(r.dt, m.dt);
}

}  // namespace
}  // namespace formpc
