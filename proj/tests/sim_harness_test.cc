#include <sstream>

#include <gtest/gtest.h>

#include "formpc/errors.h"
#include "formpc/scenario.h"
#include "formpc/sim_harness.h"
#include "formpc/trajectory_io.h"

namespace formpc {
namespace {

Scenario equilibrium() {
  return parse_scenario(R"(
[vehicles]
initial_positions = [[10, 20, 5], [5, 25, 5], [5, 15, 5]]
[formation]
mode = "virtual_structure"
[path]
waypoints = [{ t = 0, position = [10, 20, 5] }]
[sim]
duration = 10
)");
}

Scenario straight_line(ControlMode mode) {
  Scenario sc = parse_scenario(R"(
[vehicles]
initial_positions = [[0, 0, 0], [-7, 4, 0], [-4, -6, 0]]
initial_velocities = [[5, 0, 0], [4, 0, 0], [5, 1, 0]]
[path]
waypoints = [{ t = 0, position = [0, 0, 0] }, { position = [400, 0, 0], speed = 5 }]
[sim]
duration = 30
)");
  sc.control_mode = mode;
  return sc;
}

TEST(InnerLoop, SaturatesPerAxis) {
  const ActuatorLimits lim{2.0, 5.0};
  EXPECT_EQ(inner_loop({1, -1.5, 0}, lim), Eigen::Vector3d(1, -1.5, 0));
  EXPECT_EQ(inner_loop({4, 0, 0}, lim), Eigen::Vector3d(2, 0, 0));
  // Per axis, not by norm: (3, 3) becomes (2, 2), not a scaled vector.
  EXPECT_EQ(inner_loop({3, 3, -9}, lim), Eigen::Vector3d(2, 2, -2));
}

TEST(RunScenario, EquilibriumStaysPut) {
  const RunResult r = run_scenario(equilibrium());
  ASSERT_EQ(r.log.steps.size(), 21u);
  for (const auto& rec : r.log.steps) {
    EXPECT_LT(rec.formation_rms, 1e-6);
    for (const auto& v : rec.vehicles) EXPECT_LT(v.input.norm(), 1e-6);
  }
  EXPECT_EQ(r.metrics.violation_count, 0);
  EXPECT_LT(r.metrics.formation_error_rms, 1e-6);
}

TEST(RunScenario, LogShapeAndMonotoneTime) {
  Scenario sc = straight_line(ControlMode::centralized);
  sc.duration = 5.2;  // not a multiple of dt: ceil(5.2 / 0.5) = 11 steps
  const RunResult r = run_scenario(sc);
  ASSERT_EQ(r.log.steps.size(), 12u);
  for (std::size_t s = 1; s < r.log.steps.size(); ++s) {
    EXPECT_GT(r.log.steps[s].time, r.log.steps[s - 1].time);
    EXPECT_EQ(r.log.steps[s].vehicles.size(), 3u);
  }
}

TEST(RunScenario, LoggedInputsAreSaturatedAndPropagated) {
  Scenario sc = straight_line(ControlMode::centralized);
  sc.duration = 10;
  const RunResult r = run_scenario(sc);
  const StateSpaceModel m = double_integrator_3d(sc.dt);
  for (std::size_t s = 0; s + 1 < r.log.steps.size(); ++s) {
    for (int i = 0; i < 3; ++i) {
      const VehicleRecord& v = r.log.steps[s].vehicles[i];
      EXPECT_LE(v.input.cwiseAbs().maxCoeff(), sc.limits.a_max);
      Eigen::VectorXd x(6);
      x << v.position, v.velocity;
      const Eigen::VectorXd next = step(m, x, v.input);
      const VehicleRecord& w = r.log.steps[s + 1].vehicles[i];
      EXPECT_LT((next.head(3) - w.position).norm(), 1e-9);
    }
  }
}

TEST(RunScenario, ConvergesInBothModes) {
  for (ControlMode mode : {ControlMode::centralized, ControlMode::decentralized}) {
    const RunResult r = run_scenario(straight_line(mode));
    EXPECT_LT(r.metrics.formation_error_rms_final_quarter, 0.1) << to_string(mode);
    EXPECT_EQ(r.metrics.violation_count, 0);
    ASSERT_TRUE(r.metrics.min_separation);
    EXPECT_GE(*r.metrics.min_separation, 2.0);
    EXPECT_EQ(r.metrics.nonconverged_solves, 0);
  }
}

TEST(RunScenario, DeterministicLogs) {
  const Scenario sc = straight_line(ControlMode::decentralized);
  std::ostringstream a, b;
  write_trajectory_csv(run_scenario(sc).log, a);
  write_trajectory_csv(run_scenario(sc).log, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunScenario, InvalidScenarioThrowsBeforeStepping) {
  Scenario sc = equilibrium();
  sc.mpc.nu = sc.mpc.np + 1;
  EXPECT_THROW(run_scenario(sc), ConfigError);
  sc = equilibrium();
  sc.duration = 0.0;
  EXPECT_THROW(run_scenario(sc), ConfigError);
}

TEST(RunScenario, ObstacleIsAvoided) {
  Scenario sc = straight_line(ControlMode::centralized);
  sc.obstacles.push_back(CircleObstacle{{60, 0}, 3.0, 1.0});
  const RunResult r = run_scenario(sc);
  ASSERT_TRUE(r.metrics.min_obstacle_clearance);
  EXPECT_GE(*r.metrics.min_obstacle_clearance, 0.0);
  EXPECT_EQ(r.metrics.violation_count, 0);
}

TEST(ComputeMetrics, SyntheticNearMiss) {
  TrajectoryLog log;
  log.vehicle_count = 2;
  log.separation = {2.0};
  for (int s = 0; s < 4; ++s) {
    StepRecord rec;
    rec.step = s;
    rec.time = 0.5 * s;
    VehicleRecord a, b;
    a.position = {s * 1.0, 0, 0};
    b.position = {s * 1.0, s == 2 ? 1.9 : 3.0, 0};
    rec.vehicles = {a, b};
    log.steps.push_back(rec);
  }
  const Metrics m = compute_metrics(log);
  EXPECT_EQ(m.violation_count, 1);
  EXPECT_NEAR(*m.min_separation, 1.9, 1e-15);
  EXPECT_FALSE(m.min_obstacle_clearance);

  // Re-checking against a scenario's own obstacles.
  Scenario sc = equilibrium();
  sc.obstacles = {CircleObstacle{{1, 0}, 0.5, 0.0}};
  sc.separation = {1.0};
  const Metrics with = compute_metrics(log, sc);
  EXPECT_EQ(with.violation_count, 1);  // vehicle 0 passes through the disk center
}

TEST(ComputeMetrics, FinalQuarterWindow) {
  TrajectoryLog log;
  log.vehicle_count = 1;
  for (int s = 0; s <= 8; ++s) {
    StepRecord rec;
    rec.step = s;
    rec.time = s;
    rec.formation_rms = s >= 6 ? 2.0 : 10.0;
    rec.vehicles = {VehicleRecord{}};
    log.steps.push_back(rec);
  }
  EXPECT_DOUBLE_EQ(compute_metrics(log).formation_error_rms_final_quarter, 2.0);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  Scenario sc = straight_line(ControlMode::centralized);
  sc.duration = 4;
  sc.obstacles.push_back(CircleObstacle{{300, 40}, 3.0, 0.5});
  const RunResult r = run_scenario(sc);
  std::stringstream ss;
  write_trajectory_csv(r.log, ss);
  const std::string first = ss.str();
  const TrajectoryLog back = read_trajectory_csv(ss);
  ASSERT_EQ(back.vehicle_count, 3);
  ASSERT_EQ(back.steps.size(), r.log.steps.size());
  EXPECT_EQ(back.obstacles.size(), 1u);
  EXPECT_EQ(back.steps[3].vehicles[2].position, r.log.steps[3].vehicles[2].position);
  std::ostringstream again;
  write_trajectory_csv(back, again);
  EXPECT_EQ(again.str(), first);
  EXPECT_EQ(metrics_json(compute_metrics(back)), metrics_json(r.metrics));
}

TEST(TrajectoryCsv, HeaderAndErrors) {
  std::istringstream empty("");
  EXPECT_THROW(read_trajectory_csv(empty), ConfigError);
  std::istringstream header_only(std::string(kTrajectoryCsvHeader) + "\n");
  EXPECT_THROW(read_trajectory_csv(header_only), ConfigError);
  std::istringstream wrong("step,time\n0,0\n");
  EXPECT_THROW(read_trajectory_csv(wrong), ConfigError);
}

TEST(MetricsJson, StableSchema) {
  Metrics m;
  m.samples = 3;
  m.min_separation = 2.5;
  const std::string j = metrics_json(m);
  EXPECT_EQ(j.find("\"samples\""), 4u);
  EXPECT_NE(j.find("\"min_obstacle_clearance\": null"), std::string::npos);
  EXPECT_NE(j.find("\"min_separation\": 2.5"), std::string::npos);
  EXPECT_LT(j.find("violation_count"), j.find("total_cost"));
}

}  // namespace
}  // namespace formpc
