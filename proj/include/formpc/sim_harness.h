#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "formpc/avoidance.h"
#include "formpc/qp_solver.h"
#include "formpc/scenario.h"

namespace formpc {

struct VehicleRecord {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d input = Eigen::Vector3d::Zero();      // applied acceleration
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();  // tracked position at this time
  double formation_error = 0.0;
  double stage_cost = 0.0;
  QpDiagnostics diagnostics;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  std::vector<VehicleRecord> vehicles;
  double formation_rms = 0.0;
  std::optional<double> min_pairwise_distance;
  std::optional<double> min_obstacle_clearance;
};

/// One StepRecord per sample k = 0..ceil(duration/dt). Carries the
/// obstacle and separation data needed to re-check clearances offline.
struct TrajectoryLog {
  int vehicle_count = 0;
  std::vector<CircleObstacle> obstacles;
  SeparationSpec separation;
  std::vector<StepRecord> steps;
};

struct Metrics {
  double formation_error_rms = 0.0;
  /// RMS over samples with time >= 75% of the final time.
  double formation_error_rms_final_quarter = 0.0;
  double max_formation_error = 0.0;
  std::optional<double> min_separation;
  std::optional<double> min_obstacle_clearance;
  int violation_count = 0;
  double mean_solver_iterations = 0.0;
  int nonconverged_solves = 0;
  double total_cost = 0.0;
  int samples = 0;
};

struct RunResult {
  TrajectoryLog log;
  Metrics metrics;
  std::vector<std::string> diagnostics;
};

/// Ideal autopilot: the commanded acceleration, saturated per axis at a_max.
Eigen::Vector3d inner_loop(const Eigen::Vector3d& command, const ActuatorLimits& limits);

/// Closed-loop simulation. Each sample: formation references, avoidance
/// rows linearized about the shifted previous plans, one stacked QP
/// (centralized) or one QP per vehicle against the neighbours' previous plans
/// (decentralized), inner-loop saturation, plant propagation, logging.
/// Throws ConfigError for an invalid scenario before stepping.
RunResult run_scenario(const Scenario& scenario);

/// Aggregates a log; violations come from validate_clearance on the realized
/// horizontal trajectories against the log's obstacles and separation.
Metrics compute_metrics(const TrajectoryLog& log);
Metrics compute_metrics(const TrajectoryLog& log, const Scenario& scenario);

/// Realized horizontal trajectories, one per vehicle.
std::vector<PlanarTrajectory> planar_trajectories(const TrajectoryLog& log);

}  // namespace formpc
