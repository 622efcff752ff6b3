#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "formpc/avoidance.h"
#include "formpc/formation.h"
#include "formpc/mpc_core.h"
#include "formpc/vehicle_models.h"

namespace formpc {

enum class ControlMode { centralized, decentralized };

std::string_view to_string(ControlMode mode);
ControlMode control_mode_from_string(std::string_view name);

enum class TerminalWeight { stage, dare };
enum class TerminalGain { zero, lqr };

/// Per-vehicle controller tuning; expanded into an MpcConfig for the 3-D
/// double integrator by `vehicle_mpc_config`.
struct MpcSettings {
  int np = 12;
  int nu = 6;
  int nc = 12;
  Eigen::Vector3d q_position = Eigen::Vector3d::Constant(1.0);
  Eigen::Vector3d q_velocity = Eigen::Vector3d::Constant(0.5);
  Eigen::Vector3d r = Eigen::Vector3d::Constant(0.2);
  TerminalWeight terminal_weight = TerminalWeight::stage;
  TerminalGain terminal_gain = TerminalGain::zero;
  double slack_penalty = 1e4;
  double solver_tol = 1e-8;
  int solver_max_iter = 4000;
  Eigen::Vector3d y_min = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector3d y_max = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
};

struct Scenario {
  std::string name;
  std::vector<VehicleState> initial_states;
  ActuatorLimits limits;
  double dt = 0.5;
  MpcSettings mpc;
  FormationMode mode = FormationMode::leader_follower;
  FormationGeometry geometry = FormationGeometry::triangle();
  ReferencePath path;
  std::vector<CircleObstacle> obstacles;
  SeparationSpec separation{2.0};
  double duration = 60.0;
  ControlMode control_mode = ControlMode::centralized;
  std::uint64_t seed = 0;
  /// Avoidance rows are only emitted for linearization points closer than
  /// this to an obstacle boundary or to the separation distance. Zero means
  /// "one horizon of travel at v_max".
  double activation_distance = 0.0;

  int vehicle_count() const { return static_cast<int>(initial_states.size()); }
  int step_count() const;
  double effective_activation_distance() const;

  /// Throws ConfigError naming the offending scenario key.
  void validate() const;
};

/// Controller configuration for one vehicle; `u` bounds are +/- a_max.
MpcConfig vehicle_mpc_config(const Scenario& scenario);

/// Strict reader: unknown sections or keys are errors.
Scenario parse_scenario(std::string_view toml_text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace formpc
