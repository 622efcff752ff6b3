#pragma once

#include <Eigen/Dense>

namespace formpc {

/// Discrete LTI model x(t+1) = A x(t) + B u(t), y(t) = C x(t).
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  double dt = 0.0;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }

  /// Throws ConfigError on inconsistent dimensions, non-finite entries or
  /// dt <= 0.
  void validate() const;
};

/// Translational state of one vehicle. Heading is yaw in (-pi, pi].
struct VehicleState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double heading = 0.0;
};

/// Speeds below this are treated as "not moving" for heading purposes.
inline constexpr double kHeadingSpeedEpsilon = 1e-6;

/// atan2(v_y, v_x) when the horizontal speed exceeds kHeadingSpeedEpsilon,
/// otherwise `previous`.
double heading_from_velocity(const Eigen::Vector3d& velocity, double previous);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct ActuatorLimits {
  double a_max = 1.0;  // m/s^2, per axis
  double v_max = 1.0;  // m/s, per axis

  void validate() const;
};

/// 6-state point mass: x = (px, py, pz, vx, vy, vz), u = acceleration.
/// Exact zero-order-hold discretization; C selects position.
StateSpaceModel double_integrator_3d(double dt);

Eigen::VectorXd step(const StateSpaceModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u);

Eigen::VectorXd output(const StateSpaceModel& model, const Eigen::VectorXd& x);

/// Packs / unpacks the double-integrator state vector.
Eigen::VectorXd to_state_vector(const VehicleState& s);
VehicleState to_vehicle_state(const Eigen::VectorXd& x, double previous_heading);

/// Block-diagonal composition of `count` copies of `model`.
StateSpaceModel replicate(const StateSpaceModel& model, int count);

}  // namespace formpc
