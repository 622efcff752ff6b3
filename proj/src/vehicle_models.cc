#include "formpc/vehicle_models.h"

#include <cmath>
#include <numbers>

#include "formpc/errors.h"

namespace formpc {

void StateSpaceModel::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("dt", "sample time must be positive and finite");
  }
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw ConfigError("A", "state matrix must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw ConfigError("B", "input matrix must have as many rows as A");
  }
  if (C.cols() != A.rows() || C.rows() == 0) {
    throw ConfigError("C", "output matrix must have as many columns as A");
  }
  if (!A.allFinite()) throw ConfigError("A", "non-finite entry");
  if (!B.allFinite()) throw ConfigError("B", "non-finite entry");
  if (!C.allFinite()) throw ConfigError("C", "non-finite entry");
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * pi);
  if (wrapped <= -pi) wrapped += 2.0 * pi;
  return wrapped;
}

double heading_from_velocity(const Eigen::Vector3d& velocity, double previous) {
  if (velocity.head<2>().norm() > kHeadingSpeedEpsilon) {
    return wrap_angle(std::atan2(velocity.y(), velocity.x()));
  }
  return previous;
}

void ActuatorLimits::validate() const {
  if (!(a_max > 0.0) || !std::isfinite(a_max)) {
    throw ConfigError("a_max", "must be strictly positive");
  }
  if (!(v_max > 0.0) || !std::isfinite(v_max)) {
    throw ConfigError("v_max", "must be strictly positive");
  }
}

StateSpaceModel double_integrator_3d(double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt", "sample time must be positive");
  StateSpaceModel model;
  model.dt = dt;
  model.A = Eigen::MatrixXd::Identity(6, 6);
  model.A.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
  model.B = Eigen::MatrixXd::Zero(6, 3);
  model.B.topRows<3>() = 0.5 * dt * dt * Eigen::Matrix3d::Identity();
  model.B.bottomRows<3>() = dt * Eigen::Matrix3d::Identity();
  model.C = Eigen::MatrixXd::Zero(3, 6);
  model.C.leftCols<3>() = Eigen::Matrix3d::Identity();
  return model;
}

Eigen::VectorXd step(const StateSpaceModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
  return model.A * x + model.B * u;
}

Eigen::VectorXd output(const StateSpaceModel& model, const Eigen::VectorXd& x) {
  return model.C * x;
}

Eigen::VectorXd to_state_vector(const VehicleState& s) {
  Eigen::VectorXd x(6);
  x << s.position, s.velocity;
  return x;
}

VehicleState to_vehicle_state(const Eigen::VectorXd& x,
                              double previous_heading) {
  VehicleState s;
  s.position = x.head<3>();
  s.velocity = x.segment<3>(3);
  s.heading = heading_from_velocity(s.velocity, previous_heading);
  return s;
}

StateSpaceModel replicate(const StateSpaceModel& model, int count) {
  const int n = model.states();
  const int m = model.inputs();
  const int p = model.outputs();
  StateSpaceModel out;
  out.dt = model.dt;
  out.A = Eigen::MatrixXd::Zero(n * count, n * count);
  out.B = Eigen::MatrixXd::Zero(n * count, m * count);
  out.C = Eigen::MatrixXd::Zero(p * count, n * count);
  for (int i = 0; i < count; ++i) {
    out.A.block(i * n, i * n, n, n) = model.A;
    out.B.block(i * n, i * m, n, m) = model.B;
    out.C.block(i * p, i * n, p, n) = model.C;
  }
  return out;
}

}  // namespace formpc
