#pragma once

#include <Eigen/Dense>

namespace formpc {

/// Stabilizing solution of the discrete algebraic Riccati equation
///   P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA
/// by fixed-point iteration from P = Q. Throws ConfigError if the iteration
/// does not settle to `tol` (relative change) within `max_iter` sweeps.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol = 1e-10, int max_iter = 100000);

/// Infinite-horizon LQR gain in the u = K x convention (note the sign):
///   K = -(R + B'PB)^-1 B'PA
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

}  // namespace formpc
