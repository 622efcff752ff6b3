#pragma once

#include <optional>

#include <Eigen/Dense>

namespace formpc {

/// Dense convex QP over x (dimension d):
///
///   minimize   0.5 x'Hx + f'x
///   subject to A_ineq x <= b_ineq
///
/// When built by the MPC layer the trailing `num_slacks` entries of x are
/// slack variables, the leading block is the stacked input sequence.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;
  int num_slacks = 0;

  int dimension() const { return static_cast<int>(f.size()); }
  int rows() const { return static_cast<int>(b_ineq.size()); }
  double objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(H * x) + f.dot(x);
  }
};

struct QpDiagnostics {
  int iterations = 0;
  /// Largest of the primal infeasibility and the (relative) stationarity
  /// residual at the returned point.
  double residual = 0.0;
  bool converged = false;
  bool polished = false;
};

struct QpSolution {
  Eigen::VectorXd x;
  /// Inequality multipliers, nonnegative.
  Eigen::VectorXd multipliers;
  QpDiagnostics diagnostics;
};

struct QpResiduals {
  double primal = 0.0;      // max(A x - b, 0), infinity norm
  double stationarity = 0.0;  // ||Hx + f + A'y||_inf / max(1, term scale)
};

QpResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y);

/// Operator-splitting (ADMM) solver with Ruiz equilibration, adaptive step
/// size and active-set polishing. Deterministic for identical inputs.
///
/// Throws SolverError when H is not positive definite or dimensions are
/// inconsistent. When `max_iter` is exhausted the best iterate seen is
/// returned with `converged == false`.
QpSolution solve_qp(const QpProblem& qp,
                    const std::optional<Eigen::VectorXd>& warm_start,
                    double tol = 1e-8, int max_iter = 4000);

}  // namespace formpc
