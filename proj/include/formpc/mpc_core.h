#pragma once

#include <vector>

#include <Eigen/Dense>

#include "formpc/qp_solver.h"
#include "formpc/vehicle_models.h"

namespace formpc {

/// Horizons, weights, bounds and solver settings of the finite-horizon
/// tracking problem
///
///   J = e_np' P e_np + sum_{k=0}^{np-1} e_k' Q e_k + sum_{k=0}^{nu-1} u_k' R u_k
///
/// with e_k = x_k - r_k. Inputs u_nu..u_{np-1} follow the terminal law
/// u_k = K x_k and are not decision variables. Infinite bounds mean
/// "unconstrained" and emit no rows.
struct MpcConfig {
  int np = 1;
  int nu = 1;
  int nc = 1;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  Eigen::VectorXd u_min;
  Eigen::VectorXd u_max;
  Eigen::VectorXd y_min;
  Eigen::VectorXd y_max;
  double solver_tol = 1e-8;
  int solver_max_iter = 4000;
  double slack_penalty = 1e4;

  /// Throws ConfigError naming the offending field.
  void validate(const StateSpaceModel& model) const;
};

/// Config with P = Q, K = 0 and all bounds infinite.
MpcConfig make_config(const StateSpaceModel& model, int np, int nu, int nc,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Stacked predictions X = F x0 + G U over steps k = 1..np (row block k-1),
/// with the terminal law already folded in.
struct PredictionMatrices {
  Eigen::MatrixXd F;  // (np*n) x n
  Eigen::MatrixXd G;  // (np*n) x (nu*m)
  Eigen::MatrixXd C;  // output map, carried for output-constraint rows
  int np = 0;
  int nu = 0;
  int n = 0;
  int m = 0;

  auto F_block(int step) const { return F.middleRows((step - 1) * n, n); }
  auto G_block(int step) const { return G.middleRows((step - 1) * n, n); }
};

PredictionMatrices build_prediction(const StateSpaceModel& model,
                                    const MpcConfig& config);

/// Predicted states as an np x n matrix (row k-1 is x_{t+k}).
Eigen::MatrixXd predicted_states(const PredictionMatrices& pred,
                                 const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& U);

/// coeffs . x_{t+step} <= bound, for 1 <= step <= np. Soft rows get their
/// own nonnegative slack.
struct LinearInequality {
  int step = 1;
  Eigen::VectorXd coeffs;
  double bound = 0.0;
  bool soft = true;
};

/// Row counts by origin, for inspection and tests.
struct QpLayout {
  int inputs = 0;
  int slacks = 0;
  int input_box_rows = 0;
  int terminal_input_rows = 0;
  int output_box_rows = 0;
  int extra_rows = 0;
  int slack_rows = 0;
};

/// Condensed tracking QP over [U; s]. `x_ref` stacks the references for
/// k = 1..np. The slack block carries `slack_penalty` both on the Hessian
/// diagonal and linearly, so a soft row is only violated when no feasible
/// alternative exists.
QpProblem build_qp(const PredictionMatrices& pred, const MpcConfig& config,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& x_ref,
                   const std::vector<LinearInequality>& extra_constraints,
                   QpLayout* layout = nullptr);

/// Forward-simulated objective (the oracle for the condensed QP). The stage
/// term at k = 0 is measured against the first reference block.
double evaluate_cost(const StateSpaceModel& model, const MpcConfig& config,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& x_ref,
                     const Eigen::VectorXd& U);

/// Repeats `x` over np steps.
Eigen::VectorXd constant_reference(const Eigen::VectorXd& x, int np);

struct ControllerState {
  Eigen::VectorXd last_solution;           // U* of the previous solve
  Eigen::MatrixXd last_predicted_states;   // np x n, under last_solution
  int step_index = 0;

  bool has_solution() const { return last_solution.size() > 0; }
};

/// Previous U* shifted one step, the vacated last block filled with the
/// terminal law applied to the predicted state at step nu. Zeros before the
/// first solve.
Eigen::VectorXd shifted_warm_start(const ControllerState& state,
                                   const MpcConfig& config, int m);

struct StepResult {
  Eigen::VectorXd input;       // first block of U*, clamped to [u_min, u_max]
  Eigen::VectorXd solution;    // U*
  Eigen::VectorXd slacks;
  Eigen::MatrixXd predicted;   // np x n under U*
  QpDiagnostics diagnostics;
  ControllerState state;
};

StepResult mpc_step(const ControllerState& state, const StateSpaceModel& model,
                    const MpcConfig& config, const Eigen::VectorXd& x_t,
                    const Eigen::VectorXd& x_ref,
                    const std::vector<LinearInequality>& extra_constraints);

/// Same as above with prediction matrices computed once by the caller.
StepResult mpc_step(const ControllerState& state, const StateSpaceModel& model,
                    const MpcConfig& config, const PredictionMatrices& pred,
                    const Eigen::VectorXd& x_t, const Eigen::VectorXd& x_ref,
                    const std::vector<LinearInequality>& extra_constraints);

/// Receding-horizon controller: owns one ControllerState; model, config and
/// prediction matrices are fixed at construction.
class Controller {
 public:
  Controller(StateSpaceModel model, MpcConfig config);

  StepResult step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& x_ref,
                  const std::vector<LinearInequality>& extra_constraints = {});

  /// Predicted states (np x n) from x_t under the shifted warm start; these
  /// are the linearization points for nonconvex constraints.
  Eigen::MatrixXd preview(const Eigen::VectorXd& x_t) const;

  const StateSpaceModel& model() const { return model_; }
  const MpcConfig& config() const { return config_; }
  const PredictionMatrices& prediction() const { return pred_; }
  const ControllerState& state() const { return state_; }

 private:
  StateSpaceModel model_;
  MpcConfig config_;
  PredictionMatrices pred_;
  ControllerState state_;
};

}  // namespace formpc
