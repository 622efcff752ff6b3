#include "formpc/mpc_core.h"

#include <cmath>
#include <limits>
#include <string>

#include "formpc/errors.h"

namespace formpc {
namespace {

void require_square(const Eigen::MatrixXd& M, int size, const char* key) {
  if (M.rows() != size || M.cols() != size) {
    throw ConfigError(key, "expected " + std::to_string(size) + "x" +
                               std::to_string(size) + ", got " +
                               std::to_string(M.rows()) + "x" +
                               std::to_string(M.cols()));
  }
  if (!M.allFinite()) throw ConfigError(key, "non-finite entry");
  if ((M - M.transpose()).lpNorm<Eigen::Infinity>() >
      1e-10 * std::max(1.0, M.lpNorm<Eigen::Infinity>())) {
    throw ConfigError(key, "must be symmetric");
  }
}

void require_psd(const Eigen::MatrixXd& M, const char* key) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const double tol = 1e-12 * std::max(1.0, M.lpNorm<Eigen::Infinity>());
  if (eig.eigenvalues().minCoeff() < -tol) {
    throw ConfigError(key, "must be positive semidefinite");
  }
}

void require_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    int size, const char* lo_key, const char* hi_key) {
  if (lo.size() != size) {
    throw ConfigError(lo_key, "expected length " + std::to_string(size));
  }
  if (hi.size() != size) {
    throw ConfigError(hi_key, "expected length " + std::to_string(size));
  }
  for (int i = 0; i < size; ++i) {
    if (std::isnan(lo(i))) throw ConfigError(lo_key, "NaN entry");
    if (std::isnan(hi(i))) throw ConfigError(hi_key, "NaN entry");
    if (!(lo(i) < hi(i))) {
      throw ConfigError(lo_key, std::string("must be elementwise below ") + hi_key);
    }
  }
}

Eigen::MatrixXd stage_weights(const MpcConfig& config, int n) {
  // Block-diagonal weight over predicted states k = 1..np; the last block is
  // the terminal weight.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(config.np * n, config.np * n);
  for (int k = 0; k < config.np - 1; ++k) {
    W.block(k * n, k * n, n, n) = config.Q;
  }
  W.block((config.np - 1) * n, (config.np - 1) * n, n, n) = config.P;
  return W;
}

}  // namespace

void MpcConfig::validate(const StateSpaceModel& model) const {
  const int n = model.states();
  const int m = model.inputs();
  const int p = model.outputs();
  if (np < 1) throw ConfigError("np", "prediction horizon must be >= 1");
  if (nu < 1 || nu > np) throw ConfigError("nu", "control horizon must satisfy 1 <= nu <= np");
  if (nc < 1 || nc > np) throw ConfigError("nc", "constraint horizon must satisfy 1 <= nc <= np");
  require_square(Q, n, "Q");
  require_square(R, m, "R");
  require_square(P, n, "P");
  require_psd(Q, "Q");
  require_psd(P, "P");
  if (Eigen::LLT<Eigen::MatrixXd>(R).info() != Eigen::Success) {
    throw ConfigError("R", "must be positive definite");
  }
  if (K.rows() != m || K.cols() != n) {
    throw ConfigError("K", "terminal gain must be " + std::to_string(m) + "x" +
                               std::to_string(n));
  }
  if (!K.allFinite()) throw ConfigError("K", "non-finite entry");
  require_bounds(u_min, u_max, m, "u_min", "u_max");
  require_bounds(y_min, y_max, p, "y_min", "y_max");
  if (!(solver_tol > 0.0)) throw ConfigError("solver_tol", "must be positive");
  if (solver_max_iter < 1) throw ConfigError("solver_max_iter", "must be >= 1");
  if (!(slack_penalty > 0.0) || !std::isfinite(slack_penalty)) {
    throw ConfigError("slack_penalty", "must be positive and finite");
  }
}

MpcConfig make_config(const StateSpaceModel& model, int np, int nu, int nc,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  MpcConfig c;
  c.np = np;
  c.nu = nu;
  c.nc = nc;
  c.Q = Q;
  c.R = R;
  c.P = Q;
  c.K = Eigen::MatrixXd::Zero(model.inputs(), model.states());
  c.u_min = Eigen::VectorXd::Constant(model.inputs(), -inf);
  c.u_max = Eigen::VectorXd::Constant(model.inputs(), inf);
  c.y_min = Eigen::VectorXd::Constant(model.outputs(), -inf);
  c.y_max = Eigen::VectorXd::Constant(model.outputs(), inf);
  return c;
}

PredictionMatrices build_prediction(const StateSpaceModel& model,
                                    const MpcConfig& config) {
  model.validate();
  config.validate(model);
  const int n = model.states();
  const int m = model.inputs();
  PredictionMatrices pred;
  pred.np = config.np;
  pred.nu = config.nu;
  pred.n = n;
  pred.m = m;
  pred.C = model.C;
  pred.F.resize(config.np * n, n);
  pred.G = Eigen::MatrixXd::Zero(config.np * n, config.nu * m);

  const Eigen::MatrixXd closed = model.A + model.B * config.K;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, config.nu * m);
  for (int k = 0; k < config.np; ++k) {
    if (k < config.nu) {
      phi = model.A * phi;
      gamma = model.A * gamma;
      gamma.middleCols(k * m, m) += model.B;
    } else {
      phi = closed * phi;
      gamma = closed * gamma;
    }
    pred.F.middleRows(k * n, n) = phi;
    pred.G.middleRows(k * n, n) = gamma;
  }
  return pred;
}

Eigen::MatrixXd predicted_states(const PredictionMatrices& pred,
                                 const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& U) {
  const Eigen::VectorXd stacked = pred.F * x0 + pred.G * U;
  Eigen::MatrixXd out(pred.np, pred.n);
  for (int k = 0; k < pred.np; ++k) {
    out.row(k) = stacked.segment(k * pred.n, pred.n).transpose();
  }
  return out;
}

QpProblem build_qp(const PredictionMatrices& pred, const MpcConfig& config,
                   const Eigen::VectorXd& x0, const Eigen::VectorXd& x_ref,
                   const std::vector<LinearInequality>& extra_constraints,
                   QpLayout* layout) {
  const int n = pred.n;
  const int m = pred.m;
  const int nu_dim = pred.nu * m;
  if (x0.size() != n) throw ConfigError("x0", "state dimension mismatch");
  if (x_ref.size() != pred.np * n) {
    throw ConfigError("x_ref", "reference must stack np state vectors");
  }
  int soft_count = 0;
  for (const auto& c : extra_constraints) {
    if (c.step < 1 || c.step > pred.np) {
      throw ConfigError("extra_constraints", "step outside 1..np");
    }
    if (c.coeffs.size() != n) {
      throw ConfigError("extra_constraints", "coefficient vector must have n entries");
    }
    if (c.soft) ++soft_count;
  }
  const int d = nu_dim + soft_count;

  QpProblem qp;
  qp.num_slacks = soft_count;
  qp.H = Eigen::MatrixXd::Zero(d, d);
  qp.f = Eigen::VectorXd::Zero(d);

  const Eigen::MatrixXd W = stage_weights(config, n);
  const Eigen::MatrixXd WG = W * pred.G;
  Eigen::MatrixXd Rbar = Eigen::MatrixXd::Zero(nu_dim, nu_dim);
  for (int k = 0; k < pred.nu; ++k) Rbar.block(k * m, k * m, m, m) = config.R;
  Eigen::MatrixXd Huu = 2.0 * (pred.G.transpose() * WG + Rbar);
  qp.H.topLeftCorner(nu_dim, nu_dim) = 0.5 * (Huu + Huu.transpose());
  qp.f.head(nu_dim) = 2.0 * WG.transpose() * (pred.F * x0 - x_ref);
  for (int s = 0; s < soft_count; ++s) {
    qp.H(nu_dim + s, nu_dim + s) = config.slack_penalty;
    qp.f(nu_dim + s) = config.slack_penalty;
  }

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> bounds;
  auto add_row = [&](Eigen::RowVectorXd row, double b) {
    rows.push_back(std::move(row));
    bounds.push_back(b);
  };
  QpLayout lay;
  lay.inputs = nu_dim;
  lay.slacks = soft_count;

  // Input boxes on the free inputs inside the constraint horizon.
  const int boxed_inputs = std::min(config.nc, pred.nu);
  for (int k = 0; k < boxed_inputs; ++k) {
    for (int j = 0; j < m; ++j) {
      const int col = k * m + j;
      if (std::isfinite(config.u_max(j))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
        row(col) = 1.0;
        add_row(std::move(row), config.u_max(j));
        ++lay.input_box_rows;
      }
      if (std::isfinite(config.u_min(j))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
        row(col) = -1.0;
        add_row(std::move(row), -config.u_min(j));
        ++lay.input_box_rows;
      }
    }
  }

  // Terminal-law inputs u_k = K x_k for nu <= k < nc are affine in U.
  if (!config.K.isZero(0.0)) {
    for (int k = pred.nu; k < config.nc; ++k) {
      const Eigen::MatrixXd KG = config.K * pred.G_block(k);
      const Eigen::VectorXd Kf = config.K * pred.F_block(k) * x0;
      for (int j = 0; j < m; ++j) {
        if (std::isfinite(config.u_max(j))) {
          Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
          row.head(nu_dim) = KG.row(j);
          add_row(std::move(row), config.u_max(j) - Kf(j));
          ++lay.terminal_input_rows;
        }
        if (std::isfinite(config.u_min(j))) {
          Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
          row.head(nu_dim) = -KG.row(j);
          add_row(std::move(row), Kf(j) - config.u_min(j));
          ++lay.terminal_input_rows;
        }
      }
    }
  }

  // Output boxes y_k = C x_k for k = 1..nc.
  const int p = static_cast<int>(pred.C.rows());
  for (int k = 1; k <= config.nc; ++k) {
    const Eigen::MatrixXd CG = pred.C * pred.G_block(k);
    const Eigen::VectorXd Cf = pred.C * pred.F_block(k) * x0;
    for (int j = 0; j < p; ++j) {
      if (std::isfinite(config.y_max(j))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
        row.head(nu_dim) = CG.row(j);
        add_row(std::move(row), config.y_max(j) - Cf(j));
        ++lay.output_box_rows;
      }
      if (std::isfinite(config.y_min(j))) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
        row.head(nu_dim) = -CG.row(j);
        add_row(std::move(row), Cf(j) - config.y_min(j));
        ++lay.output_box_rows;
      }
    }
  }

  int slack = 0;
  for (const auto& c : extra_constraints) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    row.head(nu_dim) = c.coeffs.transpose() * pred.G_block(c.step);
    if (c.soft) row(nu_dim + slack++) = -1.0;
    add_row(std::move(row), c.bound - c.coeffs.dot(pred.F_block(c.step) * x0));
    ++lay.extra_rows;
  }
  for (int s = 0; s < soft_count; ++s) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    row(nu_dim + s) = -1.0;
    add_row(std::move(row), 0.0);
    ++lay.slack_rows;
  }

  qp.A_ineq.resize(static_cast<Eigen::Index>(rows.size()), d);
  qp.b_ineq.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    qp.A_ineq.row(static_cast<Eigen::Index>(i)) = rows[i];
    qp.b_ineq(static_cast<Eigen::Index>(i)) = bounds[i];
  }
  if (layout) *layout = lay;
  return qp;
}

double evaluate_cost(const StateSpaceModel& model, const MpcConfig& config,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& x_ref,
                     const Eigen::VectorXd& U) {
  const int n = model.states();
  const int m = model.inputs();
  auto ref = [&](int k) { return x_ref.segment((k - 1) * n, n); };

  Eigen::VectorXd x = x0;
  const Eigen::VectorXd e0 = x - ref(1);
  double J = e0.dot(config.Q * e0);
  for (int k = 0; k < config.np; ++k) {
    Eigen::VectorXd u;
    if (k < config.nu) {
      u = U.segment(k * m, m);
      J += u.dot(config.R * u);
    } else {
      u = config.K * x;
    }
    x = step(model, x, u);
    const Eigen::VectorXd e = x - ref(k + 1);
    J += e.dot((k + 1 == config.np ? config.P : config.Q) * e);
  }
  return J;
}

Eigen::VectorXd constant_reference(const Eigen::VectorXd& x, int np) {
  Eigen::VectorXd out(x.size() * np);
  for (int k = 0; k < np; ++k) out.segment(k * x.size(), x.size()) = x;
  return out;
}

Eigen::VectorXd shifted_warm_start(const ControllerState& state,
                                   const MpcConfig& config, int m) {
  const int dim = config.nu * m;
  if (!state.has_solution() || state.last_solution.size() != dim) {
    return Eigen::VectorXd::Zero(dim);
  }
  Eigen::VectorXd out(dim);
  out.head(dim - m) = state.last_solution.tail(dim - m);
  const Eigen::VectorXd x_nu = state.last_predicted_states.row(config.nu - 1).transpose();
  out.tail(m) = config.K * x_nu;
  return out;
}

StepResult mpc_step(const ControllerState& state, const StateSpaceModel& model,
                    const MpcConfig& config, const Eigen::VectorXd& x_t,
                    const Eigen::VectorXd& x_ref,
                    const std::vector<LinearInequality>& extra_constraints) {
  return mpc_step(state, model, config, build_prediction(model, config), x_t,
                  x_ref, extra_constraints);
}

StepResult mpc_step(const ControllerState& state, const StateSpaceModel& model,
                    const MpcConfig& config, const PredictionMatrices& pred,
                    const Eigen::VectorXd& x_t, const Eigen::VectorXd& x_ref,
                    const std::vector<LinearInequality>& extra_constraints) {
  if (!x_t.allFinite()) throw ConfigError("x_t", "state must be finite");
  const int m = model.inputs();
  const int nu_dim = config.nu * m;
  const QpProblem qp = build_qp(pred, config, x_t, x_ref, extra_constraints);

  Eigen::VectorXd warm = Eigen::VectorXd::Zero(qp.dimension());
  warm.head(nu_dim) = shifted_warm_start(state, config, m);
  const QpSolution sol =
      solve_qp(qp, warm, config.solver_tol, config.solver_max_iter);

  StepResult out;
  out.solution = sol.x.head(nu_dim);
  out.slacks = sol.x.tail(qp.num_slacks);
  out.diagnostics = sol.diagnostics;
  out.input = out.solution.head(m).cwiseMax(config.u_min).cwiseMin(config.u_max);
  out.predicted = predicted_states(pred, x_t, out.solution);
  out.state.last_solution = out.solution;
  out.state.last_predicted_states = out.predicted;
  out.state.step_index = state.step_index + 1;
  return out;
}

Controller::Controller(StateSpaceModel model, MpcConfig config)
    : model_(std::move(model)),
      config_(std::move(config)),
      pred_(build_prediction(model_, config_)) {}

StepResult Controller::step(const Eigen::VectorXd& x_t,
                            const Eigen::VectorXd& x_ref,
                            const std::vector<LinearInequality>& extra_constraints) {
  StepResult result = mpc_step(state_, model_, config_, pred_, x_t, x_ref,
                               extra_constraints);
  state_ = result.state;
  return result;
}

Eigen::MatrixXd Controller::preview(const Eigen::VectorXd& x_t) const {
  return predicted_states(pred_, x_t,
                          shifted_warm_start(state_, config_, model_.inputs()));
}

}  // namespace formpc
