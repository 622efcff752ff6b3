#include "formpc/qp_solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "formpc/errors.h"

namespace formpc {
namespace {

constexpr double kSigma = 1e-6;
constexpr double kAlpha = 1.6;
constexpr double kRhoInit = 0.1;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr int kCheckInterval = 10;
constexpr int kRuizIterations = 15;
constexpr double kPolishRegularization = 1e-10;
constexpr int kPolishRefinementSteps = 4;

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

double clamp_scale(double s) { return std::clamp(s, 1e-4, 1e4); }

// Equilibrated copy of the problem: x = D xs, rows scaled by E, cost by c.
struct ScaledProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd D;
  Eigen::VectorXd E;
  double c = 1.0;
};

ScaledProblem equilibrate(const QpProblem& qp) {
  const int d = qp.dimension();
  const int q = qp.rows();
  ScaledProblem s;
  s.H = qp.H;
  s.f = qp.f;
  s.A = qp.A_ineq;
  s.D = Eigen::VectorXd::Ones(d);
  s.E = Eigen::VectorXd::Ones(q);

  for (int it = 0; it < kRuizIterations; ++it) {
    Eigen::VectorXd delta(d);
    for (int j = 0; j < d; ++j) {
      double norm = s.H.col(j).lpNorm<Eigen::Infinity>();
      if (q > 0) norm = std::max(norm, s.A.col(j).lpNorm<Eigen::Infinity>());
      delta(j) = norm < 1e-4 ? 1.0 : clamp_scale(1.0 / std::sqrt(norm));
    }
    Eigen::VectorXd eps(q);
    for (int i = 0; i < q; ++i) {
      const double norm = s.A.row(i).lpNorm<Eigen::Infinity>();
      eps(i) = norm < 1e-4 ? 1.0 : clamp_scale(1.0 / std::sqrt(norm));
    }
    s.H = delta.asDiagonal() * s.H * delta.asDiagonal();
    s.A = eps.asDiagonal() * s.A * delta.asDiagonal();
    s.f = delta.cwiseProduct(s.f);
    s.D = s.D.cwiseProduct(delta);
    s.E = s.E.cwiseProduct(eps);
  }

  double mean_col = 0.0;
  for (int j = 0; j < d; ++j) mean_col += s.H.col(j).lpNorm<Eigen::Infinity>();
  mean_col /= std::max(d, 1);
  const double scale = std::max(mean_col, inf_norm(s.f));
  s.c = scale < 1e-4 ? 1.0 : clamp_scale(1.0 / scale);
  s.H *= s.c;
  s.f *= s.c;
  s.b = s.E.cwiseProduct(qp.b_ineq);
  return s;
}

double residual_of(const QpResiduals& r) {
  return std::max(r.primal, r.stationarity);
}

// Solves the equality-constrained QP on the guessed active set and returns
// true when the result is a KKT point of the full problem to within tol.
// Rows that come back with a negative multiplier are dropped one at a time,
// which repairs guesses padded with weakly active rows.
bool polish(const QpProblem& qp, std::vector<int> active, double tol,
            Eigen::VectorXd& x_out, Eigen::VectorXd& y_out) {
  const int d = qp.dimension();
  const int max_rounds = static_cast<int>(active.size()) + 1;
  for (int round = 0; round < max_rounds; ++round) {
    const int a = static_cast<int>(active.size());
    Eigen::MatrixXd A_act(a, d);
    Eigen::VectorXd b_act(a);
    for (int i = 0; i < a; ++i) {
      A_act.row(i) = qp.A_ineq.row(active[i]);
      b_act(i) = qp.b_ineq(active[i]);
    }

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d + a, d + a);
    kkt.topLeftCorner(d, d) = qp.H;
    kkt.topRightCorner(d, a) = A_act.transpose();
    kkt.bottomLeftCorner(a, d) = A_act;
    Eigen::MatrixXd kkt_reg = kkt;
    kkt_reg.topLeftCorner(d, d).diagonal().array() += kPolishRegularization;
    kkt_reg.bottomRightCorner(a, a).diagonal().array() -= kPolishRegularization;

    Eigen::VectorXd rhs(d + a);
    rhs << -qp.f, b_act;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt_reg);
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int r = 0; r < kPolishRefinementSteps; ++r) {
      sol += lu.solve(rhs - kkt * sol);
    }
    if (!sol.allFinite()) return false;

    int worst = -1;
    for (int i = 0; i < a; ++i) {
      if (sol(d + i) < -tol && (worst < 0 || sol(d + i) < sol(d + worst))) worst = i;
    }
    if (worst >= 0) {
      active.erase(active.begin() + worst);
      continue;
    }

    Eigen::VectorXd x = sol.head(d);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(qp.rows());
    for (int i = 0; i < a; ++i) y(active[i]) = std::max(sol(d + i), 0.0);
    if (residual_of(kkt_residuals(qp, x, y)) > tol) return false;
    x_out = std::move(x);
    y_out = std::move(y);
    return true;
  }
  return false;
}

void check_problem(const QpProblem& qp) {
  const int d = qp.dimension();
  if (d == 0) throw SolverError("QP has no decision variables");
  if (qp.H.rows() != d || qp.H.cols() != d) {
    throw SolverError("Hessian dimension does not match gradient");
  }
  if (qp.A_ineq.rows() != qp.rows() || (qp.rows() > 0 && qp.A_ineq.cols() != d)) {
    throw SolverError("constraint matrix dimension mismatch");
  }
  if (!qp.H.allFinite() || !qp.f.allFinite() || !qp.A_ineq.allFinite()) {
    throw SolverError("QP data contains non-finite entries");
  }
  if ((qp.b_ineq.array().isNaN()).any()) {
    throw SolverError("constraint bound is NaN");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    throw SolverError("Hessian is not positive definite");
  }
}

}  // namespace

QpResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  QpResiduals r;
  const Eigen::VectorXd Hx = qp.H * x;
  Eigen::VectorXd grad = Hx + qp.f;
  double scale = std::max(inf_norm(Hx), inf_norm(qp.f));
  if (qp.rows() > 0) {
    const Eigen::VectorXd violation = (qp.A_ineq * x - qp.b_ineq).cwiseMax(0.0);
    r.primal = inf_norm(violation);
    const Eigen::VectorXd Aty = qp.A_ineq.transpose() * y;
    grad += Aty;
    scale = std::max(scale, inf_norm(Aty));
  }
  r.stationarity = inf_norm(grad) / std::max(1.0, scale);
  return r;
}

QpSolution solve_qp(const QpProblem& qp,
                    const std::optional<Eigen::VectorXd>& warm_start,
                    double tol, int max_iter) {
  check_problem(qp);
  if (!(tol > 0.0)) throw SolverError("tolerance must be positive");
  const int d = qp.dimension();
  const int q = qp.rows();

  QpSolution out;
  out.multipliers = Eigen::VectorXd::Zero(q);

  if (q == 0) {
    out.x = qp.H.llt().solve(-qp.f);
    out.diagnostics.residual = residual_of(kkt_residuals(qp, out.x, out.multipliers));
    out.diagnostics.converged = out.diagnostics.residual <= tol;
    out.diagnostics.polished = true;
    return out;
  }

  const ScaledProblem s = equilibrate(qp);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (warm_start && warm_start->size() == d && warm_start->allFinite()) {
    x = warm_start->cwiseQuotient(s.D);
  }
  Eigen::VectorXd z = (s.A * x).cwiseMin(s.b);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(q);

  double rho = kRhoInit;
  const Eigen::MatrixXd AtA = s.A.transpose() * s.A;
  auto factor = [&](double r) {
    Eigen::MatrixXd M = s.H + r * AtA;
    M.diagonal().array() += kSigma;
    return Eigen::LLT<Eigen::MatrixXd>(M);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factor(rho);

  Eigen::VectorXd best_x = x.cwiseProduct(s.D);
  Eigen::VectorXd best_y = Eigen::VectorXd::Zero(q);
  double best_residual = std::numeric_limits<double>::infinity();

  std::vector<int> previous_active{-1};
  int iter = 0;
  while (iter < max_iter) {
    const Eigen::VectorXd rhs = kSigma * x - s.f + s.A.transpose() * (rho * z - y);
    const Eigen::VectorXd x_tilde = llt.solve(rhs);
    const Eigen::VectorXd z_tilde = s.A * x_tilde;
    x = kAlpha * x_tilde + (1.0 - kAlpha) * x;
    const Eigen::VectorXd z_relaxed = kAlpha * z_tilde + (1.0 - kAlpha) * z;
    const Eigen::VectorXd z_next = (z_relaxed + y / rho).cwiseMin(s.b);
    y += rho * (z_relaxed - z_next);
    z = z_next;
    ++iter;

    if (iter % kCheckInterval != 0 && iter != max_iter) continue;

    const Eigen::VectorXd x_u = x.cwiseProduct(s.D);
    const Eigen::VectorXd y_u = y.cwiseProduct(s.E) / s.c;
    const double res = residual_of(kkt_residuals(qp, x_u, y_u));
    if (res < best_residual) {
      best_residual = res;
      best_x = x_u;
      best_y = y_u;
    }

    std::vector<int> active;
    for (int i = 0; i < q; ++i) {
      if (y(i) > 0.0) active.push_back(i);
    }
    // Polishing costs a dense KKT factorization, so only attempt it once
    // the active set has settled or the iterate is already close.
    const bool settled = active == previous_active || res < 1e-4 || res <= tol;
    previous_active = active;
    Eigen::VectorXd px, py;
    if (settled && polish(qp, active, tol, px, py)) {
      out.x = std::move(px);
      out.multipliers = py.cwiseMax(0.0);
      out.diagnostics.iterations = iter;
      out.diagnostics.residual = residual_of(kkt_residuals(qp, out.x, out.multipliers));
      out.diagnostics.converged = true;
      out.diagnostics.polished = true;
      return out;
    }
    if (res <= tol) {
      out.x = x_u;
      out.multipliers = y_u.cwiseMax(0.0);
      out.diagnostics.iterations = iter;
      out.diagnostics.residual = res;
      out.diagnostics.converged = true;
      return out;
    }

    // Step-size adaptation on the scaled residual balance.
    const Eigen::VectorXd Ax = s.A * x;
    const Eigen::VectorXd Hx = s.H * x;
    const Eigen::VectorXd Aty = s.A.transpose() * y;
    const double prim_scale = std::max({inf_norm(Ax), inf_norm(z), 1e-12});
    const double dual_scale =
        std::max({inf_norm(Hx), inf_norm(Aty), inf_norm(s.f), 1e-12});
    const double prim = inf_norm(Ax - z) / prim_scale;
    const double dual = inf_norm(Hx + s.f + Aty) / dual_scale;
    if (prim > 0.0 && dual > 0.0) {
      const double rho_new =
          std::clamp(rho * std::sqrt(prim / dual), kRhoMin, kRhoMax);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        llt = factor(rho);
      }
    }
  }

  out.x = best_x;
  out.multipliers = best_y.cwiseMax(0.0);
  out.diagnostics.iterations = iter;
  out.diagnostics.residual = best_residual;
  out.diagnostics.converged = false;
  return out;
}

}  // namespace formpc
