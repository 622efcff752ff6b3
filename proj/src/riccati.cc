#include "formpc/riccati.h"

#include <algorithm>

#include "formpc/errors.h"

namespace formpc {

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol, int max_iter) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || Q.rows() != A.rows() ||
      Q.cols() != A.rows() || R.rows() != B.cols() || R.cols() != B.cols()) {
    throw ConfigError("P", "Riccati dimensions inconsistent");
  }
  Eigen::MatrixXd P = Q;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd S = R + BtP * B;
    Eigen::MatrixXd next =
        Q + A.transpose() * P * A - (BtP * A).transpose() * S.ldlt().solve(BtP * A);
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double change = (next - P).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, next.lpNorm<Eigen::Infinity>());
    P = std::move(next);
    if (change <= tol * scale) return P;
  }
  throw ConfigError("P", "Riccati iteration did not converge (is (A, B) stabilizable?)");
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtP = B.transpose() * P;
  return -(R + BtP * B).ldlt().solve(BtP * A);
}

}  // namespace formpc
