#include "simix/linalg.hpp"

#include <Eigen/Dense>

#include "simix/errors.hpp"

namespace simix {

Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& weights, const std::string& module) {
  if (design.rows() != y.size() || design.rows() != weights.size()) {
    throw_invalid(module, "weighted least squares: shape mismatch");
  }
  const Eigen::VectorXd root_w = weights.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd wd = root_w.asDiagonal() * design;
  const Eigen::VectorXd wy = root_w.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wd);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    throw_rank(module, "weighted normal equations are rank deficient");
  }
  return qr.solve(wy);
}

Eigen::MatrixXd intercept_augmented(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd s(x.rows(), x.cols() + 1);
  s.col(0).setOnes();
  s.rightCols(x.cols()) = x;
  return s;
}

}  // namespace simix
