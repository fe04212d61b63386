#pragma once

#include <Eigen/Core>
#include <string>

namespace simix {

// Solves min_b || W^(1/2) (y - design b) ||^2 by column-pivoted QR on the
// weighted rows. Raises numerical-rank when the weighted design loses rank.
Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& weights,
                                       const std::string& module);

// [1 | x]: intercept column prepended to the covariate block.
Eigen::MatrixXd intercept_augmented(const Eigen::MatrixXd& x);

}  // namespace simix
