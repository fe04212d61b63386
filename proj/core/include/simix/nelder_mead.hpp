#pragma once

#include <Eigen/Core>
#include <functional>

namespace simix {

struct NelderMeadOptions {
  double initial_step = 0.05;   // per-coordinate offset of the start simplex
  int max_evals = 2000;
  double f_tol = 1e-12;         // spread of simplex values, relative
  double x_tol = 1e-10;         // simplex diameter
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Downhill simplex minimizer (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

}  // namespace simix
