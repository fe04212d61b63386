#pragma once

#include <cstdint>

#include "simix/dataset.hpp"
#include "simix/linalg.hpp"

namespace simix {

struct MixLinRegOptions {
  int restarts = 5;
  int max_iters = 500;
  double tol = 1e-8;  // absolute loglik change
  double var_floor_frac = 1e-8;
  double prop_floor = 1e-6;
};

// Finite mixture of linear regressions with constant mixing proportions.
// Baseline estimator and warm start for the index-varying model.
struct MixLinRegFit {
  Eigen::MatrixXd beta;    // k x (p+1), intercept first
  Eigen::VectorXd sigma2;  // k
  Eigen::VectorXd pi;      // k, constant proportions
  double loglik = 0.0;
  bool converged = false;
};

// Standard EM with seeded restarts; the best log-likelihood wins. k=1
// reduces to ordinary least squares.
MixLinRegFit fit_mixlinreg(const Dataset& ds, int k, std::uint64_t seed,
                           const MixLinRegOptions& opts = {});

}  // namespace simix
