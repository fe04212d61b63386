#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "simix/dataset.hpp"
#include "simix/index_optimizer.hpp"
#include "simix/kernel.hpp"
#include "simix/msim.hpp"

namespace simix {

// Linear component parameters: intercept-augmented slopes plus constant
// variances. The regression design is [1 | x]; the index uses the raw x.
struct MrsipParams {
  Eigen::MatrixXd beta;    // k x (p+1), intercept first
  Eigen::VectorXd sigma2;  // k

  Eigen::Index k() const noexcept { return beta.rows(); }
  void validate() const;
  // Identifiability wants (beta_j, sigma2_j) pairwise distinct; coincident
  // pairs are legal inputs but flagged so callers can warn.
  bool has_coincident_components(double tol = 1e-8) const;
};

struct MrsipFit {
  IndexVector alpha;
  MrsipParams params;
  CurveSet pi_curve;  // proportions only
  double loglik = 0.0;
  bool converged = false;
  int n_outer_iters = 0;
  std::vector<double> loglik_trace;  // accepted outer iterates
  int underflow_rows = 0;
};

Responsibilities mrsip_e_step(const Dataset& ds, const IndexVector& alpha,
                              const CurveSet& pi_curve, const MrsipParams& params,
                              int* underflow_rows = nullptr);

// Proportion smoother at every grid point, clamped and renormalized exactly
// as in the fully nonparametric model.
CurveSet mrsip_update_pi(const Dataset& ds, const IndexVector& alpha, const Responsibilities& resp,
                         const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl = {});

// Weighted least squares per component followed by the weighted variance
// update (floored). Raises numerical-rank when a component has effectively
// fewer observations than regression coefficients.
MrsipParams mrsip_update_beta_sigma(const Dataset& ds, const Responsibilities& resp,
                                    const EmControl& ctrl = {});

double mrsip_loglik(const Dataset& ds, const IndexVector& alpha, const CurveSet& pi_curve,
                    const MrsipParams& params);

IndexOptimResult maximize_index_mrsip(const Dataset& ds, const CurveSet& pi_curve,
                                      const MrsipParams& params, const IndexVector& alpha0);

struct MrsipInit {
  IndexVector alpha;
  MrsipParams params;
};

// Nested backfitting: an EM pass for the proportion curve at fixed linear
// parameters, then an inner loop alternating the weighted-least-squares
// parameter update with the index maximization, repeated to convergence with
// a grid refresh after every outer iteration. Default initialization is SIR
// for the direction plus a constant-proportion mixture of linear regressions
// for the parameters.
MrsipFit fit_mrsip(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                   const EmControl& ctrl, std::uint64_t seed,
                   const std::optional<MrsipInit>& init = std::nullopt);

}  // namespace simix
