#pragma once

#include <vector>

#include "simix/dataset.hpp"
#include "simix/mixlinreg.hpp"
#include "simix/mrsip.hpp"
#include "simix/simulate.hpp"

namespace simix {

// Curve accuracy for the fully nonparametric fit. Component labels are
// aligned to the truth by the permutation minimizing the summed squared
// error over all three families, so relabeling the estimate never changes
// the reported values.
struct MsimMetrics {
  double rase_pi = 0.0;
  double rase_m = 0.0;
  double rase_sigma2 = 0.0;
  std::vector<int> perm;  // perm[true component] = estimated component
};
MsimMetrics msim_metrics(const CurveSet& est, const TruthSpec& truth);

// Accuracy for the linear-component fit: proportion-curve RASE plus aligned
// parameter errors (alignment includes the parameter discrepancies).
struct MrsipMetrics {
  double rase_pi = 0.0;
  Eigen::MatrixXd beta_sq_err;    // k x (p+1), aligned squared errors
  Eigen::VectorXd sigma2_sq_err;  // k
  std::vector<int> perm;
};
MrsipMetrics mrsip_metrics(const CurveSet& est_pi, const MrsipParams& params,
                           const TruthSpec& truth);

// Baseline with constant proportions: the flat estimate is evaluated against
// the true proportion curve on the supplied grid.
MrsipMetrics mixlinreg_metrics(const MixLinRegFit& fit, const TruthSpec& truth, const Grid& grid);

// RASE of one curve family under a fixed component mapping.
double rase(const Eigen::MatrixXd& est_rows, const std::function<double(int, double)>& truth_fn,
            const std::vector<int>& perm, const Grid& grid);

// Per-coordinate mean of (alpha_hat - alpha)^2 across replications, times 100.
Eigen::VectorXd mse_alpha(const std::vector<IndexVector>& estimates, const IndexVector& truth);

}  // namespace simix
