#include "simix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace simix {

namespace {

constexpr const char* kModule = "bench-eval";

double family_sq_err(const Eigen::MatrixXd& est_rows,
                     const std::function<double(int, double)>& truth_fn,
                     const std::vector<int>& perm, const Grid& grid) {
  double total = 0.0;
  for (std::size_t j = 0; j < perm.size(); ++j) {
    for (Eigen::Index t = 0; t < grid.size(); ++t) {
      const double d =
          est_rows(perm[j], t) - truth_fn(static_cast<int>(j), grid.points()[t]);
      total += d * d;
    }
  }
  return total;
}

std::vector<std::vector<int>> permutations(int k) {
  std::vector<int> base(static_cast<std::size_t>(k));
  std::iota(base.begin(), base.end(), 0);
  std::vector<std::vector<int>> all;
  do {
    all.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return all;
}

}  // namespace

double rase(const Eigen::MatrixXd& est_rows, const std::function<double(int, double)>& truth_fn,
            const std::vector<int>& perm, const Grid& grid) {
  if (static_cast<Eigen::Index>(perm.size()) != est_rows.rows()) {
    throw_invalid(kModule, "permutation size does not match component count");
  }
  return std::sqrt(family_sq_err(est_rows, truth_fn, perm, grid) /
                   static_cast<double>(grid.size()));
}

MsimMetrics msim_metrics(const CurveSet& est, const TruthSpec& truth) {
  if (!truth.has_curves()) throw_invalid(kModule, "truth has no curve families");
  const int k = static_cast<int>(est.k());
  if (k != truth.k) throw_invalid(kModule, "component counts differ");
  if (k > 6) throw_invalid(kModule, "component alignment supports k <= 6");

  MsimMetrics best;
  double best_total = std::numeric_limits<double>::infinity();
  for (const auto& perm : permutations(k)) {
    const double total = family_sq_err(est.pi, truth.pi, perm, est.grid) +
                         family_sq_err(est.m, truth.m, perm, est.grid) +
                         family_sq_err(est.sigma2, truth.sigma2, perm, est.grid);
    if (total < best_total) {
      best_total = total;
      best.perm = perm;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(est.grid.size());
  best.rase_pi = std::sqrt(family_sq_err(est.pi, truth.pi, best.perm, est.grid) * inv_n);
  best.rase_m = std::sqrt(family_sq_err(est.m, truth.m, best.perm, est.grid) * inv_n);
  best.rase_sigma2 =
      std::sqrt(family_sq_err(est.sigma2, truth.sigma2, best.perm, est.grid) * inv_n);
  return best;
}

namespace {

MrsipMetrics mrsip_metrics_impl(const Eigen::MatrixXd& pi_rows, const Grid& grid,
                                const Eigen::MatrixXd& beta, const Eigen::VectorXd& sigma2,
                                const TruthSpec& truth) {
  const int k = static_cast<int>(beta.rows());
  if (k != truth.k) throw_invalid(kModule, "component counts differ");
  if (truth.beta.rows() != k || truth.beta.cols() != beta.cols()) {
    throw_invalid(kModule, "truth parameter shape mismatch");
  }
  if (k > 6) throw_invalid(kModule, "component alignment supports k <= 6");

  MrsipMetrics best;
  double best_total = std::numeric_limits<double>::infinity();
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (const auto& perm : permutations(k)) {
    double total = family_sq_err(pi_rows, truth.pi, perm, grid) * inv_n;
    for (int j = 0; j < k; ++j) {
      total += (beta.row(perm[j]) - truth.beta.row(j)).squaredNorm();
      const double ds2 = sigma2[perm[j]] - truth.sigma2_const[j];
      total += ds2 * ds2;
    }
    if (total < best_total) {
      best_total = total;
      best.perm = perm;
    }
  }
  best.rase_pi = std::sqrt(family_sq_err(pi_rows, truth.pi, best.perm, grid) * inv_n);
  best.beta_sq_err.resize(k, beta.cols());
  best.sigma2_sq_err.resize(k);
  for (int j = 0; j < k; ++j) {
    best.beta_sq_err.row(j) =
        (beta.row(best.perm[j]) - truth.beta.row(j)).array().square().matrix();
    const double ds2 = sigma2[best.perm[j]] - truth.sigma2_const[j];
    best.sigma2_sq_err[j] = ds2 * ds2;
  }
  return best;
}

}  // namespace

MrsipMetrics mrsip_metrics(const CurveSet& est_pi, const MrsipParams& params,
                           const TruthSpec& truth) {
  return mrsip_metrics_impl(est_pi.pi, est_pi.grid, params.beta, params.sigma2, truth);
}

MrsipMetrics mixlinreg_metrics(const MixLinRegFit& fit, const TruthSpec& truth, const Grid& grid) {
  const Eigen::Index k = fit.beta.rows();
  Eigen::MatrixXd pi_rows(k, grid.size());
  for (Eigen::Index j = 0; j < k; ++j) pi_rows.row(j).setConstant(fit.pi[j]);
  return mrsip_metrics_impl(pi_rows, grid, fit.beta, fit.sigma2, truth);
}

Eigen::VectorXd mse_alpha(const std::vector<IndexVector>& estimates, const IndexVector& truth) {
  if (estimates.empty()) throw_invalid(kModule, "no estimates to aggregate");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(truth.dim());
  for (const auto& est : estimates) {
    if (est.dim() != truth.dim()) throw_invalid(kModule, "estimate dimension mismatch");
    acc += (est.alpha() - truth.alpha()).array().square().matrix();
  }
  return 100.0 * acc / static_cast<double>(estimates.size());
}

}  // namespace simix
