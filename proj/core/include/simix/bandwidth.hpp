#pragma once

#include <cstdint>
#include <vector>

#include "simix/dataset.hpp"
#include "simix/mrsip.hpp"
#include "simix/msim.hpp"
#include "simix/predict.hpp"

namespace simix {

enum class CvModel { msim, mrsip };

struct CvConfig {
  int folds = 10;
  int repeats = 30;
  std::vector<double> candidate_bandwidths;  // empty: geometric grid around the rule of thumb
  CvModel model = CvModel::msim;
  int k = 2;
  KernelFamily kernel = KernelFamily::epanechnikov;
  Eigen::Index grid_n = 100;
  int workers = 0;

  void validate() const;
};

// Posterior component probabilities of held-out rows under a converged fit.
Responsibilities classification_probs(const Dataset& test, const MsimFit& fit);
Responsibilities classification_probs(const Dataset& test, const MrsipFit& fit);

// Classification-probability-weighted mean prediction for a single row.
double predict_row(const MsimFit& fit, const Eigen::RowVectorXd& x, double y);
double predict_row(const MrsipFit& fit, const Eigen::RowVectorXd& x, double y);

// Sum of squared prediction errors over a seeded L-fold partition, with
// predictions weighted by classification probabilities. Infeasible
// bandwidths (a degenerate kernel window on some training fold) score +inf.
double cv_score(const Dataset& ds, double h, const CvConfig& cfg, const EmControl& ctrl,
                std::uint64_t seed);

// Same partition logic against an arbitrary train->predict procedure.
double cv_score_with(const Dataset& ds, int folds, std::uint64_t seed, const FitPredictFn& fit);

struct BandwidthSelection {
  double h_hat = 0.0;
  double undersmooth = 0.0;  // h_hat * n^(-2/15)
  double oversmooth = 0.0;   // 1.5 * h_hat
  std::vector<double> candidates;
  std::vector<double> mean_scores;  // per candidate, averaged over repeats
  std::vector<int> win_counts;      // per candidate
  std::vector<double> winners;      // per repeat
};

// Repeats the L-fold CV with fresh random partitions and averages the
// per-repeat winning bandwidths.
BandwidthSelection select_bandwidth(const Dataset& ds, const CvConfig& cfg, const EmControl& ctrl,
                                    std::uint64_t seed);

// 1.06 * sd(zhat) * n^(-1/5) with zhat from the SIR direction.
double rule_of_thumb_bandwidth(const Dataset& ds);

// Geometric grid over [0.5, 2] times the rule of thumb.
std::vector<double> default_bandwidth_grid(const Dataset& ds, int count = 20);

// Exact partition of n rows into `folds` near-equal shuffled folds.
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed);

}  // namespace simix
