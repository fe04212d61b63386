#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simix/bandwidth.hpp"
#include "simix/metrics.hpp"
#include "simix/predict.hpp"
#include "simix/simulate.hpp"

namespace simix {

enum class Estimator {
  sir,           // direction only
  msim_os,       // one-step
  msim_fib_sir,  // backfitting from SIR
  msim_fib_true, // backfitting from the true direction
  mrsip_sir,
  mrsip_true,
  mixlinreg,
  oracle  // returns the truth; pipeline sanity check
};

const char* estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);
bool estimator_uses_bandwidth(Estimator e);
bool estimator_has_alpha(Estimator e);

struct ReplicationConfig {
  ExampleId example = ExampleId::example1;
  Eigen::Index n = 400;
  int reps = 100;
  std::vector<Estimator> estimators;
  std::vector<double> bandwidths;  // smoothing estimators run once per value
  int k = 2;
  KernelFamily kernel = KernelFamily::epanechnikov;
  Eigen::Index grid_n = 100;
  EmControl ctrl;
  std::uint64_t seed = 0;
  int workers = 0;

  void validate() const;
};

struct ReplicationRow {
  int rep = 0;
  Estimator est = Estimator::sir;
  double bandwidth = 0.0;  // NaN when the estimator does not smooth
  bool ok = false;
  std::string error;
  Eigen::VectorXd alpha_hat;      // empty when the estimator has no direction
  double rase_pi = 0.0;           // NaN when absent
  double rase_m = 0.0;
  double rase_sigma2 = 0.0;
  Eigen::MatrixXd beta_hat;       // aligned to truth; empty when absent
  Eigen::VectorXd sigma2_hat;
};

struct EstimatorAggregate {
  Estimator est = Estimator::sir;
  double bandwidth = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  Eigen::VectorXd mse_alpha_x100;   // per coordinate; empty if no direction
  double mean_rase_pi = 0.0, sd_rase_pi = 0.0;
  double mean_rase_m = 0.0, sd_rase_m = 0.0;
  double mean_rase_sigma2 = 0.0, sd_rase_sigma2 = 0.0;
  Eigen::MatrixXd mse_beta_x100;    // k x (p+1); empty if no linear components
  Eigen::VectorXd mse_sigma2_x100;  // k
};

struct ReplicationReport {
  ReplicationConfig config;
  Eigen::VectorXd truth_alpha;
  std::vector<ReplicationRow> rows;
  std::vector<EstimatorAggregate> aggregates;
};

// Independent seeded replications: generate, fit every configured estimator,
// score against the generator's truth. Failed replications are recorded and
// excluded from the aggregates. Workers run concurrently with per-task seed
// streams, so the report does not depend on scheduling.
ReplicationReport run_replications(const ReplicationConfig& cfg);

enum class SplitMode { mccv, kfold };

struct MccvConfig {
  Eigen::Index d = 10;     // test-set size (mccv) or fold count (kfold)
  int n_partitions = 100;  // ignored in kfold mode
  SplitMode mode = SplitMode::mccv;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct MccvResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> mspe;  // [predictor][partition], NaN on failure
  std::vector<int> failures;
};

// Repeated random train/test splits (or plain k-fold CV) reporting the mean
// squared prediction error per partition for every supplied predictor.
MccvResult mccv_evaluate(const Dataset& ds, const MccvConfig& cfg,
                         const std::vector<PredictorSpec>& predictors);

// Built-in predictors for the evaluation harness.
PredictorSpec msim_predictor(int k, double h, KernelFamily kernel, Eigen::Index grid_n,
                             const EmControl& ctrl, bool refine_index = true);
PredictorSpec mrsip_predictor(int k, double h, KernelFamily kernel, Eigen::Index grid_n,
                              const EmControl& ctrl);
PredictorSpec mixlinreg_predictor(int k);
PredictorSpec ols_predictor();

}  // namespace simix
