#include "simix/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "simix/linalg.hpp"
#include "simix/parallel.hpp"
#include "simix/rng.hpp"
#include "simix/sir.hpp"

namespace simix {

namespace {
constexpr const char* kModule = "bench-eval";
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::sir: return "sir";
    case Estimator::msim_os: return "os";
    case Estimator::msim_fib_sir: return "fib-s";
    case Estimator::msim_fib_true: return "fib-t";
    case Estimator::mrsip_sir: return "mrsip-s";
    case Estimator::mrsip_true: return "mrsip-t";
    case Estimator::mixlinreg: return "mixlinreg";
    case Estimator::oracle: return "oracle";
  }
  return "unknown";
}

Estimator estimator_from_name(const std::string& name) {
  for (const Estimator e :
       {Estimator::sir, Estimator::msim_os, Estimator::msim_fib_sir, Estimator::msim_fib_true,
        Estimator::mrsip_sir, Estimator::mrsip_true, Estimator::mixlinreg, Estimator::oracle}) {
    if (name == estimator_name(e)) return e;
  }
  throw_config(kModule, "unknown estimator: " + name);
}

bool estimator_uses_bandwidth(Estimator e) {
  switch (e) {
    case Estimator::msim_os:
    case Estimator::msim_fib_sir:
    case Estimator::msim_fib_true:
    case Estimator::mrsip_sir:
    case Estimator::mrsip_true:
      return true;
    default:
      return false;
  }
}

bool estimator_has_alpha(Estimator e) {
  return e != Estimator::mixlinreg;
}

void ReplicationConfig::validate() const {
  ctrl.validate();
  if (n < 2) throw_config(kModule, "n must be >= 2");
  if (reps < 1) throw_config(kModule, "reps must be >= 1");
  if (k < 1) throw_config(kModule, "k must be >= 1");
  if (grid_n < 2) throw_config(kModule, "grid_n must be >= 2");
  if (estimators.empty()) throw_config(kModule, "no estimators configured");
  bool needs_h = false;
  for (const auto e : estimators) needs_h = needs_h || estimator_uses_bandwidth(e);
  if (needs_h && bandwidths.empty()) {
    throw_config(kModule, "smoothing estimators need at least one bandwidth");
  }
  for (const double h : bandwidths) {
    if (!(h > 0.0)) throw_config(kModule, "bandwidths must be positive");
  }
}

namespace {

struct Task {
  Estimator est;
  double bandwidth;  // NaN for non-smoothing estimators
};

CurveSet truth_curves(const TruthSpec& truth, const Grid& grid) {
  const int k = truth.k;
  CurveSet curves{Eigen::MatrixXd(k, grid.size()),
                  Eigen::MatrixXd(k, truth.has_curves() ? grid.size() : 0),
                  Eigen::MatrixXd(k, truth.has_curves() ? grid.size() : 0), grid};
  for (int j = 0; j < k; ++j) {
    for (Eigen::Index t = 0; t < grid.size(); ++t) {
      const double u = grid.points()[t];
      curves.pi(j, t) = truth.pi(j, u);
      if (truth.has_curves()) {
        curves.m(j, t) = truth.m(j, u);
        curves.sigma2(j, t) = truth.sigma2(j, u);
      }
    }
  }
  return curves;
}

ReplicationRow fit_one(const ReplicationConfig& cfg, const Generated& gen, const Task& task,
                       int rep, std::uint64_t fit_seed) {
  ReplicationRow row;
  row.rep = rep;
  row.est = task.est;
  row.bandwidth = task.bandwidth;
  row.rase_pi = row.rase_m = row.rase_sigma2 = kNaN;

  const Dataset& ds = gen.ds;
  const TruthSpec& truth = gen.truth;
  const KernelSpec kernel{cfg.kernel, task.bandwidth};

  switch (task.est) {
    case Estimator::sir: {
      row.alpha_hat = sir_direction(ds).alpha();
      break;
    }
    case Estimator::msim_os:
    case Estimator::msim_fib_sir:
    case Estimator::msim_fib_true: {
      MsimFit fit = [&] {
        if (task.est == Estimator::msim_os) {
          return fit_msim_os(ds, cfg.k, kernel, cfg.grid_n, cfg.ctrl, fit_seed);
        }
        const std::optional<IndexVector> init =
            task.est == Estimator::msim_fib_true ? std::optional<IndexVector>(truth.alpha)
                                                 : std::nullopt;
        return fit_msim_fib(ds, cfg.k, kernel, cfg.grid_n, cfg.ctrl, fit_seed, init);
      }();
      row.alpha_hat = fit.alpha.alpha();
      const MsimMetrics metrics = msim_metrics(fit.curves, truth);
      row.rase_pi = metrics.rase_pi;
      row.rase_m = metrics.rase_m;
      row.rase_sigma2 = metrics.rase_sigma2;
      break;
    }
    case Estimator::mrsip_sir:
    case Estimator::mrsip_true: {
      std::optional<MrsipInit> init;
      if (task.est == Estimator::mrsip_true) {
        init = MrsipInit{truth.alpha, MrsipParams{truth.beta, truth.sigma2_const}};
      }
      const MrsipFit fit = fit_mrsip(ds, cfg.k, kernel, cfg.grid_n, cfg.ctrl, fit_seed, init);
      row.alpha_hat = fit.alpha.alpha();
      const MrsipMetrics metrics = mrsip_metrics(fit.pi_curve, fit.params, truth);
      row.rase_pi = metrics.rase_pi;
      row.beta_hat.resize(fit.params.k(), fit.params.beta.cols());
      row.sigma2_hat.resize(fit.params.k());
      for (Eigen::Index j = 0; j < fit.params.k(); ++j) {
        row.beta_hat.row(j) = fit.params.beta.row(metrics.perm[static_cast<std::size_t>(j)]);
        row.sigma2_hat[j] = fit.params.sigma2[metrics.perm[static_cast<std::size_t>(j)]];
      }
      break;
    }
    case Estimator::mixlinreg: {
      const MixLinRegFit fit = fit_mixlinreg(ds, cfg.k, fit_seed);
      const Grid grid = make_grid(project(ds, truth.alpha), cfg.grid_n);
      const MrsipMetrics metrics = mixlinreg_metrics(fit, truth, grid);
      row.rase_pi = metrics.rase_pi;
      row.beta_hat.resize(fit.beta.rows(), fit.beta.cols());
      row.sigma2_hat.resize(fit.beta.rows());
      for (Eigen::Index j = 0; j < fit.beta.rows(); ++j) {
        row.beta_hat.row(j) = fit.beta.row(metrics.perm[static_cast<std::size_t>(j)]);
        row.sigma2_hat[j] = fit.sigma2[metrics.perm[static_cast<std::size_t>(j)]];
      }
      break;
    }
    case Estimator::oracle: {
      row.alpha_hat = truth.alpha.alpha();
      const Grid grid = make_grid(project(ds, truth.alpha), cfg.grid_n);
      if (truth.has_curves()) {
        const MsimMetrics metrics = msim_metrics(truth_curves(truth, grid), truth);
        row.rase_pi = metrics.rase_pi;
        row.rase_m = metrics.rase_m;
        row.rase_sigma2 = metrics.rase_sigma2;
      } else {
        row.rase_pi = 0.0;
        row.beta_hat = truth.beta;
        row.sigma2_hat = truth.sigma2_const;
      }
      break;
    }
  }
  row.ok = true;
  return row;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

ReplicationReport run_replications(const ReplicationConfig& cfg) {
  cfg.validate();

  std::vector<Task> tasks;
  for (const auto est : cfg.estimators) {
    if (estimator_uses_bandwidth(est)) {
      for (const double h : cfg.bandwidths) tasks.push_back({est, h});
    } else {
      tasks.push_back({est, kNaN});
    }
  }

  ReplicationReport report;
  report.config = cfg;
  const std::size_t n_tasks = tasks.size();
  const std::size_t total = n_tasks * static_cast<std::size_t>(cfg.reps);
  report.rows.resize(total);

  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.workers, [&](std::size_t rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, seed_stream::replication, rep);
    const Generated gen =
        generate(cfg.example, cfg.n, derive_seed(rep_seed, seed_stream::generator, 0));
    for (std::size_t t = 0; t < n_tasks; ++t) {
      const std::uint64_t fit_seed = derive_seed(rep_seed, seed_stream::estimator, t);
      ReplicationRow& row = report.rows[rep * n_tasks + t];
      try {
        row = fit_one(cfg, gen, tasks[t], static_cast<int>(rep), fit_seed);
      } catch (const Error& e) {
        row.rep = static_cast<int>(rep);
        row.est = tasks[t].est;
        row.bandwidth = tasks[t].bandwidth;
        row.ok = false;
        row.error = std::string(error_kind_name(e.kind())) + ": " + e.what();
        row.rase_pi = row.rase_m = row.rase_sigma2 = kNaN;
      }
    }
  });

  const TruthSpec truth = generate(cfg.example, 2, cfg.seed).truth;
  report.truth_alpha = truth.alpha.alpha();

  // aggregate per task over successful replications
  for (std::size_t t = 0; t < n_tasks; ++t) {
    EstimatorAggregate agg;
    agg.est = tasks[t].est;
    agg.bandwidth = tasks[t].bandwidth;
    std::vector<IndexVector> alphas;
    std::vector<double> rase_pi, rase_m, rase_s2;
    Eigen::MatrixXd beta_acc;
    Eigen::VectorXd sigma2_acc;
    int n_params = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const ReplicationRow& row = report.rows[static_cast<std::size_t>(rep) * n_tasks + t];
      if (!row.ok) {
        ++agg.n_failed;
        continue;
      }
      ++agg.n_ok;
      if (row.alpha_hat.size() > 0) alphas.emplace_back(row.alpha_hat);
      if (std::isfinite(row.rase_pi)) rase_pi.push_back(row.rase_pi);
      if (std::isfinite(row.rase_m)) rase_m.push_back(row.rase_m);
      if (std::isfinite(row.rase_sigma2)) rase_s2.push_back(row.rase_sigma2);
      if (row.beta_hat.size() > 0) {
        if (n_params == 0) {
          beta_acc = Eigen::MatrixXd::Zero(row.beta_hat.rows(), row.beta_hat.cols());
          sigma2_acc = Eigen::VectorXd::Zero(row.sigma2_hat.size());
        }
        beta_acc += (row.beta_hat - truth.beta).array().square().matrix();
        sigma2_acc += (row.sigma2_hat - truth.sigma2_const).array().square().matrix();
        ++n_params;
      }
    }
    if (!alphas.empty()) agg.mse_alpha_x100 = mse_alpha(alphas, truth.alpha);
    agg.mean_rase_pi = mean_of(rase_pi);
    agg.sd_rase_pi = sd_of(rase_pi);
    agg.mean_rase_m = mean_of(rase_m);
    agg.sd_rase_m = sd_of(rase_m);
    agg.mean_rase_sigma2 = mean_of(rase_s2);
    agg.sd_rase_sigma2 = sd_of(rase_s2);
    if (n_params > 0) {
      agg.mse_beta_x100 = 100.0 * beta_acc / static_cast<double>(n_params);
      agg.mse_sigma2_x100 = 100.0 * sigma2_acc / static_cast<double>(n_params);
    }
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

MccvResult mccv_evaluate(const Dataset& ds, const MccvConfig& cfg,
                         const std::vector<PredictorSpec>& predictors) {
  if (predictors.empty()) throw_config(kModule, "no predictors supplied");
  if (cfg.mode == SplitMode::mccv) {
    if (cfg.d < 1 || cfg.d >= ds.n()) throw_config(kModule, "test size d must be in [1, n)");
    if (cfg.n_partitions < 1) throw_config(kModule, "need at least one partition");
  } else {
    if (cfg.d < 2 || cfg.d > ds.n()) throw_config(kModule, "fold count must be in [2, n]");
  }

  const int n_parts =
      cfg.mode == SplitMode::mccv ? cfg.n_partitions : static_cast<int>(cfg.d);
  MccvResult result;
  result.names.reserve(predictors.size());
  for (const auto& p : predictors) result.names.push_back(p.name);
  result.mspe.assign(predictors.size(),
                     std::vector<double>(static_cast<std::size_t>(n_parts), kNaN));
  result.failures.assign(predictors.size(), 0);

  // kfold mode shares one shuffled partition across folds
  const auto folds = cfg.mode == SplitMode::kfold
                         ? make_folds(ds.n(), static_cast<int>(cfg.d), cfg.seed)
                         : std::vector<std::vector<Eigen::Index>>{};

  std::vector<std::vector<char>> failed(predictors.size(),
                                        std::vector<char>(static_cast<std::size_t>(n_parts), 0));

  parallel_for(static_cast<std::size_t>(n_parts), cfg.workers, [&](std::size_t part) {
    std::vector<Eigen::Index> test_rows;
    if (cfg.mode == SplitMode::kfold) {
      test_rows = folds[part];
    } else {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.n()));
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      Rng rng(derive_seed(cfg.seed, seed_stream::mccv, part));
      rng.shuffle(idx.begin(), idx.end());
      test_rows.assign(idx.begin(), idx.begin() + cfg.d);
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::vector<char> in_test(static_cast<std::size_t>(ds.n()), 0);
    for (const auto i : test_rows) in_test[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> train_rows;
    train_rows.reserve(static_cast<std::size_t>(ds.n()) - test_rows.size());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (!in_test[static_cast<std::size_t>(i)]) train_rows.push_back(i);
    }
    const Dataset train = ds.rows(train_rows);

    for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
      try {
        const PredictFn predict =
            predictors[pi].fit(train, derive_seed(cfg.seed, seed_stream::estimator, part));
        double acc = 0.0;
        for (const auto t : test_rows) {
          const double err = ds.y()[t] - predict(ds.x().row(t), ds.y()[t]);
          acc += err * err;
        }
        result.mspe[pi][part] = acc / static_cast<double>(test_rows.size());
      } catch (const Error&) {
        failed[pi][part] = 1;
      }
    }
  });

  for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
    result.failures[pi] =
        static_cast<int>(std::count(failed[pi].begin(), failed[pi].end(), char{1}));
  }
  return result;
}

PredictorSpec msim_predictor(int k, double h, KernelFamily kernel, Eigen::Index grid_n,
                             const EmControl& ctrl, bool refine_index) {
  FitPredictFn fit = [=](const Dataset& train, std::uint64_t seed) -> PredictFn {
    const KernelSpec spec{kernel, h};
    auto fitted = std::make_shared<MsimFit>(
        refine_index ? fit_msim_fib(train, k, spec, grid_n, ctrl, seed)
                     : fit_msim_os(train, k, spec, grid_n, ctrl, seed));
    return [fitted](const Eigen::RowVectorXd& x, double y) {
      return predict_row(*fitted, x, y);
    };
  };
  return PredictorSpec{refine_index ? "msim-fib" : "msim-os", std::move(fit)};
}

PredictorSpec mrsip_predictor(int k, double h, KernelFamily kernel, Eigen::Index grid_n,
                              const EmControl& ctrl) {
  FitPredictFn fit = [=](const Dataset& train, std::uint64_t seed) -> PredictFn {
    const KernelSpec spec{kernel, h};
    auto fitted =
        std::make_shared<MrsipFit>(fit_mrsip(train, k, spec, grid_n, ctrl, seed));
    return [fitted](const Eigen::RowVectorXd& x, double y) {
      return predict_row(*fitted, x, y);
    };
  };
  return PredictorSpec{"mrsip", std::move(fit)};
}

PredictorSpec mixlinreg_predictor(int k) {
  FitPredictFn fit = [k](const Dataset& train, std::uint64_t seed) -> PredictFn {
    auto fitted = std::make_shared<MixLinRegFit>(fit_mixlinreg(train, k, seed));
    return [fitted](const Eigen::RowVectorXd& x, double y) {
      const Eigen::Index kk = fitted->beta.rows();
      Eigen::VectorXd logw(kk), mean(kk);
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < kk; ++j) {
        mean[j] = fitted->beta(j, 0) + fitted->beta.row(j).tail(x.size()).dot(x);
        const double r = y - mean[j];
        logw[j] = std::log(fitted->pi[j]) -
                  0.5 * (std::log(fitted->sigma2[j]) + r * r / fitted->sigma2[j]);
        best = std::max(best, logw[j]);
      }
      double denom = 0.0, acc = 0.0;
      for (Eigen::Index j = 0; j < kk; ++j) {
        const double w = std::exp(logw[j] - best);
        denom += w;
        acc += w * mean[j];
      }
      return acc / denom;
    };
  };
  return PredictorSpec{"mixlinreg", std::move(fit)};
}

PredictorSpec ols_predictor() {
  FitPredictFn fit = [](const Dataset& train, std::uint64_t) -> PredictFn {
    const Eigen::MatrixXd s = intercept_augmented(train.x());
    const Eigen::VectorXd beta =
        weighted_least_squares(s, train.y(), Eigen::VectorXd::Ones(train.n()), kModule);
    return [beta](const Eigen::RowVectorXd& x, double) {
      return beta[0] + beta.tail(x.size()).dot(x);
    };
  };
  return PredictorSpec{"ols", std::move(fit)};
}

}  // namespace simix
