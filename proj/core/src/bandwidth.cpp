#include "simix/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "simix/linalg.hpp"
#include "simix/mixlinreg.hpp"
#include "simix/parallel.hpp"
#include "simix/rng.hpp"
#include "simix/sir.hpp"

namespace simix {

namespace {
constexpr const char* kModule = "bandwidth-cv";
}

void CvConfig::validate() const {
  if (folds < 2) throw_config(kModule, "need at least 2 folds");
  if (repeats < 1) throw_config(kModule, "need at least 1 repeat");
  if (k < 1) throw_config(kModule, "k must be >= 1");
  if (grid_n < 2) throw_config(kModule, "grid_n must be >= 2");
  for (std::size_t i = 0; i < candidate_bandwidths.size(); ++i) {
    if (!(candidate_bandwidths[i] > 0.0)) {
      throw_config(kModule, "candidate bandwidths must be positive");
    }
    if (i > 0 && candidate_bandwidths[i] <= candidate_bandwidths[i - 1]) {
      throw_config(kModule, "candidate bandwidths must be sorted ascending");
    }
  }
}

Responsibilities classification_probs(const Dataset& test, const MsimFit& fit) {
  return msim_e_step(test, fit.alpha, fit.curves);
}

Responsibilities classification_probs(const Dataset& test, const MrsipFit& fit) {
  return mrsip_e_step(test, fit.alpha, fit.pi_curve, fit.params);
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw_config(kModule, "fold count must be in [2, n]");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
  for (Eigen::Index f = 0; f < folds; ++f) {
    const Eigen::Index lo = f * n / folds;
    const Eigen::Index hi = (f + 1) * n / folds;
    out[static_cast<std::size_t>(f)].assign(idx.begin() + lo, idx.begin() + hi);
  }
  return out;
}

double cv_score_with(const Dataset& ds, int folds, std::uint64_t seed, const FitPredictFn& fit) {
  const auto fold_sets = make_folds(ds.n(), folds, seed);
  double total = 0.0;
  std::vector<char> in_test(static_cast<std::size_t>(ds.n()));
  for (std::size_t f = 0; f < fold_sets.size(); ++f) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (const auto i : fold_sets[f]) in_test[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> train_rows;
    train_rows.reserve(static_cast<std::size_t>(ds.n()) - fold_sets[f].size());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (!in_test[static_cast<std::size_t>(i)]) train_rows.push_back(i);
    }
    const Dataset train = ds.rows(train_rows);
    const PredictFn predict = fit(train, derive_seed(seed, seed_stream::cv_repeat, f));
    for (const auto t : fold_sets[f]) {
      const double yhat = predict(ds.x().row(t), ds.y()[t]);
      const double err = ds.y()[t] - yhat;
      total += err * err;
    }
  }
  return total;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

}  // namespace

// posterior over components for one row, then the probability-weighted mean
double predict_row(const MsimFit& fit, const Eigen::RowVectorXd& x, double y) {
  const double z = x * fit.alpha.alpha();
  const Eigen::Index k = fit.curves.k();
  Eigen::VectorXd logw(k), mean(k);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double pj = interp_curve(fit.curves.pi.row(j).transpose(), fit.curves.grid, z);
    mean[j] = interp_curve(fit.curves.m.row(j).transpose(), fit.curves.grid, z);
    const double s2 = interp_curve(fit.curves.sigma2.row(j).transpose(), fit.curves.grid, z);
    const double r = y - mean[j];
    logw[j] = std::log(pj) - 0.5 * (kLog2Pi + std::log(s2) + r * r / s2);
    best = std::max(best, logw[j]);
  }
  if (!std::isfinite(best)) return mean.mean();
  double denom = 0.0, acc = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double w = std::exp(logw[j] - best);
    denom += w;
    acc += w * mean[j];
  }
  return acc / denom;
}

double predict_row(const MrsipFit& fit, const Eigen::RowVectorXd& x, double y) {
  const double z = x * fit.alpha.alpha();
  const Eigen::Index k = fit.params.k();
  Eigen::VectorXd logw(k), mean(k);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double pj = interp_curve(fit.pi_curve.pi.row(j).transpose(), fit.pi_curve.grid, z);
    mean[j] = fit.params.beta(j, 0) + fit.params.beta.row(j).tail(x.size()).dot(x);
    const double s2 = fit.params.sigma2[j];
    const double r = y - mean[j];
    logw[j] = std::log(pj) - 0.5 * (kLog2Pi + std::log(s2) + r * r / s2);
    best = std::max(best, logw[j]);
  }
  if (!std::isfinite(best)) return mean.mean();
  double denom = 0.0, acc = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double w = std::exp(logw[j] - best);
    denom += w;
    acc += w * mean[j];
  }
  return acc / denom;
}

namespace {

// Per-fold fits hold the index at the full-data SIR direction: the curves
// (and linear parameters) are re-estimated on every training fold, which is
// what drives the score's dependence on h.
FitPredictFn msim_cv_fit(const IndexVector& alpha_full, double h, const CvConfig& cfg,
                         const EmControl& ctrl) {
  return [alpha_full, h, cfg, ctrl](const Dataset& train, std::uint64_t seed) -> PredictFn {
    (void)seed;
    const KernelSpec kernel{cfg.kernel, h};
    const Eigen::VectorXd zhat = project(train, alpha_full);
    const Grid grid = make_grid(zhat, cfg.grid_n);
    const Responsibilities init = initial_responsibilities(train, zhat, cfg.k);
    MsimEmResult em = msim_em(train, alpha_full, init, kernel, grid, ctrl);
    auto fit = std::make_shared<MsimFit>(
        MsimFit{alpha_full, std::move(em.curves), 0.0, 0, em.converged, {}, em.underflow_rows});
    return [fit](const Eigen::RowVectorXd& x, double y) {
      return predict_row(*fit, x, y);
    };
  };
}

FitPredictFn mrsip_cv_fit(const IndexVector& alpha_full, double h, const CvConfig& cfg,
                          const EmControl& ctrl) {
  return [alpha_full, h, cfg, ctrl](const Dataset& train, std::uint64_t seed) -> PredictFn {
    const KernelSpec kernel{cfg.kernel, h};
    const MixLinRegFit mlr =
        fit_mixlinreg(train, cfg.k, derive_seed(seed, seed_stream::mixlinreg, 1));
    MrsipParams params{mlr.beta, mlr.sigma2};
    const Eigen::VectorXd zhat = project(train, alpha_full);
    const Grid grid = make_grid(zhat, cfg.grid_n);
    Eigen::MatrixXd pi0(cfg.k, grid.size());
    for (Eigen::Index j = 0; j < cfg.k; ++j) {
      pi0.row(j).setConstant(
          std::clamp(mlr.pi[j], ctrl.prop_floor, 1.0 - ctrl.prop_floor));
    }
    CurveSet pi_curve{pi0, Eigen::MatrixXd(cfg.k, 0), Eigen::MatrixXd(cfg.k, 0), grid};
    for (Eigen::Index t = 0; t < grid.size(); ++t) {
      pi_curve.pi.col(t) /= pi_curve.pi.col(t).sum();
    }

    // alternate proportion smoothing and parameter updates at the frozen index
    double prev = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < ctrl.max_inner_iters; ++iter) {
      for (int l = 0; l < 50; ++l) {
        const Responsibilities resp = mrsip_e_step(train, alpha_full, pi_curve, params);
        CurveSet next = mrsip_update_pi(train, alpha_full, resp, kernel, grid, ctrl);
        const double delta = (next.pi - pi_curve.pi).cwiseAbs().maxCoeff();
        pi_curve = std::move(next);
        if (delta < ctrl.em_tol) break;
      }
      const Responsibilities resp = mrsip_e_step(train, alpha_full, pi_curve, params);
      params = mrsip_update_beta_sigma(train, resp, ctrl);
      const double ll = mrsip_loglik(train, alpha_full, pi_curve, params);
      if (std::abs(ll - prev) < ctrl.inner_tol) break;
      prev = ll;
    }

    auto fit = std::make_shared<MrsipFit>(
        MrsipFit{alpha_full, std::move(params), std::move(pi_curve), prev, true, 0, {}, 0});
    return [fit](const Eigen::RowVectorXd& x, double y) {
      return predict_row(*fit, x, y);
    };
  };
}

}  // namespace

double cv_score(const Dataset& ds, double h, const CvConfig& cfg, const EmControl& ctrl,
                std::uint64_t seed) {
  cfg.validate();
  ctrl.validate();
  if (!(h > 0.0)) throw_config(kModule, "bandwidth must be positive");
  const IndexVector alpha_full = sir_direction(ds);
  const FitPredictFn fit = cfg.model == CvModel::msim ? msim_cv_fit(alpha_full, h, cfg, ctrl)
                                                      : mrsip_cv_fit(alpha_full, h, cfg, ctrl);
  try {
    return cv_score_with(ds, cfg.folds, seed, fit);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::degenerate_window) {
      return std::numeric_limits<double>::infinity();
    }
    throw;
  }
}

double rule_of_thumb_bandwidth(const Dataset& ds) {
  const IndexVector alpha = sir_direction(ds);
  const Eigen::VectorXd zhat = project(ds, alpha);
  const double mean = zhat.mean();
  const double sd =
      std::sqrt((zhat.array() - mean).square().sum() / static_cast<double>(zhat.size() - 1));
  return 1.06 * sd * std::pow(static_cast<double>(ds.n()), -0.2);
}

std::vector<double> default_bandwidth_grid(const Dataset& ds, int count) {
  if (count < 1) throw_config(kModule, "candidate count must be >= 1");
  const double rot = rule_of_thumb_bandwidth(ds);
  const double lo = 0.5 * rot;
  const double hi = 2.0 * rot;
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = rot;
    return grid;
  }
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(count - 1));
  double v = lo;
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = v;
    v *= ratio;
  }
  return grid;
}

BandwidthSelection select_bandwidth(const Dataset& ds, const CvConfig& cfg, const EmControl& ctrl,
                                    std::uint64_t seed) {
  cfg.validate();
  ctrl.validate();
  BandwidthSelection sel;
  sel.candidates =
      cfg.candidate_bandwidths.empty() ? default_bandwidth_grid(ds) : cfg.candidate_bandwidths;
  const std::size_t n_cand = sel.candidates.size();
  const std::size_t n_rep = static_cast<std::size_t>(cfg.repeats);

  // one task per (repeat, candidate); the partition depends only on the
  // repeat's seed, so all candidates within a repeat share folds
  std::vector<double> scores(n_cand * n_rep);
  parallel_for(n_cand * n_rep, cfg.workers, [&](std::size_t task) {
    const std::size_t rep = task / n_cand;
    const std::size_t c = task % n_cand;
    const std::uint64_t rep_seed = derive_seed(seed, seed_stream::cv_repeat, rep);
    scores[task] = cv_score(ds, sel.candidates[c], cfg, ctrl, rep_seed);
  });

  sel.mean_scores.assign(n_cand, 0.0);
  sel.win_counts.assign(n_cand, 0);
  sel.winners.reserve(n_rep);
  for (std::size_t rep = 0; rep < n_rep; ++rep) {
    std::size_t best = n_cand;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_cand; ++c) {
      const double sc = scores[rep * n_cand + c];
      sel.mean_scores[c] += sc / static_cast<double>(n_rep);
      if (sc < best_score) {
        best_score = sc;
        best = c;
      }
    }
    if (best == n_cand) {
      throw_config(kModule, "every candidate bandwidth was infeasible for a CV repeat");
    }
    sel.win_counts[best] += 1;
    sel.winners.push_back(sel.candidates[best]);
  }

  sel.h_hat = std::accumulate(sel.winners.begin(), sel.winners.end(), 0.0) /
              static_cast<double>(sel.winners.size());
  sel.undersmooth = sel.h_hat * std::pow(static_cast<double>(ds.n()), -2.0 / 15.0);
  sel.oversmooth = 1.5 * sel.h_hat;
  return sel;
}

}  // namespace simix
