#include "simix/mrsip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simix/linalg.hpp"
#include "simix/mixlinreg.hpp"
#include "simix/rng.hpp"
#include "simix/sir.hpp"
#include "smoothing_detail.hpp"

namespace simix {

namespace {

constexpr const char* kModule = "mrsip";
constexpr double kLog2Pi = 1.8378770664093453;

double sample_var(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

// log phi(y_i | s_i^T beta_j, sigma2_j) for all i, j
Eigen::MatrixXd log_densities(const Eigen::MatrixXd& s, const Eigen::VectorXd& y,
                              const MrsipParams& params) {
  const Eigen::Index n = s.rows();
  const Eigen::Index k = params.k();
  Eigen::MatrixXd ld(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s2 = params.sigma2[j];
    const double c = -0.5 * (kLog2Pi + std::log(s2));
    const Eigen::VectorXd r = y - s * params.beta.row(j).transpose();
    ld.col(j) = (c - 0.5 / s2 * r.array().square()).matrix();
  }
  return ld;
}

Eigen::MatrixXd interp_pi_at(const CurveSet& pi_curve, const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  const Eigen::Index k = pi_curve.k();
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.col(j) = interp_curve_many(pi_curve.pi.row(j).transpose(), pi_curve.grid, z);
  }
  return out;
}

Responsibilities posterior_from(const Eigen::MatrixXd& pi_at_z, const Eigen::MatrixXd& log_dens,
                                int* underflow_rows) {
  const Eigen::Index n = pi_at_z.rows();
  const Eigen::Index k = pi_at_z.cols();
  Eigen::MatrixXd p(n, k);
  Eigen::VectorXd logw(k);
  int underflow = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      logw[j] = std::log(pi_at_z(i, j)) + log_dens(i, j);
      best = std::max(best, logw[j]);
    }
    if (!std::isfinite(best)) {
      p.row(i).setConstant(1.0 / static_cast<double>(k));
      ++underflow;
      continue;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      logw[j] = std::exp(logw[j] - best);
      denom += logw[j];
    }
    for (Eigen::Index j = 0; j < k; ++j) p(i, j) = logw[j] / denom;
  }
  if (underflow_rows) *underflow_rows += underflow;
  return Responsibilities{std::move(p)};
}

double loglik_from(const Eigen::MatrixXd& pi_at_z, const Eigen::MatrixXd& log_dens) {
  const Eigen::Index n = pi_at_z.rows();
  const Eigen::Index k = pi_at_z.cols();
  double total = 0.0;
  Eigen::VectorXd logw(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      logw[j] = std::log(pi_at_z(i, j)) + log_dens(i, j);
      best = std::max(best, logw[j]);
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) acc += std::exp(logw[j] - best);
    total += best + std::log(acc);
  }
  return total;
}

CurveSet constant_pi_curve(Eigen::VectorXd pi, const Grid& grid, double prop_floor) {
  const Eigen::Index k = pi.size();
  for (Eigen::Index j = 0; j < k; ++j) {
    pi[j] = std::clamp(pi[j], prop_floor, 1.0 - prop_floor);
  }
  pi /= pi.sum();
  CurveSet curve{Eigen::MatrixXd(k, grid.size()), Eigen::MatrixXd(k, 0), Eigen::MatrixXd(k, 0),
                 grid};
  for (Eigen::Index j = 0; j < k; ++j) curve.pi.row(j).setConstant(pi[j]);
  return curve;
}

}  // namespace

void MrsipParams::validate() const {
  if (beta.rows() < 1 || beta.cols() < 2) {
    throw_invalid(kModule, "beta must be k x (p+1) with an intercept column");
  }
  if (sigma2.size() != beta.rows()) throw_invalid(kModule, "sigma2 length must equal k");
  if (!beta.allFinite() || !sigma2.allFinite() || (sigma2.array() <= 0.0).any()) {
    throw_invalid(kModule, "component parameters must be finite with positive variances");
  }
}

bool MrsipParams::has_coincident_components(double tol) const {
  for (Eigen::Index a = 0; a < k(); ++a) {
    for (Eigen::Index b = a + 1; b < k(); ++b) {
      const double d = (beta.row(a) - beta.row(b)).cwiseAbs().maxCoeff();
      if (d <= tol && std::abs(sigma2[a] - sigma2[b]) <= tol) return true;
    }
  }
  return false;
}

Responsibilities mrsip_e_step(const Dataset& ds, const IndexVector& alpha,
                              const CurveSet& pi_curve, const MrsipParams& params,
                              int* underflow_rows) {
  pi_curve.validate();
  params.validate();
  if (params.beta.cols() != ds.p() + 1) {
    throw_invalid(kModule, "beta dimension must be p+1 (intercept-augmented)");
  }
  const Eigen::VectorXd zhat = project(ds, alpha);
  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  int local = 0;
  Responsibilities resp =
      posterior_from(interp_pi_at(pi_curve, zhat), log_densities(s, ds.y(), params), &local);
  if (underflow_rows) *underflow_rows = local;
  return resp;
}

CurveSet mrsip_update_pi(const Dataset& ds, const IndexVector& alpha, const Responsibilities& resp,
                         const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl) {
  ctrl.validate();
  resp.validate();
  if (resp.n() != ds.n()) throw_invalid(kModule, "responsibilities do not match dataset rows");
  const Eigen::VectorXd zhat = project(ds, alpha);
  const detail::WeightTable table = detail::build_weight_table(zhat, kernel, grid, kModule);

  CurveSet curve{Eigen::MatrixXd(resp.k(), grid.size()), Eigen::MatrixXd(resp.k(), 0),
                 Eigen::MatrixXd(resp.k(), 0), grid};
  detail::smooth_proportions(resp, table, ctrl.prop_floor, curve.pi);
  curve.validate();
  return curve;
}

MrsipParams mrsip_update_beta_sigma(const Dataset& ds, const Responsibilities& resp,
                                    const EmControl& ctrl) {
  ctrl.validate();
  resp.validate();
  if (resp.n() != ds.n()) throw_invalid(kModule, "responsibilities do not match dataset rows");
  const Eigen::Index k = resp.k();
  const Eigen::Index q = ds.p() + 1;
  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  const double var_floor = ctrl.var_floor_frac * sample_var(ds.y());

  MrsipParams params{Eigen::MatrixXd(k, q), Eigen::VectorXd(k)};
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd w = resp.p.col(j);
    const double wsum = w.sum();
    if (wsum <= static_cast<double>(q)) {
      throw_rank(kModule, "component " + std::to_string(j) +
                              " has too little effective mass for the regression update");
    }
    params.beta.row(j) = weighted_least_squares(s, ds.y(), w, kModule).transpose();
    const Eigen::VectorXd r = ds.y() - s * params.beta.row(j).transpose();
    params.sigma2[j] = std::max(w.dot(r.cwiseProduct(r)) / wsum, var_floor);
  }
  return params;
}

double mrsip_loglik(const Dataset& ds, const IndexVector& alpha, const CurveSet& pi_curve,
                    const MrsipParams& params) {
  const Eigen::VectorXd zhat = project(ds, alpha);
  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  return loglik_from(interp_pi_at(pi_curve, zhat), log_densities(s, ds.y(), params));
}

IndexOptimResult maximize_index_mrsip(const Dataset& ds, const CurveSet& pi_curve,
                                      const MrsipParams& params, const IndexVector& alpha0) {
  // component densities do not depend on alpha; precompute them once
  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  const Eigen::MatrixXd ld = log_densities(s, ds.y(), params);
  auto objective = [&](const IndexVector& a) {
    return loglik_from(interp_pi_at(pi_curve, project(ds, a)), ld);
  };
  return maximize_on_sphere(objective, alpha0);
}

MrsipFit fit_mrsip(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                   const EmControl& ctrl, std::uint64_t seed,
                   const std::optional<MrsipInit>& init) {
  ctrl.validate();
  kernel.validate();
  if (k < 1) throw_invalid(kModule, "k must be >= 1");

  IndexVector alpha = init ? init->alpha : sir_direction(ds);
  MrsipParams params = [&] {
    if (init) {
      init->params.validate();
      return init->params;
    }
    const MixLinRegFit mlr =
        fit_mixlinreg(ds, k, derive_seed(seed, seed_stream::mixlinreg, 0));
    return MrsipParams{mlr.beta, mlr.sigma2};
  }();
  if (params.beta.cols() != ds.p() + 1 || params.k() != k) {
    throw_invalid(kModule, "initial parameters have the wrong shape");
  }

  Eigen::VectorXd zhat = project(ds, alpha);
  Grid grid = make_grid(zhat, grid_n);
  CurveSet pi_curve = [&] {
    if (init) {
      return constant_pi_curve(Eigen::VectorXd::Constant(k, 1.0 / k), grid, ctrl.prop_floor);
    }
    const MixLinRegFit mlr =
        fit_mixlinreg(ds, k, derive_seed(seed, seed_stream::mixlinreg, 0));
    return constant_pi_curve(mlr.pi, grid, ctrl.prop_floor);
  }();

  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  const double var_floor = ctrl.var_floor_frac * sample_var(ds.y());
  const double eff_guard = 2.0 * static_cast<double>(ds.p() + 1);

  int underflow = 0;
  double loglik = mrsip_loglik(ds, alpha, pi_curve, params);
  std::vector<double> trace{loglik};
  MrsipFit best{alpha, params, pi_curve, loglik, false, 0, trace, 0};
  double best_loglik = loglik;
  bool converged = false;
  int outer = 0;

  while (outer < ctrl.max_outer_iters && !converged) {
    ++outer;
    const IndexVector alpha_before = alpha;

    // proportion-curve EM at fixed linear parameters; the kernel table,
    // interpolation plan and component densities are all constant here
    {
      const detail::WeightTable table = detail::build_weight_table(zhat, kernel, grid, kModule);
      const detail::InterpPlan plan = detail::make_interp_plan(grid, zhat, kModule);
      const Eigen::MatrixXd ld = log_densities(s, ds.y(), params);
      const Eigen::Index n = ds.n();
      Eigen::MatrixXd pi_at_z(n, k);
      Eigen::MatrixXd next_pi(k, grid.size());
      for (int l = 0; l < ctrl.max_em_iters; ++l) {
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < k; ++j) {
            pi_at_z(i, j) = detail::interp_at(pi_curve.pi, j, plan, static_cast<std::size_t>(i));
          }
        }
        const Responsibilities resp = posterior_from(pi_at_z, ld, &underflow);
        detail::smooth_proportions(resp, table, ctrl.prop_floor, next_pi);
        const double delta = (next_pi - pi_curve.pi).cwiseAbs().maxCoeff();
        pi_curve.pi = next_pi;
        if (delta < ctrl.em_tol) break;
      }
    }

    // inner loop: parameter update then index update, at fixed proportions
    double prev_inner = -std::numeric_limits<double>::infinity();
    for (int inner = 0; inner < ctrl.max_inner_iters; ++inner) {
      const Responsibilities resp = mrsip_e_step(ds, alpha, pi_curve, params, &underflow);
      // components starved of mass keep their previous parameters this round
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd w = resp.p.col(j);
        const double wsum = w.sum();
        if (wsum < eff_guard) continue;
        try {
          params.beta.row(j) = weighted_least_squares(s, ds.y(), w, kModule).transpose();
        } catch (const Error&) {
          continue;  // keep the previous slope for this round
        }
        const Eigen::VectorXd r = ds.y() - s * params.beta.row(j).transpose();
        params.sigma2[j] = std::max(w.dot(r.cwiseProduct(r)) / wsum, var_floor);
      }

      const IndexOptimResult opt = maximize_index_mrsip(ds, pi_curve, params, alpha);
      alpha = opt.alpha;
      const double inner_ll = mrsip_loglik(ds, alpha, pi_curve, params);
      if (std::abs(inner_ll - prev_inner) < ctrl.inner_tol) break;
      prev_inner = inner_ll;
    }

    // grid refresh for the moved index; curves carried over by interpolation
    zhat = project(ds, alpha);
    Grid new_grid = make_grid(zhat, grid_n);
    pi_curve = reinterpolate(pi_curve, new_grid);
    grid = std::move(new_grid);

    loglik = mrsip_loglik(ds, alpha, pi_curve, params);
    if (loglik < best_loglik - ctrl.ascent_slack) {
      alpha = best.alpha;
      params = best.params;
      pi_curve = best.pi_curve;
      loglik = best.loglik;
      break;
    }
    trace.push_back(loglik);
    if (loglik > best_loglik) {
      best = MrsipFit{alpha, params, pi_curve, loglik, false, outer, trace, underflow};
      best_loglik = loglik;
    }
    if ((alpha.alpha() - alpha_before.alpha()).norm() < ctrl.outer_tol) converged = true;
  }

  return MrsipFit{std::move(best.alpha), std::move(best.params), std::move(best.pi_curve),
                  best.loglik,           converged,               outer,
                  std::move(trace),      underflow};
}

}  // namespace simix
