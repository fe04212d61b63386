#include "simix/msim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "simix/rng.hpp"
#include "simix/sir.hpp"
#include "smoothing_detail.hpp"

namespace simix {

namespace {

constexpr const char* kModule = "msim";
constexpr double kLog2Pi = 1.8378770664093453;

double sample_var(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

}  // namespace

namespace detail {

Responsibilities e_step_impl(const Eigen::VectorXd& y, const CurveSet& curves,
                             const InterpPlan& plan, int* underflow_rows) {
  const Eigen::Index n = y.size();
  const Eigen::Index k = curves.k();
  Eigen::MatrixXd p(n, k);
  Eigen::VectorXd logw(k);
  int underflow = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double pij = interp_at(curves.pi, j, plan, ui);
      const double mj = interp_at(curves.m, j, plan, ui);
      const double s2 = interp_at(curves.sigma2, j, plan, ui);
      const double r = y[i] - mj;
      logw[j] = std::log(pij) - 0.5 * (kLog2Pi + std::log(s2) + r * r / s2);
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

CurveSet m_step_impl(const Eigen::VectorXd& y, const Responsibilities& resp,
                     const WeightTable& table, const Grid& grid, double var_floor,
                     double prop_floor) {
  const Eigen::Index k = resp.k();
  const Eigen::Index ng = grid.size();
  CurveSet curves{Eigen::MatrixXd(k, ng), Eigen::MatrixXd(k, ng), Eigen::MatrixXd(k, ng), grid};
  Eigen::VectorXd s_w(k), s_wy(k);
  for (Eigen::Index t = 0; t < ng; ++t) {
    const auto& window = table.entries[static_cast<std::size_t>(t)];
    const double total = table.total[static_cast<std::size_t>(t)];
    s_w.setZero();
    s_wy.setZero();
    for (const auto& [i, w] : window) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double pw = resp.p(i, j) * w;
        s_w[j] += pw;
        s_wy[j] += pw * y[i];
      }
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!(s_w[j] > 0.0)) {
        throw_degenerate(kModule, "component " + std::to_string(j) +
                                      " has no kernel mass at grid point " + std::to_string(t));
      }
      curves.m(j, t) = s_wy[j] / s_w[j];
    }
    // variances use the means just updated at this grid point
    for (Eigen::Index j = 0; j < k; ++j) {
      double s_wr2 = 0.0;
      for (const auto& [i, w] : window) {
        const double r = y[i] - curves.m(j, t);
        s_wr2 += resp.p(i, j) * w * r * r;
      }
      curves.sigma2(j, t) = std::max(s_wr2 / s_w[j], var_floor);
    }
    double clamped_sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double raw = s_w[j] / total;
      const double clamped = std::clamp(raw, prop_floor, 1.0 - prop_floor);
      curves.pi(j, t) = clamped;
      clamped_sum += clamped;
    }
    curves.pi.col(t) /= clamped_sum;
  }
  return curves;
}

double loglik_impl(const Eigen::VectorXd& y, const CurveSet& curves, const InterpPlan& plan) {
  const Eigen::Index n = y.size();
  const Eigen::Index k = curves.k();
  double total = 0.0;
  Eigen::VectorXd logw(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double pij = interp_at(curves.pi, j, plan, ui);
      const double mj = interp_at(curves.m, j, plan, ui);
      const double s2 = interp_at(curves.sigma2, j, plan, ui);
      const double r = y[i] - mj;
      logw[j] = std::log(pij) - 0.5 * (kLog2Pi + std::log(s2) + r * r / s2);
      best = std::max(best, logw[j]);
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) acc += std::exp(logw[j] - best);
    total += best + std::log(acc);
  }
  return total;
}

}  // namespace detail

void EmControl::validate() const {
  if (max_em_iters < 1 || max_outer_iters < 1 || max_inner_iters < 1 || n_restarts < 1) {
    throw_invalid(kModule, "iteration counts must be positive");
  }
  if (!(em_tol > 0.0) || !(outer_tol > 0.0) || !(inner_tol > 0.0) || !(ascent_slack > 0.0)) {
    throw_invalid(kModule, "tolerances must be positive");
  }
  if (!(var_floor_frac > 0.0) || !(prop_floor > 0.0) || prop_floor >= 0.5) {
    throw_invalid(kModule, "floors must be positive (and prop_floor < 0.5)");
  }
}

Responsibilities msim_e_step(const Dataset& ds, const IndexVector& alpha, const CurveSet& curves,
                             int* underflow_rows) {
  curves.validate();
  if (!curves.has_mean_curves() || curves.sigma2.cols() == 0) {
    throw_invalid(kModule, "MSIM E-step needs mean and variance curves");
  }
  const Eigen::VectorXd zhat = project(ds, alpha);
  const detail::InterpPlan plan = detail::make_interp_plan(curves.grid, zhat, kModule);
  int local = 0;
  Responsibilities resp = detail::e_step_impl(ds.y(), curves, plan, &local);
  if (underflow_rows) *underflow_rows = local;
  return resp;
}

CurveSet msim_m_step(const Dataset& ds, const IndexVector& alpha, const Responsibilities& resp,
                     const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl) {
  ctrl.validate();
  resp.validate();
  if (resp.n() != ds.n()) throw_invalid(kModule, "responsibilities do not match dataset rows");
  const Eigen::VectorXd zhat = project(ds, alpha);
  const detail::WeightTable table = detail::build_weight_table(zhat, kernel, grid, kModule);
  const double var_floor = ctrl.var_floor_frac * sample_var(ds.y());
  CurveSet curves = detail::m_step_impl(ds.y(), resp, table, grid, var_floor, ctrl.prop_floor);
  curves.validate();
  return curves;
}

MsimEmResult msim_em(const Dataset& ds, const IndexVector& alpha, const Responsibilities& init_resp,
                     const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl,
                     const EmObserver& observer) {
  ctrl.validate();
  init_resp.validate();
  if (init_resp.n() != ds.n()) throw_invalid(kModule, "responsibilities do not match dataset rows");

  const Eigen::VectorXd zhat = project(ds, alpha);
  const detail::WeightTable table = detail::build_weight_table(zhat, kernel, grid, kModule);
  const detail::InterpPlan plan = detail::make_interp_plan(grid, zhat, kModule);
  const double var_floor = ctrl.var_floor_frac * sample_var(ds.y());

  MsimEmResult out{CurveSet{Eigen::MatrixXd(), Eigen::MatrixXd(), Eigen::MatrixXd(), grid},
                   init_resp, 0, false, 0};
  CurveSet curves{Eigen::MatrixXd(), Eigen::MatrixXd(), Eigen::MatrixXd(), grid};
  bool have_curves = false;
  for (int iter = 1; iter <= ctrl.max_em_iters; ++iter) {
    CurveSet next =
        detail::m_step_impl(ds.y(), out.resp, table, grid, var_floor, ctrl.prop_floor);
    if (have_curves) {
      const double delta = std::max({(next.pi - curves.pi).cwiseAbs().maxCoeff(),
                                     (next.m - curves.m).cwiseAbs().maxCoeff(),
                                     (next.sigma2 - curves.sigma2).cwiseAbs().maxCoeff()});
      if (delta < ctrl.em_tol) {
        curves = std::move(next);
        out.resp = detail::e_step_impl(ds.y(), curves, plan, &out.underflow_rows);
        if (observer) observer(iter, curves, out.resp);
        out.converged = true;
        out.n_iters = iter - 1;
        break;
      }
    }
    curves = std::move(next);
    have_curves = true;
    out.resp = detail::e_step_impl(ds.y(), curves, plan, &out.underflow_rows);
    if (observer) observer(iter, curves, out.resp);
    out.n_iters = iter;
  }
  out.curves = std::move(curves);
  out.curves.validate();
  return out;
}

double msim_loglik(const Dataset& ds, const IndexVector& alpha, const CurveSet& curves) {
  const Eigen::VectorXd zhat = project(ds, alpha);
  const detail::InterpPlan plan = detail::make_interp_plan(curves.grid, zhat, kModule);
  return detail::loglik_impl(ds.y(), curves, plan);
}

IndexOptimResult maximize_index_msim(const Dataset& ds, const CurveSet& curves,
                                     const IndexVector& alpha0, const EmControl& ctrl) {
  ctrl.validate();
  auto objective = [&](const IndexVector& a) { return msim_loglik(ds, a, curves); };
  return maximize_on_sphere(objective, alpha0);
}

Responsibilities initial_responsibilities(const Dataset& ds, const Eigen::VectorXd& zhat, int k) {
  const Eigen::Index n = ds.n();
  if (k < 1) throw_invalid(kModule, "k must be >= 1");
  if (n < k) throw_invalid(kModule, "need at least k observations");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, k);
  if (k == 1) {
    p.setOnes();
    return Responsibilities{std::move(p)};
  }

  std::vector<Eigen::Index> by_z(static_cast<std::size_t>(n));
  std::iota(by_z.begin(), by_z.end(), Eigen::Index{0});
  std::stable_sort(by_z.begin(), by_z.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return zhat[a] < zhat[b]; });

  // coarse index bins, each wide enough to split k ways
  const Eigen::Index n_bins = std::max<Eigen::Index>(1, std::min<Eigen::Index>(10, n / (2 * k)));
  for (Eigen::Index b = 0; b < n_bins; ++b) {
    const Eigen::Index lo = b * n / n_bins;
    const Eigen::Index hi = (b + 1) * n / n_bins;
    std::vector<Eigen::Index> rows(by_z.begin() + lo, by_z.begin() + hi);
    std::stable_sort(rows.begin(), rows.end(),
                     [&](Eigen::Index a, Eigen::Index c) { return ds.y()[a] < ds.y()[c]; });
    const Eigen::Index nb = hi - lo;
    for (Eigen::Index r = 0; r < nb; ++r) {
      const Eigen::Index label = std::min<Eigen::Index>(r * k / std::max<Eigen::Index>(nb, 1), k - 1);
      p(rows[static_cast<std::size_t>(r)], label) = 1.0;
    }
  }
  return Responsibilities{std::move(p)};
}

namespace {

Responsibilities perturb_labels(const Responsibilities& resp, Rng& rng, double flip_prob) {
  const Eigen::Index n = resp.n();
  const Eigen::Index k = resp.k();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index label;
    resp.p.row(i).maxCoeff(&label);
    if (rng.uniform01() < flip_prob) {
      label = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
    }
    p(i, label) = 1.0;
  }
  return Responsibilities{std::move(p)};
}

struct EmStart {
  MsimEmResult em;
  double loglik = -std::numeric_limits<double>::infinity();
};

// Best-of-restarts EM pass at a fixed direction.
EmStart run_em_restarts(const Dataset& ds, int k, const IndexVector& alpha,
                        const KernelSpec& kernel, Eigen::Index grid_n, const EmControl& ctrl,
                        std::uint64_t seed) {
  const Eigen::VectorXd zhat = project(ds, alpha);
  const Grid grid = make_grid(zhat, grid_n);
  const Responsibilities base = initial_responsibilities(ds, zhat, k);

  EmStart best;
  bool have = false;
  for (int r = 0; r < ctrl.n_restarts; ++r) {
    Responsibilities init = base;
    if (r > 0) {
      Rng rng(derive_seed(seed, seed_stream::restart, static_cast<std::uint64_t>(r)));
      init = perturb_labels(base, rng, 0.3);
    }
    MsimEmResult em = msim_em(ds, alpha, init, kernel, grid, ctrl);
    const double ll = msim_loglik(ds, alpha, em.curves);
    if (!have || ll > best.loglik) {
      best = EmStart{std::move(em), ll};
      have = true;
    }
  }
  return best;
}

}  // namespace

MsimFit fit_msim_os(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                    const EmControl& ctrl, std::uint64_t seed) {
  ctrl.validate();
  const IndexVector alpha = sir_direction(ds);
  EmStart start = run_em_restarts(ds, k, alpha, kernel, grid_n, ctrl, seed);
  MsimFit fit{alpha,        std::move(start.em.curves),       start.loglik, 0,
              start.em.converged, std::vector<double>{start.loglik}, start.em.underflow_rows};
  return fit;
}

MsimFit fit_msim_fib(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                     const EmControl& ctrl, std::uint64_t seed,
                     const std::optional<IndexVector>& alpha_init) {
  ctrl.validate();
  IndexVector alpha = alpha_init ? *alpha_init : sir_direction(ds);

  EmStart start = run_em_restarts(ds, k, alpha, kernel, grid_n, ctrl, seed);
  CurveSet curves = std::move(start.em.curves);
  int underflow = start.em.underflow_rows;
  double loglik = start.loglik;

  MsimFit best{alpha, curves, loglik, 0, false, {loglik}, underflow};
  double best_loglik = loglik;

  bool converged = false;
  int outer = 0;
  std::vector<double> trace{loglik};
  while (outer < ctrl.max_outer_iters && !converged) {
    ++outer;
    const IndexOptimResult opt = maximize_index_msim(ds, curves, alpha, ctrl);
    const double step = (opt.alpha.alpha() - alpha.alpha()).norm();
    alpha = opt.alpha;

    const Eigen::VectorXd zhat = project(ds, alpha);
    const Grid grid = make_grid(zhat, grid_n);
    curves = reinterpolate(curves, grid);
    Responsibilities resp = msim_e_step(ds, alpha, curves, nullptr);
    MsimEmResult em = msim_em(ds, alpha, resp, kernel, grid, ctrl);
    curves = std::move(em.curves);
    underflow += em.underflow_rows;
    loglik = msim_loglik(ds, alpha, curves);

    if (loglik < best_loglik - ctrl.ascent_slack) {
      // reject the iterate; fall back to the best accepted state
      alpha = best.alpha;
      curves = best.curves;
      loglik = best.loglik;
      break;
    }
    trace.push_back(loglik);
    if (loglik > best_loglik) {
      best = MsimFit{alpha, curves, loglik, outer, false, trace, underflow};
      best_loglik = loglik;
    }
    if (step < ctrl.outer_tol) converged = true;
  }

  MsimFit fit{std::move(best.alpha), std::move(best.curves), best.loglik, outer,
              converged,             std::move(trace),       underflow};
  return fit;
}

}  // namespace simix
