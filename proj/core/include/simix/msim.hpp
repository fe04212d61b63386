#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "simix/dataset.hpp"
#include "simix/index_optimizer.hpp"
#include "simix/kernel.hpp"

namespace simix {

struct EmControl {
  int max_em_iters = 500;
  double em_tol = 1e-6;        // max abs change of any curve value
  int max_outer_iters = 50;
  double outer_tol = 1e-6;     // ||delta alpha|| between outer iterates
  double var_floor_frac = 1e-8;  // times var(y)
  double prop_floor = 1e-6;
  int n_restarts = 1;          // EM initializations per fit
  int max_inner_iters = 100;   // MRSIP step-3 loop
  double inner_tol = 1e-8;     // MRSIP step-3 loop, loglik change
  double ascent_slack = 1e-8;  // max tolerated loglik decrease between accepted iterates

  void validate() const;
};

struct MsimFit {
  IndexVector alpha;
  CurveSet curves;
  double loglik = 0.0;  // value of the full-data mixture log-likelihood at the fit
  int n_outer_iters = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  // accepted outer iterates
  int underflow_rows = 0;            // E-step rows rescued by the uniform fallback
};

struct MsimEmResult {
  CurveSet curves;
  Responsibilities resp;
  int n_iters = 0;
  bool converged = false;
  int underflow_rows = 0;
};

// Posterior component probabilities given curves evaluated at the projected
// index (linear interpolation off the grid). Rows that underflow across all
// components fall back to a uniform 1/k row; the count is reported through
// the optional out-parameter.
Responsibilities msim_e_step(const Dataset& ds, const IndexVector& alpha,
                             const CurveSet& curves, int* underflow_rows = nullptr);

// Kernel-weighted curve updates at every grid point: proportions from the
// plain smoother, means from the responsibility-weighted smoother, variances
// from the residuals around the freshly updated means. Proportions are
// clamped to [prop_floor, 1-prop_floor] and renormalized; variances are
// floored at var_floor_frac * var(y).
CurveSet msim_m_step(const Dataset& ds, const IndexVector& alpha, const Responsibilities& resp,
                     const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl = {});

// Called after each EM iteration with (iteration, curves, responsibilities).
using EmObserver = std::function<void(int, const CurveSet&, const Responsibilities&)>;

// Modified EM: all curves are estimated simultaneously at the shared grid so
// component labels stay aligned across locations. Stops when no curve value
// moves by more than em_tol between successive M-steps.
MsimEmResult msim_em(const Dataset& ds, const IndexVector& alpha, const Responsibilities& init_resp,
                     const KernelSpec& kernel, const Grid& grid, const EmControl& ctrl = {},
                     const EmObserver& observer = nullptr);

// Full-data mixture log-likelihood with curves interpolated at alpha^T x.
double msim_loglik(const Dataset& ds, const IndexVector& alpha, const CurveSet& curves);

// Index update: maximizes the plug-in log-likelihood over the unit sphere,
// derivative-free, starting from alpha0. Never returns a direction worse
// than alpha0.
IndexOptimResult maximize_index_msim(const Dataset& ds, const CurveSet& curves,
                                     const IndexVector& alpha0, const EmControl& ctrl = {});

// Deterministic EM initialization: observations are split into k groups by
// response quantiles inside a coarse binning of the projected index, giving
// hard responsibilities for the first M-step.
Responsibilities initial_responsibilities(const Dataset& ds, const Eigen::VectorXd& zhat, int k);

// One-step estimator: SIR direction, then a single modified-EM pass. The
// index is not refined.
MsimFit fit_msim_os(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                    const EmControl& ctrl, std::uint64_t seed);

// Fully iterative backfitting: alternates curve estimation and index
// maximization until the index settles, refreshing the grid to span the new
// index range after every direction update. Starts from SIR unless an
// explicit direction is provided.
MsimFit fit_msim_fib(const Dataset& ds, int k, const KernelSpec& kernel, Eigen::Index grid_n,
                     const EmControl& ctrl, std::uint64_t seed,
                     const std::optional<IndexVector>& alpha_init = std::nullopt);

}  // namespace simix
