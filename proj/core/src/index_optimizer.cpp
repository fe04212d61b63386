#include "simix/index_optimizer.hpp"

#include <cmath>
#include <limits>

#include "simix/nelder_mead.hpp"

namespace simix {

Eigen::MatrixXd orthogonal_complement_basis(const Eigen::VectorXd& unit) {
  const Eigen::Index p = unit.size();
  // Householder H = I - 2 u u^T with H e1 = s*unit; its trailing columns
  // span the complement of unit.
  Eigen::VectorXd w = unit;
  const double s = w[0] >= 0.0 ? 1.0 : -1.0;
  w[0] += s;  // w = unit + sign(unit_0) e1
  const double wn = w.norm();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(p, p);
  if (wn > 0.0) {
    w /= wn;
    h -= 2.0 * w * w.transpose();
  }
  return h.rightCols(p - 1);
}

IndexOptimResult maximize_on_sphere(const std::function<double(const IndexVector&)>& loglik,
                                    const IndexVector& alpha0,
                                    const IndexOptimOptions& opts) {
  const Eigen::Index p = alpha0.dim();
  if (p == 1) {
    // the sphere is {+1,-1} and the sign convention picks +1
    IndexVector one(Eigen::VectorXd::Ones(1));
    return {one, loglik(one), false, true};
  }

  const double f0 = loglik(alpha0);
  const Eigen::MatrixXd basis = orthogonal_complement_basis(alpha0.alpha());

  auto chart = [&](const Eigen::VectorXd& xi) {
    return normalize_index(alpha0.alpha() + basis * xi);
  };
  auto objective = [&](const Eigen::VectorXd& xi) -> double {
    const double v = loglik(chart(xi));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  NelderMeadOptions nm;
  nm.initial_step = opts.coarse_step;
  nm.max_evals = opts.max_evals_per_pass;
  NelderMeadResult r = nelder_mead(objective, Eigen::VectorXd::Zero(p - 1), nm);
  if (opts.polish) {
    nm.initial_step = opts.polish_step;
    const NelderMeadResult r2 = nelder_mead(objective, r.x, nm);
    if (r2.f < r.f) r = r2;
  }

  if (!std::isfinite(r.f)) {
    return {alpha0, f0, false, false};
  }
  const IndexVector cand = chart(r.x);
  const double f_cand = loglik(cand);
  if (f_cand > f0) {
    return {cand, f_cand, true, true};
  }
  return {alpha0, f0, false, true};
}

}  // namespace simix
