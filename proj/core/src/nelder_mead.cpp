#include "simix/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "simix/errors.hpp"

namespace simix {

namespace {

double guarded_eval(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x, int& evals) {
  ++evals;
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw_invalid("nelder-mead", "dimension must be >= 1");

  NelderMeadResult res;
  res.evals = 0;

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> vals(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1][i] += opts.initial_step;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = guarded_eval(f, pts[i], res.evals);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  };

  while (res.evals < opts.max_evals) {
    sort_simplex();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    // convergence: value spread and simplex size
    const double fspread = vals[worst] - vals[best];
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      diam = std::max(diam, (pts[i] - pts[best]).norm());
    }
    if (std::isfinite(vals[best]) &&
        (fspread <= opts.f_tol * (1.0 + std::abs(vals[best])) || diam <= opts.x_tol)) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double f_r = guarded_eval(f, reflected, res.evals);

    if (f_r < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double f_e = guarded_eval(f, expanded, res.evals);
      if (f_e < f_r) {
        pts[worst] = expanded;
        vals[worst] = f_e;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_r;
      }
    } else if (f_r < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = f_r;
    } else {
      const bool outside = f_r < vals[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double f_c = guarded_eval(f, contracted, res.evals);
      if (f_c < std::min(f_r, vals[worst])) {
        pts[worst] = contracted;
        vals[worst] = f_c;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          vals[i] = guarded_eval(f, pts[i], res.evals);
        }
      }
    }
  }

  sort_simplex();
  res.x = pts[order.front()];
  res.f = vals[order.front()];
  return res;
}

}  // namespace simix
