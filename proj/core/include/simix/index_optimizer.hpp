#pragma once

#include <Eigen/Core>
#include <functional>

#include "simix/dataset.hpp"

namespace simix {

struct IndexOptimOptions {
  // Two simplex passes: a coarse one from the start point, then a polish
  // pass from the coarse optimum with a smaller initial step.
  double coarse_step = 0.05;
  double polish_step = 0.01;
  int max_evals_per_pass = 600;
  bool polish = true;
};

struct IndexOptimResult {
  IndexVector alpha;
  double value = 0.0;        // objective at alpha
  bool improved = false;     // strictly better than the start point
  bool optimizer_ok = true;  // false when the search never found a finite value
};

// Maximizes a log-likelihood over the unit sphere with the first-nonzero-
// positive sign convention. The search runs in a local chart around alpha0:
// p-1 free coordinates xi parameterize alpha(xi) = normalize_index(alpha0 +
// B xi) with B an orthonormal basis of the orthogonal complement of alpha0.
// Guarantee: objective(result) >= objective(alpha0) - 1e-10; when no ascent
// is found the start point is returned unchanged.
IndexOptimResult maximize_on_sphere(const std::function<double(const IndexVector&)>& loglik,
                                    const IndexVector& alpha0,
                                    const IndexOptimOptions& opts = {});

// Orthonormal basis of the orthogonal complement of a unit vector (p x (p-1)),
// columns 2..p of the Householder reflector mapping e1 to the vector.
Eigen::MatrixXd orthogonal_complement_basis(const Eigen::VectorXd& unit);

}  // namespace simix
