#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "simix/errors.hpp"

namespace simix {

// Immutable design matrix plus response. All estimators share Dataset views;
// nothing here mutates after construction, so instances are safe to read from
// concurrent replication workers.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y,
          std::vector<std::string> column_names = {});

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  Eigen::Index n() const noexcept { return x_.rows(); }
  Eigen::Index p() const noexcept { return x_.cols(); }

  // Row subset (copy); used by CV folds and train/test splits.
  Dataset rows(const std::vector<Eigen::Index>& idx) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> column_names_;
};

// Unit-norm index direction with the first nonzero entry positive. Construct
// through normalize_index(); the constructor only validates.
class IndexVector {
 public:
  explicit IndexVector(Eigen::VectorXd alpha);

  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  Eigen::Index dim() const noexcept { return alpha_.size(); }
  double operator[](Eigen::Index i) const { return alpha_[i]; }

 private:
  Eigen::VectorXd alpha_;
};

// Strictly increasing evaluation points for the nonparametric curves.
class Grid {
 public:
  explicit Grid(Eigen::VectorXd points);

  const Eigen::VectorXd& points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return points_.size(); }
  double front() const { return points_[0]; }
  double back() const { return points_[points_.size() - 1]; }

 private:
  Eigen::VectorXd points_;
};

// Grid-sampled component curves. MSIM carries all three families; MRSIP only
// the mixing proportions (m/sigma2 left empty, k x 0).
struct CurveSet {
  Eigen::MatrixXd pi;      // k x N
  Eigen::MatrixXd m;       // k x N or k x 0
  Eigen::MatrixXd sigma2;  // k x N or k x 0
  Grid grid;

  Eigen::Index k() const noexcept { return pi.rows(); }
  bool has_mean_curves() const noexcept { return m.cols() > 0; }

  // Enforces: proportions in (0,1] summing to one at every grid point,
  // positive variances where present.
  void validate(double sum_tol = 1e-10) const;
};

// Posterior component probabilities, one row per observation.
struct Responsibilities {
  Eigen::MatrixXd p;  // n x k

  Eigen::Index n() const noexcept { return p.rows(); }
  Eigen::Index k() const noexcept { return p.cols(); }

  void validate(double row_tol = 1e-10) const;
};

// Direction of v with unit norm and the first nonzero entry positive.
// Idempotent: a vector already satisfying both conditions is returned as-is.
IndexVector normalize_index(const Eigen::VectorXd& v);

// z_i = alpha^T x_i. When has_intercept_column is set, the first column of x
// is an all-ones intercept block excluded from the index, so alpha must have
// dimension p-1.
Eigen::VectorXd project(const Dataset& ds, const IndexVector& a,
                        bool has_intercept_column = false);

// Piecewise-linear interpolation with clamped extrapolation beyond the grid.
double interp_curve(const Eigen::VectorXd& values_at_grid, const Grid& grid, double z);

// Vectorized interp_curve over a whole row of curve values.
Eigen::VectorXd interp_curve_many(const Eigen::VectorXd& values_at_grid, const Grid& grid,
                                  const Eigen::VectorXd& z);

// N equally spaced points spanning [min(z), max(z)].
Grid make_grid(const Eigen::VectorXd& z, Eigen::Index n_points);

// Carry a curve set over to a new grid by interpolation (clamped at the old
// ends); warm start for EM after the index direction moved.
CurveSet reinterpolate(const CurveSet& curves, const Grid& new_grid);

}  // namespace simix
