#include "simix/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace simix {

namespace {
constexpr const char* kModule = "core-model";
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> column_names)
    : x_(std::move(x)), y_(std::move(y)), column_names_(std::move(column_names)) {
  if (x_.rows() < 2) throw_invalid(kModule, "dataset needs n >= 2 rows");
  if (x_.cols() < 1) throw_invalid(kModule, "dataset needs p >= 1 covariates");
  if (y_.size() != x_.rows()) {
    throw_invalid(kModule, "x has " + std::to_string(x_.rows()) + " rows but y has " +
                               std::to_string(y_.size()));
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw_invalid(kModule, "dataset contains non-finite entries");
  }
  if (!column_names_.empty() &&
      column_names_.size() != static_cast<std::size_t>(x_.cols())) {
    throw_invalid(kModule, "column_names length does not match p");
  }
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(idx.size()), x_.cols());
  Eigen::VectorXd ys(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= x_.rows()) throw_invalid(kModule, "row index out of range");
    xs.row(static_cast<Eigen::Index>(i)) = x_.row(idx[i]);
    ys[static_cast<Eigen::Index>(i)] = y_[idx[i]];
  }
  return Dataset(std::move(xs), std::move(ys), column_names_);
}

IndexVector::IndexVector(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 1) throw_invalid(kModule, "index vector must be non-empty");
  if (!alpha_.allFinite()) throw_invalid(kModule, "index vector has non-finite entries");
  const double nrm = alpha_.norm();
  if (std::abs(nrm - 1.0) > 1e-12) {
    throw_invalid(kModule, "index vector norm differs from 1 by more than 1e-12");
  }
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (alpha_[i] != 0.0) {
      if (alpha_[i] < 0.0) {
        throw_invalid(kModule, "first nonzero entry of the index must be positive");
      }
      break;
    }
  }
}

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  if (points_.size() < 2) throw_invalid(kModule, "grid needs at least 2 points");
  if (!points_.allFinite()) throw_invalid(kModule, "grid has non-finite points");
  for (Eigen::Index i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw_invalid(kModule, "grid points must be strictly increasing");
    }
  }
}

void CurveSet::validate(double sum_tol) const {
  const Eigen::Index kk = pi.rows();
  const Eigen::Index nn = pi.cols();
  if (kk < 1) throw_invalid(kModule, "curve set needs k >= 1 components");
  if (nn != grid.size()) throw_invalid(kModule, "pi columns do not match grid size");
  if (!pi.allFinite()) throw_invalid(kModule, "pi curves contain non-finite values");
  for (Eigen::Index t = 0; t < nn; ++t) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < kk; ++j) {
      const double v = pi(j, t);
      // sum-to-one forces pi == 1 when k == 1, so the upper bound is closed
      if (v <= 0.0 || v > 1.0 || (kk > 1 && v >= 1.0)) {
        throw_invalid(kModule, "mixing proportion outside (0,1) at a grid point");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > sum_tol) {
      throw_invalid(kModule, "mixing proportions do not sum to 1 at a grid point");
    }
  }
  if (m.cols() > 0) {
    if (m.rows() != kk || m.cols() != nn) throw_invalid(kModule, "mean curve shape mismatch");
    if (!m.allFinite()) throw_invalid(kModule, "mean curves contain non-finite values");
  }
  if (sigma2.cols() > 0) {
    if (sigma2.rows() != kk || sigma2.cols() != nn) {
      throw_invalid(kModule, "variance curve shape mismatch");
    }
    if (!sigma2.allFinite() || (sigma2.array() <= 0.0).any()) {
      throw_invalid(kModule, "variance curves must be positive and finite");
    }
  }
}

void Responsibilities::validate(double row_tol) const {
  if (p.rows() < 1 || p.cols() < 1) throw_invalid(kModule, "responsibilities are empty");
  if (!p.allFinite()) throw_invalid(kModule, "responsibilities contain non-finite values");
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v < 0.0 || v > 1.0) throw_invalid(kModule, "responsibility outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > row_tol) {
      throw_invalid(kModule, "responsibility row does not sum to 1");
    }
  }
}

IndexVector normalize_index(const Eigen::VectorXd& v) {
  if (v.size() < 1) throw_invalid(kModule, "cannot normalize an empty vector");
  if (!v.allFinite()) throw_invalid(kModule, "cannot normalize a non-finite vector");
  const double nrm = v.norm();
  if (nrm == 0.0) throw_invalid(kModule, "cannot normalize the zero vector");

  double first_nonzero = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      first_nonzero = v[i];
      break;
    }
  }
  // already unit norm with the right sign: return unchanged, which makes the
  // function exactly idempotent
  if (std::abs(nrm - 1.0) <= 1e-12 && first_nonzero > 0.0) {
    return IndexVector(v);
  }
  const double sign = first_nonzero < 0.0 ? -1.0 : 1.0;
  return IndexVector(Eigen::VectorXd(sign / nrm * v));
}

Eigen::VectorXd project(const Dataset& ds, const IndexVector& a, bool has_intercept_column) {
  if (has_intercept_column) {
    if (a.dim() != ds.p() - 1) {
      throw_invalid(kModule, "index dimension must match the non-intercept covariate block");
    }
    return ds.x().rightCols(ds.p() - 1) * a.alpha();
  }
  if (a.dim() != ds.p()) {
    throw_invalid(kModule, "index dimension does not match covariate dimension");
  }
  return ds.x() * a.alpha();
}

double interp_curve(const Eigen::VectorXd& values_at_grid, const Grid& grid, double z) {
  if (!std::isfinite(z)) throw_invalid(kModule, "interpolation point must be finite");
  if (values_at_grid.size() != grid.size()) {
    throw_invalid(kModule, "curve values do not match grid size");
  }
  const Eigen::VectorXd& gx = grid.points();
  const Eigen::Index n = gx.size();
  if (z <= gx[0]) return values_at_grid[0];
  if (z >= gx[n - 1]) return values_at_grid[n - 1];
  const double* begin = gx.data();
  const auto hi = std::upper_bound(begin, begin + n, z) - begin;  // gx[hi-1] <= z < gx[hi]
  const Eigen::Index lo = hi - 1;
  const double t = (z - gx[lo]) / (gx[hi] - gx[lo]);
  return std::lerp(values_at_grid[lo], values_at_grid[hi], t);
}

Eigen::VectorXd interp_curve_many(const Eigen::VectorXd& values_at_grid, const Grid& grid,
                                  const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = interp_curve(values_at_grid, grid, z[i]);
  }
  return out;
}

Grid make_grid(const Eigen::VectorXd& z, Eigen::Index n_points) {
  if (z.size() < 2) throw_invalid(kModule, "need at least two index values to span a grid");
  if (n_points < 2) throw_invalid(kModule, "grid needs at least 2 points");
  if (!z.allFinite()) throw_invalid(kModule, "index values contain non-finite entries");
  const double lo = z.minCoeff();
  const double hi = z.maxCoeff();
  if (!(hi > lo)) {
    throw_invalid(kModule, "index projection is constant; cannot span a grid");
  }
  Eigen::VectorXd pts(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (Eigen::Index t = 0; t < n_points; ++t) {
    pts[t] = lo + step * static_cast<double>(t);
  }
  pts[n_points - 1] = hi;  // avoid accumulation drift at the right end
  return Grid(std::move(pts));
}

CurveSet reinterpolate(const CurveSet& curves, const Grid& new_grid) {
  const Eigen::Index k = curves.k();
  const Eigen::Index n = new_grid.size();
  CurveSet out{Eigen::MatrixXd(k, n),
               Eigen::MatrixXd(k, curves.has_mean_curves() ? n : 0),
               Eigen::MatrixXd(k, curves.sigma2.cols() > 0 ? n : 0), new_grid};
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index t = 0; t < n; ++t) {
      const double u = new_grid.points()[t];
      out.pi(j, t) = interp_curve(curves.pi.row(j).transpose(), curves.grid, u);
      if (curves.has_mean_curves()) {
        out.m(j, t) = interp_curve(curves.m.row(j).transpose(), curves.grid, u);
      }
      if (curves.sigma2.cols() > 0) {
        out.sigma2(j, t) = interp_curve(curves.sigma2.row(j).transpose(), curves.grid, u);
      }
    }
  }
  return out;
}

}  // namespace simix
