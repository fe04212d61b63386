#include "simix/sir.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

namespace simix {

namespace {
constexpr const char* kModule = "sir-init";
}

IndexVector sir_direction(const Dataset& ds, const SirConfig& cfg) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  if (cfg.n_slices < 2) throw_invalid(kModule, "n_slices must be >= 2");
  if (cfg.ridge < 0.0) throw_invalid(kModule, "ridge must be nonnegative");
  if (n < 2 * cfg.n_slices) {
    throw_invalid(kModule, "need at least 2 observations per slice");
  }
  if (p == 1) {
    return normalize_index(Eigen::VectorXd::Ones(1));
  }

  // standardize x to zero mean, identity covariance
  const Eigen::RowVectorXd mean = ds.x().colwise().mean();
  const Eigen::MatrixXd xc = ds.x().rowwise() - mean;
  Eigen::MatrixXd cov = (xc.transpose() * xc) / static_cast<double>(n - 1);
  cov.diagonal().array() += cfg.ridge;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov_eig(cov);
  if (cov_eig.info() != Eigen::Success) {
    throw_rank(kModule, "covariance eigendecomposition failed");
  }
  const Eigen::VectorXd evals = cov_eig.eigenvalues();
  const double lmax = evals[p - 1];
  const double lmin = evals[0];
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    throw_rank(kModule, "covariance of x is numerically singular");
  }
  const Eigen::MatrixXd inv_sqrt =
      cov_eig.eigenvectors() * evals.cwiseSqrt().cwiseInverse().asDiagonal() *
      cov_eig.eigenvectors().transpose();
  const Eigen::MatrixXd xs = xc * inv_sqrt;

  // sort by y, stable on row index
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return ds.y()[a] < ds.y()[b]; });

  // between-slice covariance of standardized slice means
  const Eigen::Index s = cfg.n_slices;
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index slice = 0; slice < s; ++slice) {
    const Eigen::Index lo = slice * n / s;
    const Eigen::Index hi = (slice + 1) * n / s;
    if (hi - lo < 2) throw_invalid(kModule, "a slice received fewer than 2 observations");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
    for (Eigen::Index r = lo; r < hi; ++r) m += xs.row(order[static_cast<std::size_t>(r)]);
    m /= static_cast<double>(hi - lo);
    const double w = static_cast<double>(hi - lo) / static_cast<double>(n);
    between += w * m * m.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> between_eig(between);
  if (between_eig.info() != Eigen::Success) {
    throw_rank(kModule, "between-slice eigendecomposition failed");
  }
  const Eigen::VectorXd leading = between_eig.eigenvectors().col(p - 1);
  return normalize_index(inv_sqrt * leading);
}

}  // namespace simix
