// Internal helpers shared by the EM implementations. Not installed.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "simix/dataset.hpp"
#include "simix/kernel.hpp"

namespace simix::detail {

// Kernel weights per grid point, restricted to the bounded support window.
// zhat is sorted once so each grid point only touches observations with
// |z - u| < h. Fixed for the lifetime of one EM pass.
struct WeightTable {
  std::vector<std::vector<std::pair<Eigen::Index, double>>> entries;
  std::vector<double> total;
};

inline WeightTable build_weight_table(const Eigen::VectorXd& zhat, const KernelSpec& kernel,
                                      const Grid& grid, const char* module) {
  kernel.validate();
  const Eigen::Index n = zhat.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return zhat[a] < zhat[b]; });
  std::vector<double> sorted_z(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) sorted_z[r] = zhat[order[r]];

  const double h = kernel.bandwidth;
  WeightTable table;
  table.entries.resize(static_cast<std::size_t>(grid.size()));
  table.total.assign(static_cast<std::size_t>(grid.size()), 0.0);
  for (Eigen::Index t = 0; t < grid.size(); ++t) {
    const double u = grid.points()[t];
    const auto lo = std::lower_bound(sorted_z.begin(), sorted_z.end(), u - h) - sorted_z.begin();
    const auto hi = std::upper_bound(sorted_z.begin(), sorted_z.end(), u + h) - sorted_z.begin();
    auto& row = table.entries[static_cast<std::size_t>(t)];
    row.reserve(static_cast<std::size_t>(hi - lo));
    double tot = 0.0;
    for (auto r = lo; r < hi; ++r) {
      const double w = kernel_weight(kernel, sorted_z[static_cast<std::size_t>(r)] - u);
      if (w > 0.0) {
        row.emplace_back(order[static_cast<std::size_t>(r)], w);
        tot += w;
      }
    }
    if (!(tot > 0.0)) {
      throw_degenerate(module, std::string("no kernel mass at grid point ") + std::to_string(t) +
                                   "; widen the bandwidth");
    }
    table.total[static_cast<std::size_t>(t)] = tot;
  }
  return table;
}

// Precomputed linear-interpolation coefficients for fixed query points
// (clamped beyond the grid ends).
struct InterpPlan {
  std::vector<Eigen::Index> lo;
  std::vector<double> frac;
};

inline InterpPlan make_interp_plan(const Grid& grid, const Eigen::VectorXd& z,
                                   const char* module) {
  InterpPlan plan;
  const Eigen::Index n = z.size();
  plan.lo.resize(static_cast<std::size_t>(n));
  plan.frac.resize(static_cast<std::size_t>(n));
  const Eigen::VectorXd& gx = grid.points();
  const Eigen::Index ng = gx.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = z[i];
    if (!std::isfinite(zi)) throw_invalid(module, "non-finite index projection");
    if (zi <= gx[0]) {
      plan.lo[static_cast<std::size_t>(i)] = 0;
      plan.frac[static_cast<std::size_t>(i)] = 0.0;
    } else if (zi >= gx[ng - 1]) {
      plan.lo[static_cast<std::size_t>(i)] = ng - 2;
      plan.frac[static_cast<std::size_t>(i)] = 1.0;
    } else {
      const double* begin = gx.data();
      const Eigen::Index hi = std::upper_bound(begin, begin + ng, zi) - begin;
      plan.lo[static_cast<std::size_t>(i)] = hi - 1;
      plan.frac[static_cast<std::size_t>(i)] = (zi - gx[hi - 1]) / (gx[hi] - gx[hi - 1]);
    }
  }
  return plan;
}

inline double interp_at(const Eigen::MatrixXd& curve, Eigen::Index j, const InterpPlan& plan,
                        std::size_t i) {
  const Eigen::Index lo = plan.lo[i];
  return std::lerp(curve(j, lo), curve(j, lo + 1), plan.frac[i]);
}

// Proportion smoother shared by both models: plain kernel smoother of the
// responsibilities, clamped to [prop_floor, 1 - prop_floor], renormalized.
inline void smooth_proportions(const Responsibilities& resp, const WeightTable& table,
                               double prop_floor, Eigen::MatrixXd& pi_out) {
  const Eigen::Index k = resp.k();
  const Eigen::Index ng = pi_out.cols();
  Eigen::VectorXd s_w(k);
  for (Eigen::Index t = 0; t < ng; ++t) {
    const auto& window = table.entries[static_cast<std::size_t>(t)];
    s_w.setZero();
    for (const auto& [i, w] : window) {
      for (Eigen::Index j = 0; j < k; ++j) s_w[j] += resp.p(i, j) * w;
    }
    double clamped_sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double clamped =
          std::clamp(s_w[j] / table.total[static_cast<std::size_t>(t)], prop_floor,
                     1.0 - prop_floor);
      pi_out(j, t) = clamped;
      clamped_sum += clamped;
    }
    pi_out.col(t) /= clamped_sum;
  }
}

}  // namespace simix::detail
