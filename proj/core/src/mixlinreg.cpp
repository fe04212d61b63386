#include "simix/mixlinreg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "simix/rng.hpp"

namespace simix {

namespace {
constexpr const char* kModule = "bench-eval";
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

namespace {

struct EmState {
  Eigen::VectorXd pi;      // k
  Eigen::MatrixXd beta;    // k x (p+1)
  Eigen::VectorXd sigma2;  // k
};

// log-space posterior update; returns loglik of the current state
double e_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& y, const EmState& st,
              Eigen::MatrixXd& post) {
  const Eigen::Index n = s.rows();
  const Eigen::Index k = st.pi.size();
  double loglik = 0.0;
  Eigen::VectorXd logw(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double r = y[i] - s.row(i).dot(st.beta.row(j));
      logw[j] = std::log(st.pi[j]) -
                0.5 * (kLog2Pi + std::log(st.sigma2[j]) + r * r / st.sigma2[j]);
      best = std::max(best, logw[j]);
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      logw[j] = std::exp(logw[j] - best);
      denom += logw[j];
    }
    for (Eigen::Index j = 0; j < k; ++j) post(i, j) = logw[j] / denom;
    loglik += best + std::log(denom);
  }
  return loglik;
}

std::vector<int> quantile_labels(const Eigen::VectorXd& y, int k) {
  const Eigen::Index n = y.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    labels[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
        std::min<int>(static_cast<int>(r * k / n), k - 1);
  }
  return labels;
}

}  // namespace

MixLinRegFit fit_mixlinreg(const Dataset& ds, int k, std::uint64_t seed,
                           const MixLinRegOptions& opts) {
  if (k < 1) throw_invalid(kModule, "k must be >= 1");
  const Eigen::Index n = ds.n();
  const Eigen::Index q = ds.p() + 1;
  if (n <= static_cast<Eigen::Index>(k) * q) {
    throw_invalid(kModule, "need n > k*(p+1) observations");
  }
  if (opts.restarts < 1 || opts.max_iters < 1 || !(opts.tol > 0.0)) {
    throw_invalid(kModule, "bad mixlinreg options");
  }

  const Eigen::MatrixXd s = intercept_augmented(ds.x());
  const Eigen::VectorXd& y = ds.y();
  const double y_mean = y.mean();
  const double var_floor =
      opts.var_floor_frac * (y.array() - y_mean).square().sum() / static_cast<double>(n - 1);

  MixLinRegFit best;
  best.loglik = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int restart = 0; restart < opts.restarts; ++restart) {
    // hard labels: response quantiles for the first start, seeded random after
    std::vector<int> labels;
    if (restart == 0) {
      labels = quantile_labels(y, k);
    } else {
      Rng rng(derive_seed(seed, seed_stream::mixlinreg, static_cast<std::uint64_t>(restart)));
      labels.resize(static_cast<std::size_t>(n));
      for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    }

    Eigen::MatrixXd post = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) post(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    EmState st{Eigen::VectorXd::Constant(k, 1.0 / k), Eigen::MatrixXd::Zero(k, q),
               Eigen::VectorXd::Constant(k, 1.0)};
    bool failed = false;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
      // M-step
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd w = post.col(j);
        const double wsum = w.sum();
        if (wsum <= static_cast<double>(q)) {
          failed = true;
          break;
        }
        try {
          st.beta.row(j) = weighted_least_squares(s, y, w, kModule).transpose();
        } catch (const Error&) {
          failed = true;
          break;
        }
        const Eigen::VectorXd r = y - s * st.beta.row(j).transpose();
        st.sigma2[j] = std::max(w.dot(r.cwiseProduct(r)) / wsum, var_floor);
        st.pi[j] = std::clamp(wsum / static_cast<double>(n), opts.prop_floor,
                              1.0 - opts.prop_floor);
      }
      if (failed) break;
      st.pi /= st.pi.sum();

      const double new_loglik = e_step(s, y, st, post);
      if (iter > 0 && std::abs(new_loglik - loglik) < opts.tol) {
        loglik = new_loglik;
        converged = true;
        break;
      }
      loglik = new_loglik;
    }
    if (failed) continue;
    if (!have_best || loglik > best.loglik) {
      best = MixLinRegFit{st.beta, st.sigma2, st.pi, loglik, converged};
      have_best = true;
    }
  }

  if (!have_best) {
    throw_rank(kModule, "every mixlinreg restart collapsed; data may be degenerate");
  }
  return best;
}

}  // namespace simix
