#include "simix/simulate.hpp"

#include <cmath>

#include "simix/rng.hpp"

namespace simix {

namespace {

constexpr const char* kModule = "bench-eval";
const double kSqrt3 = std::sqrt(3.0);

Eigen::VectorXd truth_direction() {
  return Eigen::Vector3d(1.0, 1.0, 1.0) / kSqrt3;
}

}  // namespace

Generated gen_example1(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw_invalid(kModule, "n must be >= 1");
  Rng rng(seed);
  const IndexVector alpha = normalize_index(truth_direction());

  auto pi1 = [](double z) { return 0.5 + 0.3 * std::sin(M_PI * z); };
  auto m1 = [](double z) { return 3.0 - std::sin(2.0 * M_PI * z / kSqrt3); };
  auto m2 = [](double z) { return std::cos(kSqrt3 * M_PI * z); };
  auto sd1 = [](double z) { return 0.7 + std::sin(3.0 * M_PI * z) / 15.0; };
  auto sd2 = [](double z) { return 0.3 + std::cos(1.3 * M_PI * z) / 10.0; };

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) x(i, c) = rng.uniform01();
    const double z = x.row(i).sum() / kSqrt3;
    const bool first = rng.uniform01() < pi1(z);
    const double mean = first ? m1(z) : m2(z);
    const double sd = first ? sd1(z) : sd2(z);
    y[i] = rng.normal(mean, sd);
  }

  TruthSpec truth{
      alpha,
      2,
      [pi1](int j, double z) { return j == 0 ? pi1(z) : 1.0 - pi1(z); },
      [m1, m2](int j, double z) { return j == 0 ? m1(z) : m2(z); },
      [sd1, sd2](int j, double z) {
        const double s = j == 0 ? sd1(z) : sd2(z);
        return s * s;
      },
      Eigen::MatrixXd(),
      Eigen::VectorXd()};
  return Generated{Dataset(std::move(x), std::move(y), {"x1", "x2", "x3"}), std::move(truth)};
}

Generated gen_example2(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw_invalid(kModule, "n must be >= 1");
  Rng rng(seed);
  const IndexVector alpha = normalize_index(truth_direction());

  auto pi1 = [](double z) { return 0.5 - 0.35 * std::sin(M_PI * z); };
  Eigen::MatrixXd beta(2, 4);
  beta.row(0) << 1.0, 0.0, 3.0, 0.0;
  beta.row(1) << -1.0, 2.0, 0.0, 3.0;
  Eigen::VectorXd sigma2(2);
  sigma2 << 0.7, 0.6;

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) x(i, c) = rng.uniform01();
    const double z = x.row(i).sum() / kSqrt3;
    const int j = rng.uniform01() < pi1(z) ? 0 : 1;
    const double mean =
        beta(j, 0) + beta(j, 1) * x(i, 0) + beta(j, 2) * x(i, 1) + beta(j, 3) * x(i, 2);
    y[i] = rng.normal(mean, std::sqrt(sigma2[j]));
  }

  TruthSpec truth{alpha,
                  2,
                  [pi1](int j, double z) { return j == 0 ? pi1(z) : 1.0 - pi1(z); },
                  nullptr,
                  nullptr,
                  std::move(beta),
                  std::move(sigma2)};
  return Generated{Dataset(std::move(x), std::move(y), {"x1", "x2", "x3"}), std::move(truth)};
}

Generated generate(ExampleId example, Eigen::Index n, std::uint64_t seed) {
  return example == ExampleId::example1 ? gen_example1(n, seed) : gen_example2(n, seed);
}

}  // namespace simix
