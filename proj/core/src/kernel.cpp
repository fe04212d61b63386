#include "simix/kernel.hpp"

#include <cmath>

namespace simix {

namespace {
constexpr const char* kModule = "kernel-smoothing";
}

double kernel_weight(const KernelSpec& spec, double t) {
  spec.validate();
  const double u = t / spec.bandwidth;
  if (std::abs(u) >= 1.0) return 0.0;
  const double one_minus_u2 = 1.0 - u * u;
  double k = 0.0;
  switch (spec.family) {
    case KernelFamily::epanechnikov:
      k = 0.75 * one_minus_u2;
      break;
    case KernelFamily::quartic:
      k = 0.9375 * one_minus_u2 * one_minus_u2;
      break;
  }
  return k / spec.bandwidth;
}

double weighted_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() != weights.size()) {
    throw_invalid(kModule, "values and weights must have equal length");
  }
  if (values.size() == 0) throw_invalid(kModule, "weighted mean of an empty window");
  if ((weights.array() < 0.0).any()) {
    throw_invalid(kModule, "kernel weights must be nonnegative");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw_degenerate(kModule, "all kernel weights are zero; widen the bandwidth");
  }
  return weights.dot(values) / total;
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "quartic") return KernelFamily::quartic;
  throw_invalid(kModule, "unknown kernel family: " + name);
}

const char* kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::quartic: return "quartic";
  }
  return "unknown";
}

}  // namespace simix
