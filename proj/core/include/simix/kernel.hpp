#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "simix/errors.hpp"

namespace simix {

// Bounded-support kernels only; the estimators are local-constant throughout.
enum class KernelFamily { epanechnikov, quartic };

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
  double bandwidth = 0.0;  // index units

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw_invalid("kernel-smoothing", "bandwidth must be a positive finite real");
    }
  }
};

// K_h(t) = K(t/h)/h; zero outside |t| > h.
double kernel_weight(const KernelSpec& spec, double t);

// Sum(w_i v_i) / Sum(w_i). All-zero weights raise degenerate-window.
double weighted_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

KernelFamily kernel_family_from_name(const std::string& name);
const char* kernel_family_name(KernelFamily family);

}  // namespace simix
