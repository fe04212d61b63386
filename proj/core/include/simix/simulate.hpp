#pragma once

#include <cstdint>
#include <functional>

#include "simix/dataset.hpp"

namespace simix {

enum class ExampleId { example1, example2 };

// Ground truth carried alongside generated data: curve closures on the index
// scale for the fully nonparametric example, linear parameters plus the
// proportion curve for the index-proportion example.
struct TruthSpec {
  IndexVector alpha;
  int k = 0;
  std::function<double(int, double)> pi;      // component, index value
  std::function<double(int, double)> m;       // empty for example 2
  std::function<double(int, double)> sigma2;  // empty for example 2
  Eigen::MatrixXd beta;                       // k x (p+1); empty for example 1
  Eigen::VectorXd sigma2_const;               // k; empty for example 1

  bool has_curves() const { return static_cast<bool>(m); }
};

struct Generated {
  Dataset ds;
  TruthSpec truth;
};

// Two-component fully nonparametric mixture over the index of trivariate
// uniform covariates: sinusoidal proportion, mean and scale functions.
Generated gen_example1(Eigen::Index n, std::uint64_t seed);

// Two-component linear mixture with an index-varying proportion; slopes
// (1,0,3,0) and (-1,2,0,3) with constant variances 0.7 and 0.6.
Generated gen_example2(Eigen::Index n, std::uint64_t seed);

Generated generate(ExampleId example, Eigen::Index n, std::uint64_t seed);

}  // namespace simix
