#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "simix/dataset.hpp"

namespace simix {

// Prediction for one held-out row. The response enters through the
// classification probabilities, so predictors weight component means by the
// posterior given the observed y.
using PredictFn = std::function<double(const Eigen::RowVectorXd&, double)>;

// Trains on the given rows and returns a row predictor.
using FitPredictFn = std::function<PredictFn(const Dataset&, std::uint64_t)>;

struct PredictorSpec {
  std::string name;
  FitPredictFn fit;
};

}  // namespace simix
