#pragma once

#include "simix/dataset.hpp"

namespace simix {

struct SirConfig {
  int n_slices = 10;
  double ridge = 1e-10;  // added to the covariance diagonal before inversion
};

// Sliced inverse regression, first direction only. Deterministic: the sort
// by response is stable, so ties are broken by original row order.
IndexVector sir_direction(const Dataset& ds, const SirConfig& cfg = {});

}  // namespace simix
