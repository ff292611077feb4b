#pragma once

#include "cbwk/harness.hpp"
#include "cbwk/oracles.hpp"

#include <string>
#include <vector>

namespace cbwk {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariant suite: dual nonnegativity, projection Lipschitz property,
/// clipping ranges, step doubling, regime cap, fairness antisymmetry,
/// subgradient inequality, small-instance strong duality, CSV golden file.
std::vector<SelftestResult> run_selftest();

/// 10-round, 3-seed toy run whose CSV output is frozen in the golden file.
ExperimentConfig golden_toy_config();
/// Expected CSV for golden_toy_config().
const std::string &golden_toy_csv();

/// Random finite instance with a null-cost action 0 (|X| <= 5, |A| <= 4,
/// d <= 3, costs in [0, 1], budgets in [0.05, 0.55]).
DualSample random_small_instance(Rng &rng);

} // namespace cbwk
