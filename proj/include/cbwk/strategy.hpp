#pragma once

#include "cbwk/estimators.hpp"

namespace cbwk {

/// What a strategy gets to see after playing a round.
struct RoundObservation {
  std::size_t t = 0;
  const ContextVector *x = nullptr;
  ActionId a;
  double r = 0.0;
  const Vector *c = nullptr;
  bool warmup = false;
};

/// A CBwK strategy driven by the harness. The estimator passed to `observe`
/// has not yet incorporated the round, so its bounds are those of t - 1.
class Strategy {
public:
  virtual ~Strategy() = default;

  virtual ActionId select(const ContextVector &x, const Estimator &est,
                          Rng &rng) = 0;
  virtual void observe(const RoundObservation &obs, const Estimator &est) = 0;

  /// Current dual variables (dimension 0 for strategies without any).
  virtual DualVector lambda() const { return {}; }
  virtual int regime() const { return 0; }
};

} // namespace cbwk
