#include "cbwk/fairness.hpp"

#include <cmath>

namespace cbwk {

GroupSpec::GroupSpec(Vector proportions) : gamma_(std::move(proportions)) {
  if (gamma_.size() == 0)
    throw ArgumentError("GroupSpec: no groups");
  if ((gamma_.array() <= 0.0).any() || (gamma_.array() > 1.0).any())
    throw ArgumentError("GroupSpec: proportions must lie in (0,1]");
  if (std::abs(gamma_.sum() - 1.0) > 1e-9)
    throw ArgumentError("GroupSpec: proportions must sum to 1");
}

GroupSpec GroupSpec::balanced(std::size_t groups) {
  return GroupSpec(Vector::Constant(static_cast<Index>(groups),
                                    1.0 / static_cast<double>(groups)));
}

Vector build_fairness_cost(double c_spd, int group, const GroupSpec &spec) {
  const auto G = static_cast<Index>(spec.size());
  if (group < 0 || group >= G)
    throw ArgumentError("build_fairness_cost: invalid group");
  // Keeps every component in [-1, 1].
  const double max_gamma_complement =
      (1.0 - spec.proportions().array()).maxCoeff();
  if (std::abs(c_spd) > 1.0 ||
      std::abs(c_spd) * max_gamma_complement > 1.0 + 1e-12)
    throw ArgumentError("build_fairness_cost: spend cost out of range");
  Vector out(1 + 2 * G);
  out(0) = c_spd;
  for (Index g = 0; g < G; ++g) {
    const double in_group = (g == group) ? c_spd : 0.0;
    const double v = in_group - spec.proportions()(g) * c_spd;
    out(1 + 2 * g) = v;
    out(2 + 2 * g) = -v;
  }
  return out;
}

BudgetVector build_fairness_budget(double b_total, double tau,
                                   const GroupSpec &spec) {
  const auto G = static_cast<Index>(spec.size());
  Vector b(1 + 2 * G);
  b(0) = b_total;
  for (Index g = 0; g < G; ++g) {
    b(1 + 2 * g) = spec.proportions()(g) * tau;
    b(2 + 2 * g) = spec.proportions()(g) * tau;
  }
  return BudgetVector(std::move(b));
}

// --- court ---------------------------------------------------------------------

CourtEnvironment::CourtEnvironment(double tau, SigmoidConvention conv)
    : tau_(tau), conv_(conv) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ArgumentError("CourtEnvironment: tau must lie in [0,1]");
}

ContextVector CourtEnvironment::sample_context(Rng &rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector coords(3);
  coords(0) = u(rng);
  coords(1) = u(rng);
  coords(2) = u(rng);
  std::bernoulli_distribution coin(0.5);
  const int group = coin(rng) ? 1 : 0;
  return ContextVector(std::move(coords), group);
}

double CourtEnvironment::expected_reward(const ContextVector &x,
                                         ActionId a) const {
  return court_expected_reward(x, a, conv_);
}

Vector CourtEnvironment::expected_cost(const ContextVector &x,
                                       ActionId a) const {
  return court_cost(x, a);
}

BudgetVector CourtEnvironment::budgets() const {
  Vector b = Vector::Constant(kCostDim, tau_);
  b(0) = kRideBudget;
  b(1) = kVoucherBudget;
  return BudgetVector(std::move(b));
}

Vector CourtEnvironment::spend_mask() {
  Vector m = Vector::Zero(kCostDim);
  m(0) = 1.0;
  m(1) = 1.0;
  return m;
}

Vector CourtEnvironment::true_parameters() {
  Vector mu(5);
  mu << -1.0, 1.0, 1.0, 2.0, 2.0;
  return mu;
}

Vector CourtFeatureMap::evaluate(const ContextVector &x, ActionId a) const {
  if (x.coords.size() != 3 || !x.group)
    throw ArgumentError("CourtFeatureMap: expected a court context");
  if (a.index > 2)
    throw ArgumentError("CourtFeatureMap: action out of range");
  const double g0 = (*x.group == 0) ? 1.0 : 0.0;
  const double voucher = (a.index == CourtEnvironment::kVoucher) ? 1.0 : 0.0;
  const double ride = (a.index == CourtEnvironment::kRide) ? 1.0 : 0.0;
  Vector phi(5);
  phi << x.coords(0), x.coords(1) * voucher, x.coords(1) * voucher * g0,
      x.coords(2) * ride, x.coords(2) * ride * g0;
  return phi;
}

double court_expected_reward(const ContextVector &x, ActionId a,
                             SigmoidConvention conv) {
  static const CourtFeatureMap phi;
  static const Vector mu = CourtEnvironment::true_parameters();
  return sigmoid(phi.evaluate(x, a).dot(mu), conv);
}

Vector court_cost(const ContextVector &x, ActionId a) {
  if (!x.group || *x.group < 0 || *x.group > 1)
    throw ArgumentError("court_cost: expected group 0 or 1");
  if (a.index > 2)
    throw ArgumentError("court_cost: action out of range");
  Vector c = Vector::Zero(CourtEnvironment::kCostDim);
  const double ride = (a.index == CourtEnvironment::kRide) ? 1.0 : 0.0;
  const double voucher = (a.index == CourtEnvironment::kVoucher) ? 1.0 : 0.0;
  const double g0 = (*x.group == 0) ? 1.0 : 0.0;
  const double g1 = 1.0 - g0;
  c(0) = ride;
  c(1) = voucher;
  c(2) = 2.0 * ride * g0 - ride;
  c(3) = 2.0 * ride * g1 - ride;
  c(4) = 2.0 * voucher * g0 - voucher;
  c(5) = 2.0 * voucher * g1 - voucher;
  c.segment(6, 4) = -c.segment(2, 4);
  return c;
}

} // namespace cbwk
