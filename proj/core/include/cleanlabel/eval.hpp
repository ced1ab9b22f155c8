// Monte-Carlo estimation of attack success, plus the audits that keep every
// reported number honest: clean-label and budget checks on each poison set,
// and mirror-symmetry checks on the reflection attacks.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cleanlabel/classes.hpp"
#include "cleanlabel/core.hpp"

namespace cleanlabel {

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 1.0;

  double half_width() const { return (hi - lo) / 2.0; }
};

// 95% Wilson score interval for a binomial proportion.
ConfidenceInterval wilson_interval(std::size_t successes, std::size_t n);

// Everything attackable_rate measures against one fixed distribution.
//
// atk uses pool-max semantics: a test point counts as attacked when any pool
// member flips the refit prediction away from the target. err comes from a
// clean fit of the same training set, so the null attacker's row in
// member_atk should match it up to learner randomness.
struct AttackReport {
  std::size_t trials = 0;
  std::size_t test_points = 0;  // per trial
  std::size_t points_evaluated = 0;

  double atk_mean = 0.0;
  ConfidenceInterval atk_ci;
  double err_mean = 0.0;
  ConfidenceInterval err_ci;

  std::vector<std::string> member_names;
  std::vector<double> member_atk;

  std::size_t poison_invocations = 0;
  std::size_t clean_label_violations = 0;
  std::size_t budget_violations = 0;

  std::size_t failed_trials = 0;
  std::vector<std::string> errors;  // first few failure messages
};

// Estimates the attackable rate of `learner` under the attacker pool.
//
// Per trial: one training set of size m, one clean fit for err, then per test
// point and pool member a poison set and a refit. All randomness is derived
// from `base` keyed by trial, point, and member name, so results are
// reproducible and independent of `workers`.
AttackReport attackable_rate(const Learner& learner,
                             const std::vector<Attacker>& pool,
                             const TargetedDistribution& dist, std::size_t m,
                             std::size_t trials, std::size_t test_points,
                             const RngStream& base, std::size_t workers = 1);

// attackable_rate with the whole experiment redrawn per training draw, for
// constructions whose guarantee is an expectation over hidden targets. The
// attacker pool is rebuilt per draw because proof-derived attackers read the
// drawn construction's metadata.
struct ExpectedAttackReport {
  std::vector<double> draw_atk;  // one attack rate per training draw
  double atk_mean = 0.0;
  double atk_se = 0.0;  // standard error of the mean
  double err_mean = 0.0;

  std::size_t poison_invocations = 0;
  std::size_t clean_label_violations = 0;
  std::size_t budget_violations = 0;

  std::size_t failed_draws = 0;
  std::vector<std::string> errors;
};

using ExperimentFactory = std::function<Experiment(RngStream&)>;
using PoolFactory = std::function<std::vector<Attacker>(const Experiment&)>;

ExpectedAttackReport expected_attackable_rate(
    const Learner& learner, const ExperimentFactory& experiment_factory,
    const PoolFactory& pool_factory, std::size_t m, std::size_t draws,
    std::size_t test_points, const RngStream& base, std::size_t workers = 1);

// Multiset equality up to `tol` in instance space (labels exact): greedy
// nearest-neighbor matching in canonical order. Reports the largest matched
// distance through max_deviation when given.
bool multiset_match(const Dataset& a, const Dataset& b, double tol,
                    double* max_deviation = nullptr);

// Fuzzes one attacker against one distribution: fresh training set and test
// point per invocation, then label and budget checks on the poison set.
struct AuditReport {
  std::size_t invocations = 0;
  std::size_t nonempty_poisons = 0;
  std::size_t clean_label_violations = 0;
  std::size_t budget_violations = 0;
  std::vector<std::string> errors;
};

AuditReport audit_attacker(const Attacker& attacker,
                           const TargetedDistribution& dist, std::size_t m,
                           std::size_t invocations, const RngStream& base);

// Same checks with the construction redrawn per invocation, for attackers
// that read a drawn construction's metadata.
AuditReport audit_attacker(
    const std::function<Attacker(const Experiment&)>& attacker_factory,
    const ExperimentFactory& experiment_factory, std::size_t m,
    std::size_t invocations, const RngStream& base);

// Mirror-pair audits. Each fired trial builds the construction twice, the
// second time reflected through the test point, and requires: the two
// poisoned training multisets agree within tolerance, both hidden targets are
// consistent with that multiset, and the targets disagree at the test point.
struct SymmetryReport {
  std::size_t attempted = 0;
  std::size_t fired = 0;
  std::size_t mismatches = 0;
  double max_deviation = 0.0;

  bool passed(std::size_t min_fired) const {
    return mismatches == 0 && fired >= min_fired;
  }
};

// 3-D circle construction, m = 5 training points, eta = 1e-3.
SymmetryReport symmetry_audit_circle(std::size_t min_fired,
                                     const RngStream& base);

// Shifted half-sphere construction, n = 257, epsilon = 0.01, m = 50.
SymmetryReport symmetry_audit_halfsphere(std::size_t min_fired,
                                         const RngStream& base);

}  // namespace cleanlabel
