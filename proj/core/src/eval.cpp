#include "cleanlabel/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>
#include <utility>

#include "cleanlabel/attackers.hpp"
#include "cleanlabel/geometry.hpp"

namespace cleanlabel {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::size_t kMaxStoredErrors = 16;

std::string indexed_message(const char* what, std::size_t i, const char* msg) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %zu: %s", what, i, msg);
  return std::string(buf);
}

// Runs fn(slot) for every slot in [0, slots). Each slot derives all of its
// randomness from the slot index alone, so the outcome vector is the same for
// any worker count or schedule.
template <typename Outcome, typename Fn>
std::vector<Outcome> run_slots(std::size_t slots, std::size_t workers,
                               const Fn& fn) {
  std::vector<Outcome> out(slots);
  if (workers <= 1 || slots <= 1) {
    for (std::size_t i = 0; i < slots; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= slots) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> threads;
  const std::size_t spawn = std::min(workers, slots);
  threads.reserve(spawn);
  for (std::size_t w = 0; w < spawn; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  return out;
}

struct PoisonChecks {
  std::size_t invocations = 0;
  std::size_t clean = 0;
  std::size_t budget = 0;
};

void check_poison(const Attacker& attacker, const Hypothesis& target,
                  const Dataset& poison, PoisonChecks& checks) {
  ++checks.invocations;
  for (const auto& e : poison.items()) {
    if (target.predict(e.x) != e.y) ++checks.clean;
  }
  if (attacker.budget.finite && poison.size() > attacker.budget.t) {
    ++checks.budget;
  }
}

struct TrialOutcome {
  std::size_t points = 0;
  std::size_t atk_hits = 0;
  std::size_t err_hits = 0;
  std::vector<std::size_t> member_hits;
  PoisonChecks checks;
  bool failed = false;
  std::string error;
};

// One trial against a fixed distribution: training set, clean fit, then a
// poisoned refit per (test point, pool member).
TrialOutcome run_trial(const Learner& learner, const std::vector<Attacker>& pool,
                       const TargetedDistribution& dist, std::size_t m,
                       std::size_t test_points, const RngStream& trial_rng) {
  TrialOutcome out;
  out.member_hits.assign(pool.size(), 0);
  try {
    RngStream train_rng = trial_rng.derive("train");
    const Dataset S = dist.sample_dataset(m, train_rng);
    RngStream clean_rng = trial_rng.derive("clean");
    const HypothesisPtr h0 = learner.fit(S, clean_rng);

    RngStream test_rng = trial_rng.derive("test");
    for (std::size_t j = 0; j < test_points; ++j) {
      const Point x0 = dist.sample_x(test_rng);
      const Label truth = dist.target->predict(x0);
      if (h0->predict(x0) != truth) ++out.err_hits;

      bool attacked = false;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        const RngStream member_rng =
            trial_rng.derive("atk").derive(j).derive(pool[k].name);
        RngStream poison_rng = member_rng.derive("poison");
        const Dataset poison =
            pool[k].poison(*dist.target, S, x0, poison_rng);
        check_poison(pool[k], *dist.target, poison, out.checks);

        RngStream fit_rng = member_rng.derive("fit");
        const HypothesisPtr h = learner.fit(dataset_union(S, poison), fit_rng);
        if (h->predict(x0) != truth) {
          ++out.member_hits[k];
          attacked = true;
        }
      }
      if (attacked) ++out.atk_hits;
      ++out.points;
    }
  } catch (const std::exception& e) {
    out = TrialOutcome{};
    out.member_hits.assign(pool.size(), 0);
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

void record_error(std::vector<std::string>& sink, const char* what,
                  std::size_t index, const std::string& message) {
  if (sink.size() < kMaxStoredErrors) {
    sink.push_back(indexed_message(what, index, message.c_str()));
  }
}

}  // namespace

ConfidenceInterval wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return ConfidenceInterval{0.0, 1.0};
  if (successes > n) {
    fail(ErrorKind::precondition, "wilson_interval: successes > n");
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The interval endpoints are exact at the boundary counts.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return ConfidenceInterval{lo, hi};
}

AttackReport attackable_rate(const Learner& learner,
                             const std::vector<Attacker>& pool,
                             const TargetedDistribution& dist, std::size_t m,
                             std::size_t trials, std::size_t test_points,
                             const RngStream& base, std::size_t workers) {
  if (!dist.target) fail(ErrorKind::precondition, "distribution has no target");
  if (trials == 0 || test_points == 0) {
    fail(ErrorKind::precondition, "attackable_rate needs trials and points");
  }

  const auto outcomes = run_slots<TrialOutcome>(
      trials, workers, [&](std::size_t i) {
        return run_trial(learner, pool, dist, m, test_points,
                         base.derive("trial").derive(i));
      });

  AttackReport report;
  report.trials = trials;
  report.test_points = test_points;
  report.member_names.reserve(pool.size());
  for (const auto& a : pool) report.member_names.push_back(a.name);

  std::size_t atk_hits = 0;
  std::size_t err_hits = 0;
  std::vector<std::size_t> member_hits(pool.size(), 0);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.failed) {
      ++report.failed_trials;
      record_error(report.errors, "trial", i, o.error);
      continue;
    }
    report.points_evaluated += o.points;
    atk_hits += o.atk_hits;
    err_hits += o.err_hits;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      member_hits[k] += o.member_hits[k];
    }
    report.poison_invocations += o.checks.invocations;
    report.clean_label_violations += o.checks.clean;
    report.budget_violations += o.checks.budget;
  }

  const std::size_t n = report.points_evaluated;
  report.atk_mean = n == 0 ? 0.0 : static_cast<double>(atk_hits) / n;
  report.err_mean = n == 0 ? 0.0 : static_cast<double>(err_hits) / n;
  report.atk_ci = wilson_interval(atk_hits, n);
  report.err_ci = wilson_interval(err_hits, n);
  report.member_atk.resize(pool.size(), 0.0);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    report.member_atk[k] = n == 0 ? 0.0 : static_cast<double>(member_hits[k]) / n;
  }
  return report;
}

ExpectedAttackReport expected_attackable_rate(
    const Learner& learner, const ExperimentFactory& experiment_factory,
    const PoolFactory& pool_factory, std::size_t m, std::size_t draws,
    std::size_t test_points, const RngStream& base, std::size_t workers) {
  if (draws == 0 || test_points == 0) {
    fail(ErrorKind::precondition, "expected_attackable_rate needs draws/points");
  }

  struct DrawOutcome {
    double atk = 0.0;
    double err = 0.0;
    PoisonChecks checks;
    bool failed = false;
    std::string error;
  };

  const auto outcomes = run_slots<DrawOutcome>(
      draws, workers, [&](std::size_t d) {
        DrawOutcome out;
        try {
          const RngStream draw_rng = base.derive("draw").derive(d);
          RngStream exp_rng = draw_rng.derive("exp");
          const Experiment exp = experiment_factory(exp_rng);
          const std::vector<Attacker> pool = pool_factory(exp);
          const TrialOutcome t = run_trial(learner, pool, exp.dist, m,
                                           test_points, draw_rng);
          if (t.failed) {
            out.failed = true;
            out.error = t.error;
            return out;
          }
          out.atk = static_cast<double>(t.atk_hits) / t.points;
          out.err = static_cast<double>(t.err_hits) / t.points;
          out.checks = t.checks;
        } catch (const std::exception& e) {
          out.failed = true;
          out.error = e.what();
        }
        return out;
      });

  ExpectedAttackReport report;
  for (std::size_t d = 0; d < outcomes.size(); ++d) {
    const auto& o = outcomes[d];
    if (o.failed) {
      ++report.failed_draws;
      record_error(report.errors, "draw", d, o.error);
      continue;
    }
    report.draw_atk.push_back(o.atk);
    report.err_mean += o.err;
    report.poison_invocations += o.checks.invocations;
    report.clean_label_violations += o.checks.clean;
    report.budget_violations += o.checks.budget;
  }

  const std::size_t good = report.draw_atk.size();
  if (good > 0) {
    double sum = 0.0;
    for (double v : report.draw_atk) sum += v;
    report.atk_mean = sum / static_cast<double>(good);
    report.err_mean /= static_cast<double>(good);
  }
  if (good > 1) {
    double ss = 0.0;
    for (double v : report.draw_atk) {
      ss += (v - report.atk_mean) * (v - report.atk_mean);
    }
    report.atk_se = std::sqrt(ss / (static_cast<double>(good) *
                                    static_cast<double>(good - 1)));
  }
  return report;
}

bool multiset_match(const Dataset& a, const Dataset& b, double tol,
                    double* max_deviation) {
  if (max_deviation != nullptr) *max_deviation = 0.0;
  if (a.size() != b.size()) return false;
  const auto& items_a = a.items();
  const auto& items_b = b.items();
  std::vector<bool> used(items_b.size(), false);
  double worst = 0.0;
  for (const auto& ea : items_a) {
    double best = -1.0;
    std::size_t best_idx = items_b.size();
    for (std::size_t i = 0; i < items_b.size(); ++i) {
      if (used[i] || items_b[i].y != ea.y) continue;
      if (items_b[i].x.size() != ea.x.size()) continue;
      const double d = std::sqrt(squared_distance(items_b[i].x, ea.x));
      if (best < 0.0 || d < best) {
        best = d;
        best_idx = i;
      }
    }
    if (best_idx == items_b.size() || best > tol) return false;
    used[best_idx] = true;
    worst = std::max(worst, best);
  }
  if (max_deviation != nullptr) *max_deviation = worst;
  return true;
}

AuditReport audit_attacker(const Attacker& attacker,
                           const TargetedDistribution& dist, std::size_t m,
                           std::size_t invocations, const RngStream& base) {
  if (!dist.target) fail(ErrorKind::precondition, "distribution has no target");
  AuditReport report;
  PoisonChecks checks;
  for (std::size_t i = 0; i < invocations; ++i) {
    const RngStream it = base.derive("audit").derive(i);
    try {
      RngStream train_rng = it.derive("train");
      const Dataset S = dist.sample_dataset(m, train_rng);
      RngStream test_rng = it.derive("test");
      const Point x0 = dist.sample_x(test_rng);
      RngStream poison_rng = it.derive("poison");
      const Dataset poison = attacker.poison(*dist.target, S, x0, poison_rng);
      if (!poison.empty()) ++report.nonempty_poisons;
      check_poison(attacker, *dist.target, poison, checks);
    } catch (const std::exception& e) {
      record_error(report.errors, "invocation", i, e.what());
    }
  }
  report.invocations = checks.invocations;
  report.clean_label_violations = checks.clean;
  report.budget_violations = checks.budget;
  return report;
}

AuditReport audit_attacker(
    const std::function<Attacker(const Experiment&)>& attacker_factory,
    const ExperimentFactory& experiment_factory, std::size_t m,
    std::size_t invocations, const RngStream& base) {
  AuditReport report;
  PoisonChecks checks;
  for (std::size_t i = 0; i < invocations; ++i) {
    const RngStream it = base.derive("audit").derive(i);
    try {
      RngStream exp_rng = it.derive("exp");
      const Experiment exp = experiment_factory(exp_rng);
      const Attacker attacker = attacker_factory(exp);
      RngStream train_rng = it.derive("train");
      const Dataset S = exp.dist.sample_dataset(m, train_rng);
      RngStream test_rng = it.derive("test");
      const Point x0 = exp.dist.sample_x(test_rng);
      RngStream poison_rng = it.derive("poison");
      const Dataset poison = attacker.poison(*exp.dist.target, S, x0, poison_rng);
      if (!poison.empty()) ++report.nonempty_poisons;
      check_poison(attacker, *exp.dist.target, poison, checks);
    } catch (const std::exception& e) {
      record_error(report.errors, "invocation", i, e.what());
    }
  }
  report.invocations = checks.invocations;
  report.clean_label_violations = checks.clean;
  report.budget_violations = checks.budget;
  return report;
}

namespace {

// Shared tail of both symmetry audits: the two poisoned multisets must agree
// within tolerance, both targets must explain the agreed multiset, and the
// targets must split on the test point.
void check_mirror_pair(const Dataset& S1, const Dataset& P1, const Dataset& S2,
                       const Dataset& P2, const Hypothesis& target1,
                       const Hypothesis& target2, const Point& x0,
                       SymmetryReport& report) {
  double dev = 0.0;
  bool ok = !P2.empty();
  const Dataset U1 = dataset_union(S1, P1);
  if (ok) {
    const Dataset U2 = dataset_union(S2, P2);
    ok = multiset_match(U1, U2, kGeometryTolerance, &dev);
  }
  ok = ok && is_consistent(target1, U1) && is_consistent(target2, U1) &&
       target1.predict(x0) != target2.predict(x0);
  report.max_deviation = std::max(report.max_deviation, dev);
  if (!ok) ++report.mismatches;
}

}  // namespace

SymmetryReport symmetry_audit_circle(std::size_t min_fired,
                                     const RngStream& base) {
  constexpr double kEta = 1e-3;
  constexpr std::size_t kTrainSize = 5;
  const Attacker attacker = make_sphere_reflection_attacker(kEta);
  const std::size_t cap = min_fired * 40;

  SymmetryReport report;
  while (report.fired < min_fired && report.attempted < cap) {
    const RngStream tr = base.derive("circle").derive(report.attempted);
    ++report.attempted;
    try {
      RngStream exp_rng = tr.derive("exp");
      const Experiment exp = make_circle_band_experiment(kEta, exp_rng);
      RngStream train_rng = tr.derive("train");
      const Dataset S1 = exp.dist.sample_dataset(kTrainSize, train_rng);
      RngStream test_rng = tr.derive("test");
      const Point x0 = exp.dist.sample_x(test_rng);

      RngStream poison_rng = tr.derive("poison");
      const Dataset P1 = attacker.poison(*exp.dist.target, S1, x0, poison_rng);
      if (P1.empty()) continue;
      ++report.fired;

      const UnitVector axis(x0);
      const UnitVector w2 = reflect_axis(*exp.ctx.w_star, axis);
      const int j2 = 1 - *exp.ctx.j;
      const auto target2 =
          std::make_shared<CircleBandHypothesis>(w2, j2, kEta);
      Dataset S2;
      for (const auto& e : S1.items()) {
        S2.add({reflect_axis(UnitVector(e.x), axis).coords(), 1 - e.y});
      }
      RngStream poison2_rng = tr.derive("poison2");
      const Dataset P2 = attacker.poison(*target2, S2, x0, poison2_rng);

      check_mirror_pair(S1, P1, S2, P2, *exp.dist.target, *target2, x0,
                        report);
    } catch (const std::exception&) {
      ++report.mismatches;
    }
  }
  return report;
}

SymmetryReport symmetry_audit_halfsphere(std::size_t min_fired,
                                         const RngStream& base) {
  constexpr std::size_t kN = 257;
  constexpr double kEpsilon = 0.01;
  constexpr std::size_t kTrainSize = 50;
  const std::size_t cap = min_fired * 40;

  SymmetryReport report;
  while (report.fired < min_fired && report.attempted < cap) {
    const RngStream tr = base.derive("halfsphere").derive(report.attempted);
    ++report.attempted;
    try {
      RngStream exp_rng = tr.derive("exp");
      const Experiment exp = make_margin_lb_experiment(kN, kEpsilon, exp_rng);
      const UnitVector& w1 = *exp.ctx.w_star;
      const double gamma = *exp.ctx.gamma;
      const int j1 = *exp.ctx.j;

      RngStream train_rng = tr.derive("train");
      const Dataset S1 = exp.dist.sample_dataset(kTrainSize, train_rng);

      // The mirror pair is only informative at a sphere-borne test point, so
      // the audit draws one directly instead of waiting out the point mass.
      RngStream test_rng = tr.derive("test");
      const UnitVector u0 = sample_half_sphere(kN - 1, w1, test_rng);
      Point x0 = add(scaled(w1.coords(), gamma), u0.coords());
      const Point front0 = x0;
      x0.push_back(0.0);

      const Attacker attacker1 = make_margin_reflection_attacker(exp.ctx);
      RngStream poison_rng = tr.derive("poison");
      const Dataset P1 = attacker1.poison(*exp.dist.target, S1, x0, poison_rng);
      if (P1.empty()) continue;
      ++report.fired;

      Point w2_raw = reflect_span_plane(w1.coords(), front0, w1);
      const UnitVector w2(scaled(w2_raw, 1.0 / norm(w2_raw)));
      const int j2 = -j1;
      Point w_full2(kN, 0.0);
      for (std::size_t i = 0; i + 1 < kN; ++i) {
        w_full2[i] = static_cast<double>(j2) * w2.coords()[i];
      }
      w_full2[kN - 1] = 1.0;
      const auto target2 = std::make_shared<LinearHypothesis>(
          w_full2, -static_cast<double>(j2) * gamma / 2.0);

      Dataset S2;
      for (const auto& e : S1.items()) {
        if (std::abs(e.x[kN - 1]) > 1e-12) {
          S2.add(e);
          continue;
        }
        const Point fx(e.x.begin(), e.x.end() - 1);
        Point rx = reflect_span_plane(fx, front0, w1);
        rx.push_back(0.0);
        S2.add({std::move(rx), 1 - e.y});
      }

      AttackContext ctx2;
      ctx2.w_star = w2;
      ctx2.gamma = gamma;
      ctx2.epsilon = kEpsilon;
      const Attacker attacker2 = make_margin_reflection_attacker(ctx2);
      RngStream poison2_rng = tr.derive("poison2");
      const Dataset P2 = attacker2.poison(*target2, S2, x0, poison2_rng);

      check_mirror_pair(S1, P1, S2, P2, *exp.dist.target, *target2, x0,
                        report);
    } catch (const std::exception&) {
      ++report.mismatches;
    }
  }
  return report;
}

}  // namespace cleanlabel
