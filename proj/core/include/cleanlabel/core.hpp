// Foundational types shared by every module: datasets as multisets, the
// hypothesis/learner/attacker contracts, labeled distributions, and the
// counter-based RNG used to keep Monte-Carlo runs reproducible under any
// parallel schedule.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cleanlabel {

// ---------------------------------------------------------------------------
// Errors

enum class ErrorKind {
  dimension_mismatch,
  precondition,
  unrealizable,
  degenerate_geometry,
  numerical,
  config,
  policy,  // brute-force size policies and similar hard caps
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// ---------------------------------------------------------------------------
// Points and examples

// A point is a finite real coordinate vector. Dimension is fixed per
// experiment; operations that combine points check it.
using Point = std::vector<double>;

using Label = int;  // values 0 or 1 exactly

struct LabeledExample {
  Point x;
  Label y = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// Canonical ordering used to store datasets: lexicographic on coordinates,
// then label. Gives multisets a unique representation so equality and
// order-invariance are structural.
bool canonical_less(const LabeledExample& a, const LabeledExample& b);

void check_finite(const Point& x);
void check_label(Label y);

double dot(const Point& a, const Point& b);
double norm(const Point& x);
double squared_distance(const Point& a, const Point& b);
Point scaled(const Point& x, double s);
Point add(const Point& a, const Point& b);
Point sub(const Point& a, const Point& b);

// ---------------------------------------------------------------------------
// Dataset: an unordered multiset of labeled examples.
//
// Internally items are kept in canonical sorted order, so two datasets are
// equal as multisets iff their item vectors are equal, and every consumer
// observes a presentation order that does not depend on insertion history.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledExample> items);

  const std::vector<LabeledExample>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  void add(LabeledExample e);

  // Dimension of the stored points; nullopt when empty.
  std::optional<std::size_t> dimension() const;

  bool contains_instance(const Point& x) const;
  std::size_t count_instance(const Point& x) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<LabeledExample> items_;  // canonical order
};

// Multiset union: multiplicities add. Errors on dimension mismatch.
Dataset dataset_union(const Dataset& a, const Dataset& b);

// ---------------------------------------------------------------------------
// Hypotheses

// A deterministic binary predictor. Implementations must return the same
// label for repeated calls on the same point.
class Hypothesis {
 public:
  virtual ~Hypothesis() = default;
  virtual Label predict(const Point& x) const = 0;
  virtual std::string describe() const { return "hypothesis"; }
};

using HypothesisPtr = std::shared_ptr<const Hypothesis>;

// Fraction of S misclassified by h, multiplicity-weighted. Errors on empty S.
double empirical_error(const Hypothesis& h, const Dataset& S);

// True iff h classifies every item of S correctly (vacuously true on empty S).
bool is_consistent(const Hypothesis& h, const Dataset& S);

// ---------------------------------------------------------------------------
// RngStream: splittable counter-based pseudo-randomness.
//
// next_* walk a counter under a fixed key; derive() produces an independent
// child stream from the parent key and a label, without consuming state.
// Deriving the same label twice yields the same stream, which is what lets
// trials and test points own stable sub-streams regardless of evaluation
// order or thread schedule. Integer labels are collision-free; string labels
// go through a 64-bit hash and are collision-resistant in practice.
class RngStream {
 public:
  static RngStream from_seed(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit mantissa.
  double next_double();
  // Uniform integer in [0, bound), unbiased by rejection. bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);
  // Standard normal via Box-Muller (second value cached).
  double next_gaussian();

  RngStream derive(std::uint64_t label) const;
  RngStream derive(std::string_view label) const;

 private:
  RngStream(std::uint64_t key, std::uint64_t counter)
      : key_(key), counter_(counter) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

// ---------------------------------------------------------------------------
// Learners and attackers

// A learner maps a dataset (as a multiset) and an RNG to a hypothesis.
// Given the same multiset and the same rng state, fit must produce a
// hypothesis with identical predictions everywhere.
struct Learner {
  std::string name;
  std::function<HypothesisPtr(const Dataset&, RngStream&)> fit_fn;

  HypothesisPtr fit(const Dataset& S, RngStream& rng) const;
};

struct Budget {
  bool finite = false;
  std::size_t t = 0;

  static Budget Finite(std::size_t t) { return Budget{true, t}; }
  static Budget Unbounded() { return Budget{false, 0}; }
};

// An attacker maps (target, training set, test instance) to a poison
// multiset. The clean-label contract — every emitted example is labeled by
// the target — and the budget bound are enforced by the eval audits.
struct Attacker {
  std::string name;
  Budget budget;
  std::function<Dataset(const Hypothesis&, const Dataset&, const Point&, RngStream&)>
      poison_fn;

  Dataset poison(const Hypothesis& target, const Dataset& S_trn, const Point& x0,
                 RngStream& rng) const;
};

// ---------------------------------------------------------------------------
// Targeted distributions

// Structured metadata about a distribution's support, mainly the margin
// parameter when there is one.
struct DistributionDescriptor {
  std::string support;
  std::optional<double> gamma;
};

// A distribution over labeled examples whose labels come from a fixed target
// hypothesis (realizable setting).
struct TargetedDistribution {
  HypothesisPtr target;
  std::function<Point(RngStream&)> sample_x;
  DistributionDescriptor descriptor;

  LabeledExample sample(RngStream& rng) const;
  Dataset sample_dataset(std::size_t m, RngStream& rng) const;
};

}  // namespace cleanlabel
