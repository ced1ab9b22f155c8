// Learning rules: interval ERMs, closure and VC-1 rules for finite classes,
// the 2-D linear binary-search rule, lattice covering, hard-margin SVM, and
// the three poisoning-robust wrappers (partition majority vote, projection,
// subsampling).
#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cleanlabel/classes.hpp"
#include "cleanlabel/core.hpp"

namespace cleanlabel {

// ---------------------------------------------------------------------------
// Interval rules on [0,1]

// Smallest closed interval containing the positive examples (the intersection
// of every consistent closed interval). Empty hypothesis when there are no
// positives.
IntervalHypothesis fit_min_interval(const Dataset& S);

// Largest open interval consistent with S; with positives that is the full
// gap between the surrounding negatives (sentinels 0 and 1), without
// positives the longest gap between consecutive negatives, leftmost on ties.
IntervalHypothesis fit_max_interval(const Dataset& S);

// One closed interval per maximal run of positives.
UnionOfIntervalsHypothesis fit_union_intervals(const Dataset& S);

// ---------------------------------------------------------------------------
// Finite-class rules

// Pointwise AND of the version space. The class must contain the result
// (intersection-closedness is checked on every call).
HypothesisPtr fit_closure(const Dataset& S, const FiniteClassPtr& cls);

// First row (in class order) consistent with S.
HypothesisPtr fit_finite_erm(const Dataset& S, const FiniteClassPtr& cls);

// Rule for classes of VC dimension one: if S disagrees with the reference
// row f, flip f exactly on the lower set of the maximal disagreeing point
// under the class's disagreement order. Multiple incomparable maximal
// disagreement points are an error.
HypothesisPtr fit_vc1(const Dataset& S, const FiniteClassPtr& cls,
                      std::size_t f_row);

// ---------------------------------------------------------------------------
// 2-D linear rule

// Open subset of the direction circle, kept as disjoint open arcs. Angles are
// taken mod 2*pi; a stored arc is (start, end) with start in [0, 2*pi) and
// end in (start, start + 2*pi]; the full circle is the single arc (0, 2*pi).
class ArcSet {
 public:
  static ArcSet full();
  static ArcSet empty_set();

  bool is_empty() const noexcept { return arcs_.empty(); }
  bool is_full() const noexcept;
  std::size_t arc_count() const noexcept { return arcs_.size(); }
  double total_length() const;

  bool contains(double angle) const;
  // Does the set meet the open angular interval (lo, hi)? Requires
  // lo < hi <= lo + 2*pi.
  bool nonempty_in(double lo, double hi) const;

  // Intersects with the open half circle of directions within pi/2 of
  // center_angle.
  void intersect_open_halfcircle(double center_angle);

  const std::vector<std::pair<double, double>>& arcs() const noexcept {
    return arcs_;
  }

 private:
  std::vector<std::pair<double, double>> arcs_;
};

// Directions u for which some offset b makes 1{<u,x>+b >= 0} consistent with
// S. Pairwise constraints are reduced to convex-hull vertices of each label
// class before intersecting half circles.
ArcSet consistent_arcs(const Dataset& S);

struct Linear2dInfo {
  bool beta_zero = false;    // direction angle 0 was already consistent
  bool single_arc = true;    // consistent direction set was one arc (or all/none)
  std::size_t iterations = 0;
  double angle = 0.0;
  double offset = 0.0;
};

// Tests direction angle 0 first, then bisects [0, 2*pi] keeping the half that
// still meets the consistent arc set, stopping at the first consistent
// midpoint. The offset is the midpoint of the feasible interval clamped to
// [-2, 2]; instances must satisfy ||x|| <= 2.
std::shared_ptr<const LinearHypothesis> fit_linear2d(
    const Dataset& S, Linear2dInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Lattice covering rule

// Number of lattice cells (cubes of side gamma/sqrt(n)) that intersect the
// closed unit ball. Errors beyond 10^7 cells.
std::size_t covering_cell_count(std::size_t n, double gamma);

class CoveringHypothesis : public Hypothesis {
 public:
  CoveringHypothesis(std::size_t n, double gamma, std::uint64_t coin_key);

  std::size_t dimension() const noexcept { return n_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t occupied_cells() const noexcept { return cells_.size(); }

  std::vector<long long> cell_of(const Point& x) const;

  // Occupied cell: label of the training point nearest to x within the cell
  // (canonical order breaks ties). Unoccupied cell: a coin determined by the
  // fit-time key and the cell index.
  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  friend std::shared_ptr<const CoveringHypothesis> fit_covering(
      const Dataset& S, std::size_t n, double gamma, RngStream& rng);

  struct CellHash {
    std::size_t operator()(const std::vector<long long>& c) const;
  };

  std::size_t n_;
  double gamma_;
  double spacing_;
  std::uint64_t coin_key_;
  std::unordered_map<std::vector<long long>, std::vector<LabeledExample>,
                     CellHash>
      cells_;
};

std::shared_ptr<const CoveringHypothesis> fit_covering(const Dataset& S,
                                                       std::size_t n,
                                                       double gamma,
                                                       RngStream& rng);

// ---------------------------------------------------------------------------
// Hard-margin SVM (implemented in svm.cpp)

// Maximum-margin separator via SMO on the dual with most-violating-pair
// selection, KKT gap 1e-9. Duplicate instances are merged; conflicting labels
// are an error; a single-class sample yields a separator constant on the unit
// ball.
std::shared_ptr<const LinearHypothesis> fit_svm(const Dataset& S);

// ---------------------------------------------------------------------------
// Robust wrappers

class MajorityHypothesis : public Hypothesis {
 public:
  explicit MajorityHypothesis(std::vector<HypothesisPtr> members);

  const std::vector<HypothesisPtr>& members() const noexcept {
    return members_;
  }
  Label predict(const Point& x) const override;  // ties go to 1
  std::string describe() const override;

 private:
  std::vector<HypothesisPtr> members_;
};

struct PartitionMajorityInfo {
  std::size_t blocks = 0;
  std::size_t block_size = 0;
  std::vector<std::vector<LabeledExample>> block_examples;
};

// Splits a random permutation of S into 10t+1 equal blocks (remainder
// dropped), fits the base rule per block, votes.
HypothesisPtr fit_partition_majority(const Dataset& S, const Learner& base,
                                     std::size_t t, RngStream& rng,
                                     PartitionMajorityInfo* info = nullptr);

// Splits into 10*k*t+1 blocks where k is the class's projection number, fits
// a consistent row per block, and returns the first row that agrees with the
// block majority wherever fewer than 1/k of the blocks dissent.
HypothesisPtr fit_projection(const Dataset& S, const FiniteClassPtr& cls,
                             std::size_t t, RngStream& rng);

// Fits the base rule on floor(|S| * epsilon / (3t)) examples drawn from S
// with replacement.
HypothesisPtr fit_subsample(const Dataset& S, const Learner& base,
                            double epsilon, std::size_t t, RngStream& rng);

// Consistent sphere-circles hypothesis for d spheres: the marked circle is
// pinned by the on-sphere positives (or negatives, trying label 1 for the
// circle first), deterministic among the consistent choices.
std::shared_ptr<const SphereCirclesHypothesis> fit_circle_erm(const Dataset& S,
                                                              std::size_t d);

// ---------------------------------------------------------------------------
// Learner handles

Learner make_min_interval_learner();
Learner make_max_interval_learner();
Learner make_union_intervals_learner();
Learner make_closure_learner(FiniteClassPtr cls);
Learner make_finite_erm_learner(FiniteClassPtr cls);
Learner make_vc1_learner(FiniteClassPtr cls, std::size_t f_row);
Learner make_linear2d_learner();
Learner make_covering_learner(std::size_t n, double gamma);
Learner make_svm_learner();
Learner make_partition_majority_learner(Learner base, std::size_t t);
Learner make_projection_learner(FiniteClassPtr cls, std::size_t t);
Learner make_subsample_learner(Learner base, double epsilon, std::size_t t);
Learner make_circle_erm_learner(std::size_t d);

}  // namespace cleanlabel
