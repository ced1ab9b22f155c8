// Concrete hypothesis classes, the labeled-distribution constructions used by
// the attack experiments, and brute-force combinatorial oracles for finite
// classes (VC dimension, star numbers, projection number).
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cleanlabel/core.hpp"
#include "cleanlabel/geometry.hpp"

namespace cleanlabel {

// ---------------------------------------------------------------------------
// Hypotheses on [0,1]

enum class IntervalKind { empty, open, closed };

class IntervalHypothesis : public Hypothesis {
 public:
  IntervalHypothesis() = default;  // empty
  IntervalHypothesis(IntervalKind kind, double a, double b);

  static IntervalHypothesis empty() { return IntervalHypothesis(); }
  static IntervalHypothesis open(double a, double b) {
    return IntervalHypothesis(IntervalKind::open, a, b);
  }
  static IntervalHypothesis closed(double a, double b) {
    return IntervalHypothesis(IntervalKind::closed, a, b);
  }

  IntervalKind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double length() const noexcept {
    return kind_ == IntervalKind::empty ? 0.0 : b_ - a_;
  }

  bool contains(double x) const;
  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  IntervalKind kind_ = IntervalKind::empty;
  double a_ = 0.0, b_ = 0.0;
};

class UnionOfIntervalsHypothesis : public Hypothesis {
 public:
  UnionOfIntervalsHypothesis() = default;  // empty union
  explicit UnionOfIntervalsHypothesis(std::vector<IntervalHypothesis> intervals);

  const std::vector<IntervalHypothesis>& intervals() const noexcept {
    return intervals_;
  }
  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  std::vector<IntervalHypothesis> intervals_;  // sorted, pairwise disjoint
};

// ---------------------------------------------------------------------------
// Linear and spherical hypotheses

// 1{<w,x> + b >= 0} with w != 0.
class LinearHypothesis : public Hypothesis {
 public:
  LinearHypothesis(Point w, double b);

  const Point& w() const noexcept { return w_; }
  double b() const noexcept { return b_; }
  double decision_value(const Point& x) const { return dot(w_, x) + b_; }

  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  Point w_;
  double b_ = 0.0;
};

// One unit sphere per index i in [1..d], centered at 3i*e1 in R^3. Each
// carries a marked circle C_{q_i} labeled s_i; the rest of the sphere is
// labeled 1-s_i; the origin (and any point on no sphere) is labeled 0.
class SphereCirclesHypothesis : public Hypothesis {
 public:
  SphereCirclesHypothesis(std::vector<UnitVector> q_local, std::vector<Label> s);

  std::size_t d() const noexcept { return q_local_.size(); }
  const UnitVector& q_local(std::size_t i) const { return q_local_.at(i); }
  Label s(std::size_t i) const { return s_.at(i); }
  static Point sphere_center(std::size_t i);  // i is 0-based internally

  // Index of the sphere x lies on (within 1e-9), if any.
  std::optional<std::size_t> sphere_index(const Point& x) const;
  bool on_marked_circle(std::size_t i, const Point& x) const;

  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  std::vector<UnitVector> q_local_;
  std::vector<Label> s_;
};

// Target family for the 3-D circle construction: for j=1 the positive region
// is {<w,x> >= 1/2} (the marked circle sits exactly on this boundary, so the
// comparison carries a 1e-9 slack to absorb rounding); for j=0 it is
// {<w,x> <= (1-eta)/2}, whose boundary clears the circle by eta/2.
class CircleBandHypothesis : public Hypothesis {
 public:
  CircleBandHypothesis(UnitVector w, int j, double eta);

  const UnitVector& w() const noexcept { return w_; }
  int j() const noexcept { return j_; }
  double eta() const noexcept { return eta_; }

  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  UnitVector w_;
  int j_;
  double eta_;
};

// ---------------------------------------------------------------------------
// Finite classes

// A finite hypothesis class over an abstract finite domain. Domain point i is
// embedded as the 1-D point {double(i)} so finite classes plug into the same
// dataset machinery as everything else.
class FiniteClass {
 public:
  FiniteClass(std::vector<std::string> names,
              std::vector<std::vector<Label>> table);

  std::size_t domain_size() const noexcept { return names_.size(); }
  std::size_t num_hypotheses() const noexcept { return table_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::vector<Label>>& table() const noexcept {
    return table_;
  }
  Label label(std::size_t row, std::size_t col) const {
    return table_.at(row).at(col);
  }

  Point domain_point(std::size_t i) const;
  std::optional<std::size_t> index_of_point(const Point& x) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<Label>> table_;
};

using FiniteClassPtr = std::shared_ptr<const FiniteClass>;

class FiniteRowHypothesis : public Hypothesis {
 public:
  FiniteRowHypothesis(FiniteClassPtr cls, std::size_t row);

  const FiniteClassPtr& cls() const noexcept { return cls_; }
  std::size_t row() const noexcept { return row_; }

  // Points outside the embedded domain are labeled 0.
  Label predict(const Point& x) const override;
  std::string describe() const override;

 private:
  FiniteClassPtr cls_;
  std::size_t row_;
};

std::string finite_class_to_json(const FiniteClass& cls);
FiniteClass finite_class_from_json(const std::string& json_text);

// ---------------------------------------------------------------------------
// Margin metadata

struct MarginDescriptor {
  double gamma = 0.0;
  std::shared_ptr<const LinearHypothesis> target;
};

// (2y-1)(<w,x> + b) >= gamma * ||w|| / 2
bool margin_satisfied(const MarginDescriptor& md, const LabeledExample& e);

// ---------------------------------------------------------------------------
// Densities on [0,1]

class PiecewiseDensity {
 public:
  struct Piece {
    double lo, hi, weight;
  };

  static PiecewiseDensity uniform();
  explicit PiecewiseDensity(std::vector<Piece> pieces);

  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double sample(RngStream& rng) const;

 private:
  std::vector<Piece> pieces_;
};

// ---------------------------------------------------------------------------
// Experiments

// Construction metadata the proof-derived attackers need. The experiment
// factories fill exactly the fields their attacker reads; everything is
// consistent with the distribution's target by construction.
struct AttackContext {
  std::optional<UnitVector> w_star;  // hidden direction
  std::optional<double> b_star;
  std::optional<int> j;  // +1 / -1 group selector
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<double> eta;
  std::shared_ptr<const SphereCirclesHypothesis> circles;
  FiniteClassPtr finite_class;
  std::optional<std::size_t> i_star;
};

struct Experiment {
  TargetedDistribution dist;
  AttackContext ctx;
};

// Labels drawn from h_star over a density on [0,1].
TargetedDistribution make_interval_experiment(const IntervalHypothesis& h_star,
                                              const PiecewiseDensity& density);

// Mass 1-8*epsilon at -e1 (label 0), mass 8*epsilon uniform on the half
// sphere {<x,e1> >= 0} (label 1); target 1{<e1,x> >= -1/16} (margin 1/8).
TargetedDistribution make_halfsphere_experiment(std::size_t n, double epsilon);

// High-dimensional margin construction: hidden (w*, j) with w* on the unit
// sphere of R^{n-1}; instances are (x, z) in R^n with z in {0,1}; mass
// 1-8*epsilon at e_n (label 1), the rest uniform on the shifted half sphere
// {gamma*w* + u : ||u||=1, <u,w*> >= 0} x {0}, labeled 1 iff j=+1.
Experiment make_margin_lb_experiment(std::size_t n, double epsilon,
                                     RngStream& rng);

// d marked circles with mass zeta = min(1/d, t/(8m)) each, remainder at the
// origin; hidden (q_i, s_i) drawn at construction.
Experiment make_circles_experiment(std::size_t d, std::size_t t, std::size_t m,
                                   RngStream& rng);

// 3-D circle construction: hidden (w, j); all mass uniform on the circle
// C_w with constant label j.
Experiment make_circle_band_experiment(double eta, RngStream& rng);

// Finite single-flip construction: target = row i_star, test distribution
// uniform over the domain minus i_star.
Experiment make_hollow_star_experiment(FiniteClassPtr cls, std::size_t i_star);

// Uniform on the unit ball of R^n with the band |<w*,x>| < gamma/2 removed;
// hidden unit w* drawn at construction, b* = 0.
Experiment make_margin_disk_experiment(std::size_t n, double gamma,
                                       RngStream& rng);

// ---------------------------------------------------------------------------
// Brute-force combinatorial oracles

// Size of the largest shattered subset, by exhaustive enumeration.
std::size_t finite_vc_dimension(const FiniteClass& cls);

// Largest s admitting points x_1..x_s and hypotheses h_0, h_1..h_s with
// DIS({h_0,h_i}) restricted to the points equal to {x_i}. Domain <= 16.
std::size_t finite_star_number(const FiniteClass& cls);

// Largest size of an unrealizable labeled subset all of whose single-flip
// neighbors are realizable; nullopt when every labeling is realizable.
std::optional<std::size_t> finite_hollow_star_number(const FiniteClass& cls);

struct HollowStarConstruction {
  FiniteClassPtr cls;
  std::vector<LabeledExample> hollow_set;  // the all-zeros labeling
};

// k domain points; row i flips exactly bit i of the all-zeros labeling. The
// all-zeros set itself is unrealizable and every neighbor is a row. k >= 3.
HollowStarConstruction make_hollow_star_class(std::size_t k);

// leq(x, x') <=> every row disagreeing with f at x' also disagrees at x.
class PartialOrder {
 public:
  PartialOrder(std::size_t n, std::vector<std::uint8_t> mat);
  bool leq(std::size_t x, std::size_t x_prime) const {
    return mat_[x * n_ + x_prime] != 0;
  }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> mat_;
};

PartialOrder partial_order_leq(const FiniteClass& cls, std::size_t f_row);

// Smallest k >= 2 such that for every multiset of rows (up to
// max_multiset_size) some row of the class agrees with the multiset majority
// on the region where fewer than |H'|/k members dissent. Any multiset of size
// s never fails at levels k > s, so the cap bounds the search exactly for
// classes whose worst witnesses are small.
std::size_t compute_projection_number(const FiniteClass& cls,
                                      std::size_t max_multiset_size = 12);

}  // namespace cleanlabel
