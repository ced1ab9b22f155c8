#include "cleanlabel/classes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace cleanlabel {

namespace {

constexpr double kCircleBoundarySlack = 1e-9;

void check_unit_interval(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    fail(ErrorKind::precondition,
         std::string(what) + " must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// IntervalHypothesis

IntervalHypothesis::IntervalHypothesis(IntervalKind kind, double a, double b)
    : kind_(kind), a_(a), b_(b) {
  if (kind_ == IntervalKind::empty) {
    a_ = 0.0;
    b_ = 0.0;
    return;
  }
  check_unit_interval(a_, "interval endpoint a");
  check_unit_interval(b_, "interval endpoint b");
  if (a_ > b_) {
    fail(ErrorKind::precondition, "interval endpoints must satisfy a <= b");
  }
}

bool IntervalHypothesis::contains(double x) const {
  switch (kind_) {
    case IntervalKind::empty:
      return false;
    case IntervalKind::open:
      return a_ < x && x < b_;
    case IntervalKind::closed:
      return a_ <= x && x <= b_;
  }
  return false;
}

Label IntervalHypothesis::predict(const Point& x) const {
  if (x.size() != 1) {
    fail(ErrorKind::dimension_mismatch,
         "interval hypothesis expects 1-D points");
  }
  return contains(x[0]) ? 1 : 0;
}

std::string IntervalHypothesis::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case IntervalKind::empty:
      os << "interval(empty)";
      break;
    case IntervalKind::open:
      os << "interval(" << a_ << "," << b_ << ")";
      break;
    case IntervalKind::closed:
      os << "interval[" << a_ << "," << b_ << "]";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// UnionOfIntervalsHypothesis

UnionOfIntervalsHypothesis::UnionOfIntervalsHypothesis(
    std::vector<IntervalHypothesis> intervals)
    : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_) {
    if (iv.kind() == IntervalKind::empty) {
      fail(ErrorKind::precondition,
           "union components must be non-empty intervals");
    }
  }
  std::sort(intervals_.begin(), intervals_.end(),
            [](const IntervalHypothesis& l, const IntervalHypothesis& r) {
              return l.a() < r.a() || (l.a() == r.a() && l.b() < r.b());
            });
  for (std::size_t i = 0; i + 1 < intervals_.size(); ++i) {
    const auto& cur = intervals_[i];
    const auto& nxt = intervals_[i + 1];
    const bool separated =
        cur.b() < nxt.a() ||
        (cur.b() == nxt.a() && !(cur.contains(cur.b()) && nxt.contains(nxt.a())));
    if (!separated) {
      fail(ErrorKind::precondition, "union components must be disjoint");
    }
  }
}

Label UnionOfIntervalsHypothesis::predict(const Point& x) const {
  if (x.size() != 1) {
    fail(ErrorKind::dimension_mismatch,
         "union-of-intervals hypothesis expects 1-D points");
  }
  for (const auto& iv : intervals_) {
    if (iv.contains(x[0])) return 1;
  }
  return 0;
}

std::string UnionOfIntervalsHypothesis::describe() const {
  std::ostringstream os;
  os << "union_of_intervals(" << intervals_.size() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// LinearHypothesis

LinearHypothesis::LinearHypothesis(Point w, double b) : w_(std::move(w)), b_(b) {
  check_finite(w_);
  if (!std::isfinite(b_)) {
    fail(ErrorKind::precondition, "linear offset must be finite");
  }
  if (norm(w_) == 0.0) {
    fail(ErrorKind::precondition, "linear weight vector must be nonzero");
  }
}

Label LinearHypothesis::predict(const Point& x) const {
  if (x.size() != w_.size()) {
    fail(ErrorKind::dimension_mismatch, "linear hypothesis dimension mismatch");
  }
  return decision_value(x) >= 0.0 ? 1 : 0;
}

std::string LinearHypothesis::describe() const {
  std::ostringstream os;
  os << "linear(n=" << w_.size() << ",b=" << b_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// SphereCirclesHypothesis

SphereCirclesHypothesis::SphereCirclesHypothesis(std::vector<UnitVector> q_local,
                                                 std::vector<Label> s)
    : q_local_(std::move(q_local)), s_(std::move(s)) {
  if (q_local_.empty() || q_local_.size() != s_.size()) {
    fail(ErrorKind::precondition,
         "need one defining point and one label per sphere");
  }
  for (const auto& q : q_local_) {
    if (q.dimension() != 3) {
      fail(ErrorKind::dimension_mismatch, "sphere construction lives in R^3");
    }
  }
  for (Label v : s_) check_label(v);
}

Point SphereCirclesHypothesis::sphere_center(std::size_t i) {
  return Point{3.0 * static_cast<double>(i + 1), 0.0, 0.0};
}

std::optional<std::size_t> SphereCirclesHypothesis::sphere_index(
    const Point& x) const {
  if (x.size() != 3) {
    fail(ErrorKind::dimension_mismatch, "sphere construction lives in R^3");
  }
  const long long cand = std::llround(x[0] / 3.0);
  if (cand < 1 || cand > static_cast<long long>(q_local_.size())) {
    return std::nullopt;
  }
  const std::size_t i = static_cast<std::size_t>(cand - 1);
  const Point c = sphere_center(i);
  const double dist = std::sqrt(squared_distance(x, c));
  if (std::abs(dist - 1.0) > kGeometryTolerance) return std::nullopt;
  return i;
}

bool SphereCirclesHypothesis::on_marked_circle(std::size_t i,
                                               const Point& x) const {
  const Point local = sub(x, sphere_center(i));
  const double plane = dot(q_local_.at(i).coords(), local);
  return std::abs(plane - 0.5) <= kGeometryTolerance;
}

Label SphereCirclesHypothesis::predict(const Point& x) const {
  const auto idx = sphere_index(x);
  if (!idx) return 0;
  const bool on_circle = on_marked_circle(*idx, x);
  return on_circle ? s_[*idx] : 1 - s_[*idx];
}

std::string SphereCirclesHypothesis::describe() const {
  std::ostringstream os;
  os << "sphere_circles(d=" << q_local_.size() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// CircleBandHypothesis

CircleBandHypothesis::CircleBandHypothesis(UnitVector w, int j, double eta)
    : w_(std::move(w)), j_(j), eta_(eta) {
  if (w_.dimension() != 3) {
    fail(ErrorKind::dimension_mismatch, "circle band construction lives in R^3");
  }
  if (j_ != 0 && j_ != 1) {
    fail(ErrorKind::precondition, "band selector j must be 0 or 1");
  }
  if (!std::isfinite(eta_) || eta_ <= 0.0 || eta_ >= 0.5) {
    fail(ErrorKind::precondition, "band width eta must lie in (0, 1/2)");
  }
}

Label CircleBandHypothesis::predict(const Point& x) const {
  if (x.size() != 3) {
    fail(ErrorKind::dimension_mismatch, "circle band construction lives in R^3");
  }
  const double v = dot(w_.coords(), x);
  if (j_ == 1) {
    return v >= 0.5 - kCircleBoundarySlack ? 1 : 0;
  }
  return v <= (1.0 - eta_) / 2.0 ? 1 : 0;
}

std::string CircleBandHypothesis::describe() const {
  std::ostringstream os;
  os << "circle_band(j=" << j_ << ",eta=" << eta_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// FiniteClass

FiniteClass::FiniteClass(std::vector<std::string> names,
                         std::vector<std::vector<Label>> table)
    : names_(std::move(names)), table_(std::move(table)) {
  if (names_.empty()) {
    fail(ErrorKind::precondition, "finite class needs a non-empty domain");
  }
  if (names_.size() > 24) {
    fail(ErrorKind::policy, "finite domains are capped at 24 points");
  }
  if (table_.empty()) {
    fail(ErrorKind::precondition, "finite class needs at least one hypothesis");
  }
  if (table_.size() > 10000) {
    fail(ErrorKind::policy, "finite classes are capped at 10000 hypotheses");
  }
  {
    auto sorted = names_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(ErrorKind::precondition, "domain point names must be distinct");
    }
  }
  for (const auto& row : table_) {
    if (row.size() != names_.size()) {
      fail(ErrorKind::precondition,
           "every hypothesis row must cover the whole domain");
    }
    for (Label v : row) check_label(v);
  }
  {
    auto sorted = table_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(ErrorKind::precondition, "hypothesis rows must be distinct");
    }
  }
}

Point FiniteClass::domain_point(std::size_t i) const {
  if (i >= names_.size()) {
    fail(ErrorKind::precondition, "domain index out of range");
  }
  return Point{static_cast<double>(i)};
}

std::optional<std::size_t> FiniteClass::index_of_point(const Point& x) const {
  if (x.size() != 1) return std::nullopt;
  if (!std::isfinite(x[0]) || x[0] < 0.0) return std::nullopt;
  const long long i = std::llround(x[0]);
  if (i < 0 || i >= static_cast<long long>(names_.size())) return std::nullopt;
  if (static_cast<double>(i) != x[0]) return std::nullopt;
  return static_cast<std::size_t>(i);
}

FiniteRowHypothesis::FiniteRowHypothesis(FiniteClassPtr cls, std::size_t row)
    : cls_(std::move(cls)), row_(row) {
  if (!cls_) fail(ErrorKind::precondition, "null finite class");
  if (row_ >= cls_->num_hypotheses()) {
    fail(ErrorKind::precondition, "hypothesis row out of range");
  }
}

Label FiniteRowHypothesis::predict(const Point& x) const {
  const auto idx = cls_->index_of_point(x);
  if (!idx) return 0;
  return cls_->label(row_, *idx);
}

std::string FiniteRowHypothesis::describe() const {
  std::ostringstream os;
  os << "finite_row(" << row_ << ")";
  return os.str();
}

std::string finite_class_to_json(const FiniteClass& cls) {
  nlohmann::json j;
  j["names"] = cls.names();
  j["table"] = cls.table();
  return j.dump();
}

FiniteClass finite_class_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("invalid finite class JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("names") || !j.contains("table")) {
    fail(ErrorKind::config, "finite class JSON needs 'names' and 'table'");
  }
  try {
    auto names = j["names"].get<std::vector<std::string>>();
    auto table = j["table"].get<std::vector<std::vector<Label>>>();
    return FiniteClass(std::move(names), std::move(table));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("invalid finite class JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Margin metadata

bool margin_satisfied(const MarginDescriptor& md, const LabeledExample& e) {
  if (!md.target) fail(ErrorKind::precondition, "margin descriptor needs a target");
  const double scale = norm(md.target->w());
  const double signed_value =
      (2.0 * e.y - 1.0) * md.target->decision_value(e.x) / scale;
  return signed_value >= md.gamma / 2.0 - kGeometryTolerance;
}

// ---------------------------------------------------------------------------
// PiecewiseDensity

PiecewiseDensity PiecewiseDensity::uniform() {
  return PiecewiseDensity({Piece{0.0, 1.0, 1.0}});
}

PiecewiseDensity::PiecewiseDensity(std::vector<Piece> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) {
    fail(ErrorKind::precondition, "density needs at least one piece");
  }
  double total = 0.0;
  for (const auto& p : pieces_) {
    check_unit_interval(p.lo, "density piece lo");
    check_unit_interval(p.hi, "density piece hi");
    if (p.lo >= p.hi) {
      fail(ErrorKind::precondition, "density piece must have lo < hi");
    }
    if (!std::isfinite(p.weight) || p.weight <= 0.0) {
      fail(ErrorKind::precondition, "density piece weight must be positive");
    }
    total += p.weight;
  }
  std::sort(pieces_.begin(), pieces_.end(),
            [](const Piece& l, const Piece& r) { return l.lo < r.lo; });
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (pieces_[i].hi > pieces_[i + 1].lo) {
      fail(ErrorKind::precondition, "density pieces must not overlap");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorKind::precondition, "density weights must sum to 1");
  }
}

double PiecewiseDensity::sample(RngStream& rng) const {
  const double u = rng.next_double();
  double acc = 0.0;
  for (const auto& p : pieces_) {
    if (u < acc + p.weight || &p == &pieces_.back()) {
      double frac = (u - acc) / p.weight;
      frac = std::clamp(frac, 0.0, 1.0 - 1e-16);
      return p.lo + frac * (p.hi - p.lo);
    }
    acc += p.weight;
  }
  return pieces_.back().lo;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

Point sample_unit_ball(std::size_t n, RngStream& rng) {
  const UnitVector dir = sample_sphere(n, rng);
  const double r =
      std::pow(rng.next_double(), 1.0 / static_cast<double>(n));
  return scaled(dir.coords(), r);
}

}  // namespace

TargetedDistribution make_interval_experiment(const IntervalHypothesis& h_star,
                                              const PiecewiseDensity& density) {
  TargetedDistribution dist;
  dist.target = std::make_shared<IntervalHypothesis>(h_star);
  dist.sample_x = [density](RngStream& rng) { return Point{density.sample(rng)}; };
  dist.descriptor = DistributionDescriptor{"interval", std::nullopt};
  return dist;
}

TargetedDistribution make_halfsphere_experiment(std::size_t n, double epsilon) {
  if (n < 3) {
    fail(ErrorKind::precondition, "half-sphere experiment needs n >= 3");
  }
  if (!(epsilon > 0.0) || !(epsilon < 0.125)) {
    fail(ErrorKind::precondition, "epsilon must lie in (0, 1/8)");
  }
  constexpr double kGamma = 0.125;
  Point w(n, 0.0);
  w[0] = 1.0;
  TargetedDistribution dist;
  dist.target = std::make_shared<LinearHypothesis>(w, kGamma / 2.0);
  dist.sample_x = [n, epsilon](RngStream& rng) {
    if (rng.next_double() < 1.0 - 8.0 * epsilon) {
      Point x(n, 0.0);
      x[0] = -1.0;
      return x;
    }
    Point axis(n, 0.0);
    axis[0] = 1.0;
    return sample_half_sphere(n, UnitVector(axis), rng).coords();
  };
  dist.descriptor = DistributionDescriptor{"halfsphere", kGamma};
  return dist;
}

Experiment make_margin_lb_experiment(std::size_t n, double epsilon,
                                     RngStream& rng) {
  if (n < 3) {
    fail(ErrorKind::precondition, "margin lower-bound experiment needs n >= 3");
  }
  if (!(epsilon > 0.0) || !(epsilon < 0.125)) {
    fail(ErrorKind::precondition, "epsilon must lie in (0, 1/8)");
  }
  constexpr double kGamma = 0.125;
  const UnitVector w_star = sample_sphere(n - 1, rng);
  const int j = rng.next_below(2) == 0 ? 1 : -1;

  Point w_full(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    w_full[i] = static_cast<double>(j) * w_star.coords()[i];
  }
  w_full[n - 1] = 1.0;
  const double b = -static_cast<double>(j) * kGamma / 2.0;

  Experiment exp;
  exp.dist.target = std::make_shared<LinearHypothesis>(w_full, b);
  exp.dist.sample_x = [n, epsilon, w_star](RngStream& r) {
    if (r.next_double() < 1.0 - 8.0 * epsilon) {
      Point x(n, 0.0);
      x[n - 1] = 1.0;
      return x;
    }
    const UnitVector u = sample_half_sphere(n - 1, w_star, r);
    Point x = add(scaled(w_star.coords(), kGamma), u.coords());
    x.push_back(0.0);
    return x;
  };
  exp.dist.descriptor = DistributionDescriptor{"margin_lb", kGamma};
  exp.ctx.w_star = w_star;
  exp.ctx.j = j;
  exp.ctx.gamma = kGamma;
  exp.ctx.epsilon = epsilon;
  return exp;
}

Experiment make_circles_experiment(std::size_t d, std::size_t t, std::size_t m,
                                   RngStream& rng) {
  if (d < 1 || t < 1 || m < 1) {
    fail(ErrorKind::precondition, "circles experiment needs d, t, m >= 1");
  }
  std::vector<UnitVector> q_local;
  std::vector<Label> s;
  q_local.reserve(d);
  s.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    q_local.emplace_back(sample_sphere(3, rng));
    s.push_back(static_cast<Label>(rng.next_below(2)));
  }
  auto target = std::make_shared<SphereCirclesHypothesis>(std::move(q_local),
                                                          std::move(s));
  const double zeta =
      std::min(1.0 / static_cast<double>(d),
               static_cast<double>(t) / (8.0 * static_cast<double>(m)));
  const double circle_mass = zeta * static_cast<double>(d);

  Experiment exp;
  exp.dist.target = target;
  exp.dist.sample_x = [target, d, circle_mass](RngStream& r) {
    if (r.next_double() < circle_mass) {
      const std::size_t i = static_cast<std::size_t>(r.next_below(d));
      const double theta = 2.0 * std::numbers::pi * r.next_double();
      const SphereCircle circle(target->q_local(i));
      const Point local = circle_point(circle, theta).coords();
      return add(local, SphereCirclesHypothesis::sphere_center(i));
    }
    return Point{0.0, 0.0, 0.0};
  };
  exp.dist.descriptor = DistributionDescriptor{"sphere_circles", std::nullopt};
  exp.ctx.circles = target;
  return exp;
}

Experiment make_circle_band_experiment(double eta, RngStream& rng) {
  if (!std::isfinite(eta) || eta <= 0.0 || eta >= 0.5) {
    fail(ErrorKind::precondition, "band width eta must lie in (0, 1/2)");
  }
  const UnitVector w = sample_sphere(3, rng);
  const int j = static_cast<int>(rng.next_below(2));

  Experiment exp;
  exp.dist.target = std::make_shared<CircleBandHypothesis>(w, j, eta);
  exp.dist.sample_x = [w](RngStream& r) {
    const double theta = 2.0 * std::numbers::pi * r.next_double();
    return circle_point(SphereCircle(w), theta).coords();
  };
  exp.dist.descriptor = DistributionDescriptor{"circle_band", std::nullopt};
  exp.ctx.w_star = w;
  exp.ctx.j = j;
  exp.ctx.eta = eta;
  return exp;
}

Experiment make_hollow_star_experiment(FiniteClassPtr cls, std::size_t i_star) {
  if (!cls) fail(ErrorKind::precondition, "null finite class");
  const std::size_t n = cls->domain_size();
  if (n < 2) {
    fail(ErrorKind::precondition, "finite experiment needs at least two points");
  }
  if (i_star >= cls->num_hypotheses() || i_star >= n) {
    fail(ErrorKind::precondition, "target row out of range");
  }

  Experiment exp;
  exp.dist.target = std::make_shared<FiniteRowHypothesis>(cls, i_star);
  exp.dist.sample_x = [cls, i_star, n](RngStream& r) {
    std::size_t idx = static_cast<std::size_t>(r.next_below(n - 1));
    if (idx >= i_star) ++idx;
    return cls->domain_point(idx);
  };
  exp.dist.descriptor = DistributionDescriptor{"finite", std::nullopt};
  exp.ctx.finite_class = std::move(cls);
  exp.ctx.i_star = i_star;
  return exp;
}

Experiment make_margin_disk_experiment(std::size_t n, double gamma,
                                       RngStream& rng) {
  if (n < 2) {
    fail(ErrorKind::precondition, "margin disk experiment needs n >= 2");
  }
  if (!std::isfinite(gamma) || gamma <= 0.0 || gamma >= 1.0) {
    fail(ErrorKind::precondition, "margin gamma must lie in (0, 1)");
  }
  const UnitVector w_star = sample_sphere(n, rng);

  Experiment exp;
  exp.dist.target = std::make_shared<LinearHypothesis>(w_star.coords(), 0.0);
  exp.dist.sample_x = [w_star, n, gamma](RngStream& r) {
    for (int tries = 0; tries < 1000000; ++tries) {
      Point x = sample_unit_ball(n, r);
      if (std::abs(dot(w_star.coords(), x)) >= gamma / 2.0) return x;
    }
    fail(ErrorKind::numerical, "margin band rejection sampling stalled");
  };
  exp.dist.descriptor = DistributionDescriptor{"margin_disk", gamma};
  exp.ctx.w_star = w_star;
  exp.ctx.b_star = 0.0;
  exp.ctx.gamma = gamma;
  return exp;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

namespace {

std::vector<std::uint32_t> row_masks(const FiniteClass& cls) {
  const std::size_t n = cls.domain_size();
  std::vector<std::uint32_t> masks;
  masks.reserve(cls.num_hypotheses());
  for (const auto& row : cls.table()) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (row[i] == 1) m |= (1u << i);
    }
    masks.push_back(m);
  }
  return masks;
}

double binomial_estimate(std::size_t n, std::size_t k) {
  double v = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    v *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return v;
}

// Projects the bits of `mask` selected by the sorted positions to a compact
// pattern integer.
std::uint32_t project_mask(std::uint32_t mask,
                           const std::vector<std::size_t>& positions) {
  std::uint32_t out = 0;
  for (std::size_t b = 0; b < positions.size(); ++b) {
    if (mask & (1u << positions[b])) out |= (1u << b);
  }
  return out;
}

}  // namespace

std::size_t finite_vc_dimension(const FiniteClass& cls) {
  const std::size_t n = cls.domain_size();
  const auto masks = row_masks(cls);
  const std::size_t k = masks.size();

  std::size_t d_max = 0;
  while ((1ull << (d_max + 1)) <= k && d_max + 1 <= n) ++d_max;

  std::size_t vc = 0;
  for (std::size_t d = 1; d <= d_max; ++d) {
    if (binomial_estimate(n, d) * static_cast<double>(k * d) > 5e8) {
      fail(ErrorKind::policy, "class too large for brute-force VC dimension");
    }
    bool found = false;
    std::vector<std::size_t> subset(d);
    std::function<bool(std::size_t, std::size_t)> rec =
        [&](std::size_t depth, std::size_t start) -> bool {
      if (depth == d) {
        std::vector<bool> seen(1u << d, false);
        std::size_t distinct = 0;
        for (std::uint32_t m : masks) {
          const std::uint32_t p = project_mask(m, subset);
          if (!seen[p]) {
            seen[p] = true;
            if (++distinct == (1u << d)) return true;
          }
        }
        return false;
      }
      for (std::size_t i = start; i + (d - depth) <= n; ++i) {
        subset[depth] = i;
        if (rec(depth + 1, i + 1)) return true;
      }
      return false;
    };
    found = rec(0, 0);
    if (!found) break;
    vc = d;
  }
  return vc;
}

std::size_t finite_star_number(const FiniteClass& cls) {
  const std::size_t n = cls.domain_size();
  if (n > 16) {
    fail(ErrorKind::policy, "star-number brute force is capped at 16 points");
  }
  const auto masks = row_masks(cls);
  const std::size_t k = masks.size();
  if (std::ldexp(static_cast<double>(n * k * k), static_cast<int>(n)) > 2e9) {
    fail(ErrorKind::policy, "class too large for brute-force star number");
  }

  std::size_t best = 0;
  std::vector<std::uint32_t> dis(k);
  for (std::size_t h0 = 0; h0 < k; ++h0) {
    for (std::size_t h = 0; h < k; ++h) dis[h] = masks[h0] ^ masks[h];
    for (std::uint32_t p = 1; p < (1u << n); ++p) {
      const std::size_t size = static_cast<std::size_t>(std::popcount(p));
      if (size <= best) continue;
      bool ok = true;
      for (std::size_t x = 0; x < n && ok; ++x) {
        const std::uint32_t bit = 1u << x;
        if (!(p & bit)) continue;
        bool covered = false;
        for (std::size_t h = 0; h < k; ++h) {
          if ((dis[h] & p) == bit) {
            covered = true;
            break;
          }
        }
        ok = covered;
      }
      if (ok) best = size;
    }
  }
  return best;
}

std::optional<std::size_t> finite_hollow_star_number(const FiniteClass& cls) {
  const std::size_t n = cls.domain_size();
  if (n > 16) {
    fail(ErrorKind::policy,
         "hollow-star-number brute force is capped at 16 points");
  }
  const auto masks = row_masks(cls);

  std::optional<std::size_t> best;
  for (std::uint32_t p = 1; p < (1u << n); ++p) {
    const std::size_t size = static_cast<std::size_t>(std::popcount(p));
    if (best && size <= *best) continue;
    std::vector<std::size_t> positions;
    positions.reserve(size);
    for (std::size_t x = 0; x < n; ++x) {
      if (p & (1u << x)) positions.push_back(x);
    }
    std::vector<bool> realizable(1u << size, false);
    for (std::uint32_t m : masks) realizable[project_mask(m, positions)] = true;
    for (std::uint32_t y = 0; y < (1u << size); ++y) {
      if (realizable[y]) continue;
      bool neighbors_ok = true;
      for (std::size_t b = 0; b < size && neighbors_ok; ++b) {
        neighbors_ok = realizable[y ^ (1u << b)];
      }
      if (neighbors_ok) {
        best = size;
        break;
      }
    }
  }
  return best;
}

HollowStarConstruction make_hollow_star_class(std::size_t k) {
  if (k < 3) {
    fail(ErrorKind::precondition, "hollow star construction needs k >= 3");
  }
  std::vector<std::string> names;
  std::vector<std::vector<Label>> table;
  names.reserve(k);
  table.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    names.push_back("x" + std::to_string(i));
    std::vector<Label> row(k, 0);
    row[i] = 1;
    table.push_back(std::move(row));
  }
  HollowStarConstruction out;
  out.cls = std::make_shared<FiniteClass>(std::move(names), std::move(table));
  out.hollow_set.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.hollow_set.push_back(LabeledExample{out.cls->domain_point(i), 0});
  }
  return out;
}

PartialOrder::PartialOrder(std::size_t n, std::vector<std::uint8_t> mat)
    : n_(n), mat_(std::move(mat)) {
  if (mat_.size() != n_ * n_) {
    fail(ErrorKind::precondition, "partial order matrix has wrong size");
  }
}

PartialOrder partial_order_leq(const FiniteClass& cls, std::size_t f_row) {
  const std::size_t n = cls.domain_size();
  if (f_row >= cls.num_hypotheses()) {
    fail(ErrorKind::precondition, "reference row out of range");
  }
  const auto& table = cls.table();
  const auto& f = table[f_row];
  std::vector<std::uint8_t> mat(n * n, 1);
  for (const auto& row : table) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      if (row[xp] == f[xp]) continue;
      for (std::size_t x = 0; x < n; ++x) {
        if (row[x] == f[x]) mat[x * n + xp] = 0;
      }
    }
  }
  return PartialOrder(n, std::move(mat));
}

std::size_t compute_projection_number(const FiniteClass& cls,
                                      std::size_t max_multiset_size) {
  if (max_multiset_size < 1) {
    fail(ErrorKind::precondition, "multiset cap must be at least 1");
  }
  const std::size_t n = cls.domain_size();
  const std::size_t k = cls.num_hypotheses();
  {
    double total = 0.0;
    for (std::size_t s = 1; s <= max_multiset_size; ++s) {
      total += binomial_estimate(k + s - 1, s);
    }
    if (total > 2e7) {
      fail(ErrorKind::policy, "class too large for brute-force projection number");
    }
  }
  const auto& table = cls.table();

  std::size_t max_failing_level = 1;
  std::vector<std::size_t> count1(n, 0);
  std::vector<std::size_t> members;
  std::vector<Label> maj(n, 0);
  std::vector<std::size_t> disag(n, 0);

  auto visit = [&]() {
    const std::size_t s = members.size();
    for (std::size_t x = 0; x < n; ++x) {
      maj[x] = (2 * count1[x] >= s) ? 1 : 0;
      disag[x] = (maj[x] == 1) ? (s - count1[x]) : count1[x];
    }
    for (std::size_t level = std::max<std::size_t>(2, max_failing_level + 1);
         level <= s; ++level) {
      bool some_row_agrees = false;
      for (std::size_t r = 0; r < k && !some_row_agrees; ++r) {
        bool agrees = true;
        for (std::size_t x = 0; x < n && agrees; ++x) {
          if (disag[x] * level < s && table[r][x] != maj[x]) agrees = false;
        }
        some_row_agrees = agrees;
      }
      if (!some_row_agrees && level > max_failing_level) {
        max_failing_level = level;
      }
    }
  };

  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!members.empty()) visit();
    if (members.size() == max_multiset_size) return;
    for (std::size_t r = start; r < k; ++r) {
      members.push_back(r);
      for (std::size_t x = 0; x < n; ++x) count1[x] += table[r][x];
      rec(r);
      for (std::size_t x = 0; x < n; ++x) count1[x] -= table[r][x];
      members.pop_back();
    }
  };
  rec(0);

  return std::max<std::size_t>(2, max_failing_level + 1);
}

}  // namespace cleanlabel
