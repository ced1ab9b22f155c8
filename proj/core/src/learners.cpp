#include "cleanlabel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace cleanlabel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Distinct instance values of a 1-D sample, with label conflicts rejected.
std::map<double, Label> dedupe_line(const Dataset& S) {
  std::map<double, Label> out;
  for (const auto& e : S.items()) {
    if (e.x.size() != 1) {
      fail(ErrorKind::dimension_mismatch, "interval rules expect 1-D points");
    }
    auto [it, inserted] = out.emplace(e.x[0], e.y);
    if (!inserted && it->second != e.y) {
      fail(ErrorKind::unrealizable,
           "conflicting labels for one instance in a 1-D sample");
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Interval rules

IntervalHypothesis fit_min_interval(const Dataset& S) {
  const auto points = dedupe_line(S);
  double lo = 0.0, hi = 0.0;
  bool have_pos = false;
  for (const auto& [x, y] : points) {
    if (y != 1) continue;
    if (!have_pos) {
      lo = hi = x;
      have_pos = true;
    } else {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!have_pos) return IntervalHypothesis::empty();
  for (const auto& [x, y] : points) {
    if (y == 0 && lo <= x && x <= hi) {
      fail(ErrorKind::unrealizable,
           "negative example inside the closed hull of the positives");
    }
  }
  return IntervalHypothesis::closed(lo, hi);
}

IntervalHypothesis fit_max_interval(const Dataset& S) {
  const auto points = dedupe_line(S);
  std::vector<double> neg;
  double pmin = 1.0, pmax = 0.0;
  bool have_pos = false;
  for (const auto& [x, y] : points) {
    if (y == 1) {
      pmin = have_pos ? std::min(pmin, x) : x;
      pmax = have_pos ? std::max(pmax, x) : x;
      have_pos = true;
    } else {
      neg.push_back(x);  // already sorted by map order
    }
  }

  if (have_pos) {
    double a = 0.0, b = 1.0;
    for (double x : neg) {
      if (x < pmin) {
        a = std::max(a, x);
      } else if (x > pmax) {
        b = std::min(b, x);
      } else {
        fail(ErrorKind::unrealizable,
             "negative example between the positives");
      }
    }
    if (!(a < pmin) || !(pmax < b)) {
      fail(ErrorKind::unrealizable,
           "no open interval separates the positives from the negatives");
    }
    return IntervalHypothesis::open(a, b);
  }

  // No positives: the longest gap between consecutive negatives wins,
  // leftmost on ties.
  double best_lo = 0.0, best_hi = 1.0;
  double prev = 0.0;
  double best_len = -1.0;
  neg.push_back(1.0);  // sentinel
  for (double x : neg) {
    if (x - prev > best_len) {
      best_len = x - prev;
      best_lo = prev;
      best_hi = x;
    }
    prev = x;
  }
  return IntervalHypothesis::open(best_lo, best_hi);
}

UnionOfIntervalsHypothesis fit_union_intervals(const Dataset& S) {
  const auto points = dedupe_line(S);
  std::vector<IntervalHypothesis> runs;
  bool in_run = false;
  double run_lo = 0.0, run_hi = 0.0;
  for (const auto& [x, y] : points) {
    if (y == 1) {
      if (!in_run) {
        run_lo = x;
        in_run = true;
      }
      run_hi = x;
    } else if (in_run) {
      runs.push_back(IntervalHypothesis::closed(run_lo, run_hi));
      in_run = false;
    }
  }
  if (in_run) runs.push_back(IntervalHypothesis::closed(run_lo, run_hi));
  return UnionOfIntervalsHypothesis(std::move(runs));
}

// ---------------------------------------------------------------------------
// Finite-class rules

namespace {

struct IndexedSample {
  std::vector<std::pair<std::size_t, Label>> items;  // (domain index, label)
};

IndexedSample index_sample(const Dataset& S, const FiniteClass& cls,
                           const char* who) {
  IndexedSample out;
  out.items.reserve(S.size());
  for (const auto& e : S.items()) {
    const auto idx = cls.index_of_point(e.x);
    if (!idx) {
      fail(ErrorKind::precondition,
           std::string(who) + " expects instances from the finite domain");
    }
    out.items.emplace_back(*idx, e.y);
  }
  return out;
}

bool row_consistent(const FiniteClass& cls, std::size_t row,
                    const IndexedSample& s) {
  for (const auto& [idx, y] : s.items) {
    if (cls.label(row, idx) != y) return false;
  }
  return true;
}

// Hypothesis given by an explicit label pattern over a finite domain; used
// when a rule's output need not be a row of the class.
class FinitePatternHypothesis : public Hypothesis {
 public:
  FinitePatternHypothesis(FiniteClassPtr cls, std::vector<Label> pattern)
      : cls_(std::move(cls)), pattern_(std::move(pattern)) {}

  Label predict(const Point& x) const override {
    const auto idx = cls_->index_of_point(x);
    return idx ? pattern_[*idx] : 0;
  }
  std::string describe() const override { return "finite_pattern"; }

 private:
  FiniteClassPtr cls_;
  std::vector<Label> pattern_;
};

}  // namespace

HypothesisPtr fit_closure(const Dataset& S, const FiniteClassPtr& cls) {
  if (!cls) fail(ErrorKind::precondition, "null finite class");
  const auto sample = index_sample(S, *cls, "closure rule");
  const std::size_t n = cls->domain_size();
  std::vector<Label> pattern(n, 1);
  bool any_consistent = false;
  for (std::size_t r = 0; r < cls->num_hypotheses(); ++r) {
    if (!row_consistent(*cls, r, sample)) continue;
    any_consistent = true;
    for (std::size_t x = 0; x < n; ++x) {
      if (cls->label(r, x) == 0) pattern[x] = 0;
    }
  }
  if (!any_consistent) {
    fail(ErrorKind::unrealizable, "no hypothesis is consistent with the sample");
  }
  for (std::size_t r = 0; r < cls->num_hypotheses(); ++r) {
    if (cls->table()[r] == pattern) {
      return std::make_shared<FiniteRowHypothesis>(cls, r);
    }
  }
  fail(ErrorKind::precondition,
       "class is not intersection-closed on this sample");
}

HypothesisPtr fit_finite_erm(const Dataset& S, const FiniteClassPtr& cls) {
  if (!cls) fail(ErrorKind::precondition, "null finite class");
  const auto sample = index_sample(S, *cls, "finite ERM");
  for (std::size_t r = 0; r < cls->num_hypotheses(); ++r) {
    if (row_consistent(*cls, r, sample)) {
      return std::make_shared<FiniteRowHypothesis>(cls, r);
    }
  }
  fail(ErrorKind::unrealizable, "no hypothesis is consistent with the sample");
}

HypothesisPtr fit_vc1(const Dataset& S, const FiniteClassPtr& cls,
                      std::size_t f_row) {
  if (!cls) fail(ErrorKind::precondition, "null finite class");
  if (f_row >= cls->num_hypotheses()) {
    fail(ErrorKind::precondition, "reference row out of range");
  }
  if (finite_vc_dimension(*cls) > 1) {
    fail(ErrorKind::precondition, "rule requires VC dimension at most 1");
  }
  const auto sample = index_sample(S, *cls, "VC-1 rule");
  const auto& f = cls->table()[f_row];

  std::set<std::size_t> disagree;
  for (const auto& [idx, y] : sample.items) {
    if (y != f[idx]) disagree.insert(idx);
  }
  if (disagree.empty()) {
    return std::make_shared<FiniteRowHypothesis>(cls, f_row);
  }

  const PartialOrder order = partial_order_leq(*cls, f_row);
  std::vector<std::size_t> maximal;
  for (std::size_t z : disagree) {
    bool topped = false;
    for (std::size_t w : disagree) {
      if (w != z && order.leq(z, w) && !order.leq(w, z)) {
        topped = true;
        break;
      }
    }
    if (!topped) maximal.push_back(z);
  }
  for (std::size_t a : maximal) {
    for (std::size_t b : maximal) {
      if (!order.leq(a, b) || !order.leq(b, a)) {
        fail(ErrorKind::unrealizable,
             "incomparable maximal disagreement points");
      }
    }
  }
  const std::size_t x_m = maximal.front();

  const std::size_t n = cls->domain_size();
  std::vector<Label> pattern(n);
  for (std::size_t z = 0; z < n; ++z) {
    pattern[z] = order.leq(z, x_m) ? 1 - f[z] : f[z];
  }
  for (std::size_t r = 0; r < cls->num_hypotheses(); ++r) {
    if (cls->table()[r] == pattern) {
      return std::make_shared<FiniteRowHypothesis>(cls, r);
    }
  }
  return std::make_shared<FinitePatternHypothesis>(cls, std::move(pattern));
}

// ---------------------------------------------------------------------------
// ArcSet

namespace {

double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace

ArcSet ArcSet::full() {
  ArcSet s;
  s.arcs_.emplace_back(0.0, kTwoPi);
  return s;
}

ArcSet ArcSet::empty_set() { return ArcSet(); }

bool ArcSet::is_full() const noexcept {
  return arcs_.size() == 1 && arcs_[0].first == 0.0 &&
         arcs_[0].second == kTwoPi;
}

double ArcSet::total_length() const {
  double len = 0.0;
  for (const auto& [s, e] : arcs_) len += e - s;
  return len;
}

bool ArcSet::contains(double angle) const {
  const double t = normalize_angle(angle);
  for (const auto& [s, e] : arcs_) {
    if ((s < t && t < e) || (s < t + kTwoPi && t + kTwoPi < e)) return true;
  }
  return false;
}

bool ArcSet::nonempty_in(double lo, double hi) const {
  if (!(lo < hi) || hi > lo + kTwoPi + 1e-12) {
    fail(ErrorKind::precondition, "query interval must satisfy lo < hi <= lo + 2*pi");
  }
  const double a = normalize_angle(lo);
  const double b = a + (hi - lo);
  for (const auto& [s, e] : arcs_) {
    for (int k = -1; k <= 1; ++k) {
      const double ss = s + kTwoPi * k;
      const double ee = e + kTwoPi * k;
      if (std::max(ss, a) < std::min(ee, b)) return true;
    }
  }
  return false;
}

void ArcSet::intersect_open_halfcircle(double center_angle) {
  const double a = normalize_angle(center_angle - std::numbers::pi / 2.0);
  if (is_full()) {
    arcs_.assign(1, {a, a + std::numbers::pi});
    return;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [s, e] : arcs_) {
    for (int k = -1; k <= 1; ++k) {
      const double hlo = a + kTwoPi * k;
      const double hhi = hlo + std::numbers::pi;
      const double lo = std::max(s, hlo);
      const double hi = std::min(e, hhi);
      if (lo < hi) {
        double shift = 0.0;
        while (lo - shift >= kTwoPi) shift += kTwoPi;
        while (lo - shift < 0.0) shift -= kTwoPi;
        out.emplace_back(lo - shift, hi - shift);
      }
    }
  }
  std::sort(out.begin(), out.end());
  arcs_ = std::move(out);
}

// ---------------------------------------------------------------------------
// 2-D linear rule

namespace {

using Pt2 = std::pair<double, double>;

double cross(const Pt2& o, const Pt2& a, const Pt2& b) {
  return (a.first - o.first) * (b.second - o.second) -
         (a.second - o.second) * (b.first - o.first);
}

// Andrew monotone chain; collinear points are dropped from the hull.
std::vector<Pt2> convex_hull(std::vector<Pt2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Pt2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct SplitSample {
  std::vector<Pt2> pos, neg;
};

SplitSample split_2d(const Dataset& S) {
  std::map<Pt2, Label> seen;
  for (const auto& e : S.items()) {
    if (e.x.size() != 2) {
      fail(ErrorKind::dimension_mismatch, "this rule expects 2-D points");
    }
    const Pt2 p{e.x[0], e.x[1]};
    auto [it, inserted] = seen.emplace(p, e.y);
    if (!inserted && it->second != e.y) {
      fail(ErrorKind::unrealizable,
           "conflicting labels for one instance in a 2-D sample");
    }
  }
  SplitSample out;
  for (const auto& [p, y] : seen) {
    (y == 1 ? out.pos : out.neg).push_back(p);
  }
  return out;
}

// The offset making direction u consistent with S, if one exists: the
// midpoint of the feasible interval clamped to [-2, 2].
std::optional<double> offset_for_direction(const SplitSample& s, double ux,
                                           double uy) {
  double lo = -2.0, hi = 2.0;
  for (const auto& p : s.pos) {
    lo = std::max(lo, -(ux * p.first + uy * p.second));
  }
  for (const auto& p : s.neg) {
    hi = std::min(hi, -(ux * p.first + uy * p.second));
  }
  const double b = (lo + hi) / 2.0;
  for (const auto& p : s.pos) {
    if (ux * p.first + uy * p.second + b < 0.0) return std::nullopt;
  }
  for (const auto& p : s.neg) {
    if (ux * p.first + uy * p.second + b >= 0.0) return std::nullopt;
  }
  return b;
}

}  // namespace

ArcSet consistent_arcs(const Dataset& S) {
  const SplitSample s = split_2d(S);
  if (s.pos.empty() || s.neg.empty()) return ArcSet::full();
  // Conflicting duplicates were rejected in split_2d, so every pair below has
  // a nonzero difference vector.
  const auto hull_pos = convex_hull(s.pos);
  const auto hull_neg = convex_hull(s.neg);
  ArcSet arcs = ArcSet::full();
  for (const auto& p : hull_pos) {
    for (const auto& n : hull_neg) {
      const double dx = n.first - p.first;
      const double dy = n.second - p.second;
      arcs.intersect_open_halfcircle(std::atan2(-dy, -dx));
      if (arcs.is_empty()) return arcs;
    }
  }
  return arcs;
}

std::shared_ptr<const LinearHypothesis> fit_linear2d(const Dataset& S,
                                                     Linear2dInfo* info) {
  for (const auto& e : S.items()) {
    if (norm(e.x) > 2.0 + 1e-12) {
      fail(ErrorKind::precondition, "instances must satisfy ||x|| <= 2");
    }
  }
  const SplitSample split = split_2d(S);
  Linear2dInfo local;
  Linear2dInfo& out = info ? *info : local;

  const auto finish = [&](double angle, double b) {
    out.angle = angle;
    out.offset = b;
    return std::make_shared<const LinearHypothesis>(
        Point{std::cos(angle), std::sin(angle)}, b);
  };

  if (const auto b0 = offset_for_direction(split, 1.0, 0.0)) {
    out.beta_zero = true;
    return finish(0.0, *b0);
  }

  const ArcSet arcs = consistent_arcs(S);
  out.single_arc = arcs.arc_count() <= 1;
  if (arcs.is_empty()) {
    fail(ErrorKind::unrealizable, "no direction separates the sample");
  }

  double lo = 0.0, hi = kTwoPi;
  for (int it = 1; it <= 128; ++it) {
    const double mid = (lo + hi) / 2.0;
    out.iterations = static_cast<std::size_t>(it);
    if (const auto b = offset_for_direction(split, std::cos(mid), std::sin(mid))) {
      return finish(mid, *b);
    }
    if (arcs.nonempty_in(lo, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  fail(ErrorKind::numerical, "direction search did not converge");
}

// ---------------------------------------------------------------------------
// Lattice covering rule

std::size_t covering_cell_count(std::size_t n, double gamma) {
  if (n < 1) fail(ErrorKind::precondition, "dimension must be at least 1");
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    fail(ErrorKind::precondition, "lattice margin must be positive");
  }
  const double s = gamma / std::sqrt(static_cast<double>(n));
  const long long cmax =
      static_cast<long long>(std::floor(1.0 / s + 0.5 + 1e-12));

  std::size_t count = 0;
  // Depth-first over coordinates, pruning once the cube's nearest point is
  // already outside the closed unit ball.
  std::function<void(std::size_t, double)> rec = [&](std::size_t axis,
                                                     double qd) {
    if (axis == n) {
      if (++count > 10000000) {
        fail(ErrorKind::policy, "lattice exceeds 10^7 cells");
      }
      return;
    }
    for (long long c = -cmax; c <= cmax; ++c) {
      const double gap =
          std::max(0.0, std::abs(static_cast<double>(c)) * s - s / 2.0);
      const double q = qd + gap * gap;
      if (q <= 1.0 + 1e-12) rec(axis + 1, q);
    }
  };
  rec(0, 0.0);
  return count;
}

std::size_t CoveringHypothesis::CellHash::operator()(
    const std::vector<long long>& c) const {
  std::uint64_t h = 1469598103934665603ull;
  for (long long v : c) {
    h ^= static_cast<std::uint64_t>(v);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

CoveringHypothesis::CoveringHypothesis(std::size_t n, double gamma,
                                       std::uint64_t coin_key)
    : n_(n), gamma_(gamma), coin_key_(coin_key) {
  if (n_ < 1) fail(ErrorKind::precondition, "dimension must be at least 1");
  if (!std::isfinite(gamma_) || gamma_ <= 0.0) {
    fail(ErrorKind::precondition, "lattice margin must be positive");
  }
  spacing_ = gamma_ / std::sqrt(static_cast<double>(n_));
}

std::vector<long long> CoveringHypothesis::cell_of(const Point& x) const {
  if (x.size() != n_) {
    fail(ErrorKind::dimension_mismatch, "covering hypothesis dimension mismatch");
  }
  std::vector<long long> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = std::llround(x[i] / spacing_);
  return c;
}

Label CoveringHypothesis::predict(const Point& x) const {
  const auto cell = cell_of(x);
  const auto it = cells_.find(cell);
  if (it == cells_.end()) {
    RngStream coin = RngStream::from_seed(coin_key_ ^ CellHash{}(cell));
    return static_cast<Label>(coin.next_below(2));
  }
  const LabeledExample* best = nullptr;
  double best_d2 = 0.0;
  for (const auto& e : it->second) {
    const double d2 = squared_distance(e.x, x);
    if (!best || d2 < best_d2) {
      best = &e;
      best_d2 = d2;
    }
  }
  return best->y;
}

std::string CoveringHypothesis::describe() const {
  std::ostringstream os;
  os << "covering(n=" << n_ << ",gamma=" << gamma_
     << ",occupied=" << cells_.size() << ")";
  return os.str();
}

std::shared_ptr<const CoveringHypothesis> fit_covering(const Dataset& S,
                                                       std::size_t n,
                                                       double gamma,
                                                       RngStream& rng) {
  covering_cell_count(n, gamma);  // enforces the lattice-size policy
  auto h = std::make_shared<CoveringHypothesis>(n, gamma, rng.next_u64());
  for (const auto& e : S.items()) {
    if (e.x.size() != n) {
      fail(ErrorKind::dimension_mismatch, "sample dimension mismatch");
    }
    h->cells_[h->cell_of(e.x)].push_back(e);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Robust wrappers

MajorityHypothesis::MajorityHypothesis(std::vector<HypothesisPtr> members)
    : members_(std::move(members)) {
  if (members_.empty()) {
    fail(ErrorKind::precondition, "majority vote needs at least one member");
  }
  for (const auto& m : members_) {
    if (!m) fail(ErrorKind::precondition, "null member hypothesis");
  }
}

Label MajorityHypothesis::predict(const Point& x) const {
  std::size_t ones = 0;
  for (const auto& m : members_) ones += static_cast<std::size_t>(m->predict(x));
  return 2 * ones >= members_.size() ? 1 : 0;
}

std::string MajorityHypothesis::describe() const {
  std::ostringstream os;
  os << "majority(" << members_.size() << ")";
  return os.str();
}

namespace {

std::vector<std::size_t> random_permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<Dataset> partition_blocks(const Dataset& S, std::size_t k,
                                      RngStream& rng) {
  const std::size_t q = S.size() / k;
  if (q == 0) {
    fail(ErrorKind::precondition,
         "sample too small: need at least one example per block");
  }
  const auto perm = random_permutation(S.size(), rng);
  std::vector<Dataset> blocks;
  blocks.reserve(k);
  for (std::size_t b = 0; b < k; ++b) {
    std::vector<LabeledExample> items;
    items.reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
      items.push_back(S.items()[perm[b * q + i]]);
    }
    blocks.emplace_back(std::move(items));
  }
  return blocks;
}

}  // namespace

HypothesisPtr fit_partition_majority(const Dataset& S, const Learner& base,
                                     std::size_t t, RngStream& rng,
                                     PartitionMajorityInfo* info) {
  if (t < 1) fail(ErrorKind::precondition, "attack budget must be at least 1");
  const std::size_t k = 10 * t + 1;
  auto blocks = partition_blocks(S, k, rng);
  std::vector<HypothesisPtr> members;
  members.reserve(k);
  for (const auto& block : blocks) members.push_back(base.fit(block, rng));
  if (info) {
    info->blocks = k;
    info->block_size = S.size() / k;
    info->block_examples.clear();
    for (const auto& block : blocks) info->block_examples.push_back(block.items());
  }
  return std::make_shared<MajorityHypothesis>(std::move(members));
}

HypothesisPtr fit_projection(const Dataset& S, const FiniteClassPtr& cls,
                             std::size_t t, RngStream& rng) {
  if (!cls) fail(ErrorKind::precondition, "null finite class");
  if (t < 1) fail(ErrorKind::precondition, "attack budget must be at least 1");
  const std::size_t kp = compute_projection_number(*cls);
  const std::size_t k = 10 * kp * t + 1;
  const auto blocks = partition_blocks(S, k, rng);

  const std::size_t n = cls->domain_size();
  std::vector<std::size_t> ones(n, 0);
  for (const auto& block : blocks) {
    const auto h = fit_finite_erm(block, cls);
    const auto& row = static_cast<const FiniteRowHypothesis&>(*h);
    for (std::size_t x = 0; x < n; ++x) {
      ones[x] += static_cast<std::size_t>(cls->label(row.row(), x));
    }
  }

  std::vector<Label> maj(n);
  std::vector<std::size_t> disag(n);
  for (std::size_t x = 0; x < n; ++x) {
    maj[x] = (2 * ones[x] >= k) ? 1 : 0;
    disag[x] = (maj[x] == 1) ? k - ones[x] : ones[x];
  }
  for (std::size_t r = 0; r < cls->num_hypotheses(); ++r) {
    bool agrees = true;
    for (std::size_t x = 0; x < n && agrees; ++x) {
      if (disag[x] * kp < k && cls->label(r, x) != maj[x]) agrees = false;
    }
    if (agrees) return std::make_shared<FiniteRowHypothesis>(cls, r);
  }
  fail(ErrorKind::unrealizable,
       "no hypothesis matches the block majority on its low-dissent region");
}

HypothesisPtr fit_subsample(const Dataset& S, const Learner& base,
                            double epsilon, std::size_t t, RngStream& rng) {
  if (t < 1) fail(ErrorKind::precondition, "attack budget must be at least 1");
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    fail(ErrorKind::precondition, "epsilon must lie in (0, 1]");
  }
  const std::size_t r = static_cast<std::size_t>(
      std::floor(static_cast<double>(S.size()) * epsilon /
                 (3.0 * static_cast<double>(t))));
  if (r < 1) {
    fail(ErrorKind::precondition, "sample too small for the subsample size");
  }
  std::vector<LabeledExample> items;
  items.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    items.push_back(S.items()[rng.next_below(S.size())]);
  }
  return base.fit(Dataset(std::move(items)), rng);
}

// ---------------------------------------------------------------------------
// Sphere-circles ERM

namespace {

struct SphereSample {
  std::vector<Point> pos, neg;  // local coordinates, near-unit norm
};

bool on_circle_local(const Point& q, const Point& p) {
  return std::abs(dot(q, p) - 0.5) <= kGeometryTolerance;
}

bool circle_choice_consistent(const Point& q, Label s, const SphereSample& ss) {
  for (const auto& p : ss.pos) {
    if (on_circle_local(q, p) != (s == 1)) return false;
  }
  for (const auto& p : ss.neg) {
    if (on_circle_local(q, p) != (s == 0)) return false;
  }
  return true;
}

Point normalize_point(const Point& p) { return scaled(p, 1.0 / norm(p)); }

// Candidate circle anchors when the pinned side has fewer than two distinct
// points: a fixed axis sweep plus points tied to the first unpinned example.
std::vector<Point> fallback_candidates(const std::vector<Point>& avoid) {
  std::vector<Point> out = {{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  if (!avoid.empty()) {
    const Point a = normalize_point(avoid.front());
    out.push_back(a);
    const SphereCircle circle((UnitVector(a)));
    for (int k = 0; k < 8; ++k) {
      out.push_back(circle_point(circle, kTwoPi * k / 8.0).coords());
    }
  }
  return out;
}

std::vector<Point> pinned_candidates(const std::vector<Point>& pinned,
                                     const std::vector<Point>& off_side) {
  if (pinned.empty()) return fallback_candidates(off_side);
  const Point p1 = normalize_point(pinned.front());

  // One pinned point: sweep its circle of valid anchors.
  const Point* second = nullptr;
  for (std::size_t i = 1; i < pinned.size(); ++i) {
    if (squared_distance(pinned[i], pinned.front()) > 1e-18) {
      second = &pinned[i];
      break;
    }
  }
  if (!second) {
    std::vector<Point> out;
    const SphereCircle circle((UnitVector(p1)));
    for (int k = 0; k < 16; ++k) {
      out.push_back(circle_point(circle, kTwoPi * k / 16.0).coords());
    }
    return out;
  }

  // Two pinned points: the anchor solves <q,p1> = <q,p2> = 1/2, ||q|| = 1.
  const Point p2 = normalize_point(*second);
  const double c = dot(p1, p2);
  if (std::abs(1.0 + c) < 1e-12) return {};  // antipodal: circles are disjoint
  const double alpha = 1.0 / (2.0 * (1.0 + c));
  const Point base = scaled(add(p1, p2), alpha);
  const Point cr{p1[1] * p2[2] - p1[2] * p2[1], p1[2] * p2[0] - p1[0] * p2[2],
                 p1[0] * p2[1] - p1[1] * p2[0]};
  const double cr2 = dot(cr, cr);
  if (cr2 < 1e-24) return {};
  const double g2 = (1.0 - dot(base, base)) / cr2;
  if (g2 < 0.0) return {};
  const double g = std::sqrt(g2);
  return {add(base, scaled(cr, g)), sub(base, scaled(cr, g))};
}

}  // namespace

std::shared_ptr<const SphereCirclesHypothesis> fit_circle_erm(const Dataset& S,
                                                              std::size_t d) {
  if (d < 1) fail(ErrorKind::precondition, "need at least one sphere");
  std::vector<SphereSample> per_sphere(d);
  for (const auto& e : S.items()) {
    if (e.x.size() != 3) {
      fail(ErrorKind::dimension_mismatch, "sphere construction lives in R^3");
    }
    const long long cand = std::llround(e.x[0] / 3.0);
    bool placed = false;
    if (cand >= 1 && cand <= static_cast<long long>(d)) {
      const std::size_t i = static_cast<std::size_t>(cand - 1);
      const Point local = sub(e.x, SphereCirclesHypothesis::sphere_center(i));
      if (std::abs(norm(local) - 1.0) <= kGeometryTolerance) {
        (e.y == 1 ? per_sphere[i].pos : per_sphere[i].neg).push_back(local);
        placed = true;
      }
    }
    if (!placed && e.y == 1) {
      fail(ErrorKind::unrealizable, "positive example off every sphere");
    }
  }

  std::vector<UnitVector> q_out;
  std::vector<Label> s_out;
  q_out.reserve(d);
  s_out.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& ss = per_sphere[i];
    if (ss.pos.empty() && ss.neg.empty()) {
      q_out.emplace_back(Point{0.0, 0.0, 1.0});
      s_out.push_back(0);
      continue;
    }
    bool found = false;
    for (Label s : {1, 0}) {
      const auto& pinned = (s == 1) ? ss.pos : ss.neg;
      const auto& off = (s == 1) ? ss.neg : ss.pos;
      for (const auto& q : pinned_candidates(pinned, off)) {
        const Point qn = normalize_point(q);
        if (circle_choice_consistent(qn, s, ss)) {
          q_out.emplace_back(qn);
          s_out.push_back(s);
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (!found) {
      fail(ErrorKind::unrealizable,
           "no marked circle explains the on-sphere examples");
    }
  }
  return std::make_shared<SphereCirclesHypothesis>(std::move(q_out),
                                                   std::move(s_out));
}

// ---------------------------------------------------------------------------
// Learner handles

Learner make_min_interval_learner() {
  return Learner{"min_interval", [](const Dataset& S, RngStream&) {
                   return std::make_shared<const IntervalHypothesis>(
                       fit_min_interval(S));
                 }};
}

Learner make_max_interval_learner() {
  return Learner{"max_interval", [](const Dataset& S, RngStream&) {
                   return std::make_shared<const IntervalHypothesis>(
                       fit_max_interval(S));
                 }};
}

Learner make_union_intervals_learner() {
  return Learner{"union_intervals", [](const Dataset& S, RngStream&) {
                   return std::make_shared<const UnionOfIntervalsHypothesis>(
                       fit_union_intervals(S));
                 }};
}

Learner make_closure_learner(FiniteClassPtr cls) {
  return Learner{"closure", [cls](const Dataset& S, RngStream&) {
                   return fit_closure(S, cls);
                 }};
}

Learner make_finite_erm_learner(FiniteClassPtr cls) {
  return Learner{"finite_erm", [cls](const Dataset& S, RngStream&) {
                   return fit_finite_erm(S, cls);
                 }};
}

Learner make_vc1_learner(FiniteClassPtr cls, std::size_t f_row) {
  return Learner{"vc1", [cls, f_row](const Dataset& S, RngStream&) {
                   return fit_vc1(S, cls, f_row);
                 }};
}

Learner make_linear2d_learner() {
  return Learner{"linear2d", [](const Dataset& S, RngStream&) {
                   return fit_linear2d(S);
                 }};
}

Learner make_covering_learner(std::size_t n, double gamma) {
  return Learner{"covering", [n, gamma](const Dataset& S, RngStream& rng) {
                   return fit_covering(S, n, gamma, rng);
                 }};
}

Learner make_svm_learner() {
  return Learner{"svm",
                 [](const Dataset& S, RngStream&) { return fit_svm(S); }};
}

Learner make_partition_majority_learner(Learner base, std::size_t t) {
  const std::string name =
      "partition_majority(" + base.name + ",t=" + std::to_string(t) + ")";
  return Learner{name, [base, t](const Dataset& S, RngStream& rng) {
                   return fit_partition_majority(S, base, t, rng);
                 }};
}

Learner make_projection_learner(FiniteClassPtr cls, std::size_t t) {
  const std::string name = "projection(t=" + std::to_string(t) + ")";
  return Learner{name, [cls, t](const Dataset& S, RngStream& rng) {
                   return fit_projection(S, cls, t, rng);
                 }};
}

Learner make_subsample_learner(Learner base, double epsilon, std::size_t t) {
  std::ostringstream name;
  name << "subsample(" << base.name << ",eps=" << epsilon << ",t=" << t << ")";
  return Learner{name.str(), [base, epsilon, t](const Dataset& S,
                                                RngStream& rng) {
                   return fit_subsample(S, base, epsilon, t, rng);
                 }};
}

Learner make_circle_erm_learner(std::size_t d) {
  return Learner{"circle_erm", [d](const Dataset& S, RngStream&) {
                   return fit_circle_erm(S, d);
                 }};
}

}  // namespace cleanlabel
