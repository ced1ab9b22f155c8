#include "cleanlabel/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cleanlabel {

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

bool canonical_less(const LabeledExample& a, const LabeledExample& b) {
  if (a.x != b.x) {
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(),
                                        b.x.end());
  }
  return a.y < b.y;
}

void check_finite(const Point& x) {
  for (double c : x) {
    if (!std::isfinite(c)) {
      fail(ErrorKind::precondition, "point has a non-finite coordinate");
    }
  }
}

void check_label(Label y) {
  if (y != 0 && y != 1) {
    fail(ErrorKind::precondition, "label must be 0 or 1");
  }
}

double dot(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::dimension_mismatch, "dot: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Point& x) { return std::sqrt(dot(x, x)); }

double squared_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::dimension_mismatch, "squared_distance: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Point scaled(const Point& x, double s) {
  Point out(x);
  for (double& c : out) c *= s;
  return out;
}

Point add(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::dimension_mismatch, "add: dimension mismatch");
  }
  Point out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Point sub(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::dimension_mismatch, "sub: dimension mismatch");
  }
  Point out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<LabeledExample> items) : items_(std::move(items)) {
  std::size_t dim = items_.empty() ? 0 : items_[0].x.size();
  for (const auto& e : items_) {
    check_finite(e.x);
    check_label(e.y);
    if (e.x.size() != dim) {
      fail(ErrorKind::dimension_mismatch, "dataset mixes point dimensions");
    }
  }
  std::sort(items_.begin(), items_.end(), canonical_less);
}

void Dataset::add(LabeledExample e) {
  check_finite(e.x);
  check_label(e.y);
  if (!items_.empty() && e.x.size() != items_[0].x.size()) {
    fail(ErrorKind::dimension_mismatch, "dataset mixes point dimensions");
  }
  auto it = std::upper_bound(items_.begin(), items_.end(), e, canonical_less);
  items_.insert(it, std::move(e));
}

std::optional<std::size_t> Dataset::dimension() const {
  if (items_.empty()) return std::nullopt;
  return items_[0].x.size();
}

bool Dataset::contains_instance(const Point& x) const {
  return count_instance(x) > 0;
}

std::size_t Dataset::count_instance(const Point& x) const {
  std::size_t n = 0;
  for (const auto& e : items_) {
    if (e.x == x) ++n;
  }
  return n;
}

Dataset dataset_union(const Dataset& a, const Dataset& b) {
  if (!a.empty() && !b.empty() &&
      a.dimension().value() != b.dimension().value()) {
    fail(ErrorKind::dimension_mismatch, "dataset_union: dimension mismatch");
  }
  std::vector<LabeledExample> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.items().begin(), a.items().end(), b.items().begin(),
             b.items().end(), std::back_inserter(merged), canonical_less);
  // Inputs are already canonical, so the merge is too; the sorting
  // constructor would accept it unchanged.
  return Dataset(std::move(merged));
}

double empirical_error(const Hypothesis& h, const Dataset& S) {
  if (S.empty()) {
    fail(ErrorKind::precondition, "empirical_error: empty dataset");
  }
  std::size_t wrong = 0;
  for (const auto& e : S.items()) {
    if (h.predict(e.x) != e.y) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(S.size());
}

bool is_consistent(const Hypothesis& h, const Dataset& S) {
  for (const auto& e : S.items()) {
    if (h.predict(e.x) != e.y) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// RngStream

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t rotl64(std::uint64_t v, int r) {
  return (v << r) | (v >> (64 - r));
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

RngStream RngStream::from_seed(std::uint64_t seed) {
  return RngStream(mix64(seed ^ kGolden), 0);
}

std::uint64_t RngStream::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) {
    fail(ErrorKind::precondition, "next_below: bound must be positive");
  }
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double RngStream::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_gaussian_ = true;
  return r * std::cos(theta);
}

RngStream RngStream::derive(std::uint64_t label) const {
  // key_ ^ rotl(label) is injective in label for a fixed key, and mix64 is a
  // bijection, so distinct integer labels always yield distinct child keys.
  return RngStream(mix64(key_ ^ rotl64(label, 32) ^ 0xD6E8FEB86659FD93ull), 0);
}

RngStream RngStream::derive(std::string_view label) const {
  return derive(fnv1a64(label));
}

// ---------------------------------------------------------------------------
// Learner / Attacker / TargetedDistribution plumbing

HypothesisPtr Learner::fit(const Dataset& S, RngStream& rng) const {
  if (!fit_fn) fail(ErrorKind::precondition, "learner has no fit function");
  return fit_fn(S, rng);
}

Dataset Attacker::poison(const Hypothesis& target, const Dataset& S_trn,
                         const Point& x0, RngStream& rng) const {
  if (!poison_fn) fail(ErrorKind::precondition, "attacker has no poison function");
  return poison_fn(target, S_trn, x0, rng);
}

LabeledExample TargetedDistribution::sample(RngStream& rng) const {
  Point x = sample_x(rng);
  return LabeledExample{x, target->predict(x)};
}

Dataset TargetedDistribution::sample_dataset(std::size_t m,
                                             RngStream& rng) const {
  std::vector<LabeledExample> items;
  items.reserve(m);
  for (std::size_t i = 0; i < m; ++i) items.push_back(sample(rng));
  return Dataset(std::move(items));
}

}  // namespace cleanlabel
