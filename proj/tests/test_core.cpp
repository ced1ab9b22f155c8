#include <doctest.h>

#include <cmath>

#include "cleanlabel/core.hpp"

using namespace cleanlabel;

TEST_SUITE("core") {

TEST_CASE("dataset keeps items in canonical order regardless of insertion") {
  Dataset a;
  a.add({{0.7}, 1});
  a.add({{0.2}, 0});
  a.add({{0.5}, 1});
  Dataset b;
  b.add({{0.5}, 1});
  b.add({{0.7}, 1});
  b.add({{0.2}, 0});
  CHECK(a == b);
  CHECK(a.items().front().x[0] == 0.2);
  CHECK(a.items().back().x[0] == 0.7);
}

TEST_CASE("dataset counts duplicate instances as a multiset") {
  Dataset s;
  s.add({{0.5}, 1});
  s.add({{0.5}, 1});
  s.add({{0.5}, 0});
  CHECK(s.size() == 3);
  CHECK(s.count_instance({0.5}) == 3);
  CHECK(s.contains_instance({0.5}));
  CHECK_FALSE(s.contains_instance({0.25}));
}

TEST_CASE("dataset rejects mixed dimensions and bad values") {
  Dataset s;
  s.add({{0.1, 0.2}, 0});
  CHECK_THROWS_AS(s.add({{0.1}, 0}), Error);
  CHECK_THROWS_AS(s.add({{0.1, std::nan("")}, 0}), Error);
  CHECK_THROWS_AS(s.add({{0.1, 0.2}, 2}), Error);
}

TEST_CASE("dataset_union adds multiplicities") {
  Dataset a;
  a.add({{0.5}, 1});
  Dataset b;
  b.add({{0.5}, 1});
  b.add({{0.9}, 0});
  const Dataset u = dataset_union(a, b);
  CHECK(u.size() == 3);
  CHECK(u.count_instance({0.5}) == 2);

  Dataset manual = a;
  manual.add({{0.5}, 1});
  manual.add({{0.9}, 0});
  CHECK(u == manual);
}

TEST_CASE("vector helpers agree with hand arithmetic") {
  const Point a{3.0, 4.0};
  const Point b{1.0, -1.0};
  CHECK(dot(a, b) == doctest::Approx(-1.0));
  CHECK(norm(a) == doctest::Approx(5.0));
  CHECK(squared_distance(a, b) == doctest::Approx(4.0 + 25.0));
  CHECK(add(a, b) == Point{4.0, 3.0});
  CHECK(sub(a, b) == Point{2.0, 5.0});
  CHECK(scaled(b, 2.0) == Point{2.0, -2.0});
}

TEST_CASE("rng streams are deterministic and derivation is stable") {
  RngStream r1 = RngStream::from_seed(42);
  RngStream r2 = RngStream::from_seed(42);
  for (int i = 0; i < 16; ++i) CHECK(r1.next_u64() == r2.next_u64());

  const RngStream base = RngStream::from_seed(7);
  RngStream a1 = base.derive("trial").derive(3);
  RngStream a2 = base.derive("trial").derive(3);
  CHECK(a1.next_u64() == a2.next_u64());

  RngStream b = base.derive("trial").derive(4);
  RngStream a3 = base.derive("trial").derive(3);
  CHECK(a3.next_u64() != b.next_u64());
}

TEST_CASE("deriving does not consume parent state") {
  RngStream parent = RngStream::from_seed(9);
  const std::uint64_t before = RngStream::from_seed(9).next_u64();
  (void)parent.derive("child");
  (void)parent.derive(12);
  CHECK(parent.next_u64() == before);
}

TEST_CASE("rng outputs stay in range") {
  RngStream r = RngStream::from_seed(1);
  for (int i = 0; i < 1000; ++i) {
    const double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    const std::uint64_t k = r.next_below(7);
    CHECK(k < 7);
    CHECK(std::isfinite(r.next_gaussian()));
  }
  CHECK(r.next_below(1) == 0);
}

TEST_CASE("gaussian moments are roughly standard") {
  RngStream r = RngStream::from_seed(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = r.next_gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

namespace {

class ConstantHypothesis : public Hypothesis {
 public:
  explicit ConstantHypothesis(Label y) : y_(y) {}
  Label predict(const Point&) const override { return y_; }

 private:
  Label y_;
};

}  // namespace

TEST_CASE("empirical_error and is_consistent count multiplicities") {
  Dataset s;
  s.add({{0.1}, 1});
  s.add({{0.1}, 1});
  s.add({{0.2}, 0});
  const ConstantHypothesis ones(1);
  CHECK(empirical_error(ones, s) == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(is_consistent(ones, s));

  Dataset all_ones;
  all_ones.add({{0.1}, 1});
  CHECK(is_consistent(ones, all_ones));
  CHECK(is_consistent(ones, Dataset{}));
  CHECK_THROWS_AS(empirical_error(ones, Dataset{}), Error);
}

TEST_CASE("targeted distribution labels samples with the target") {
  TargetedDistribution dist;
  dist.target = std::make_shared<ConstantHypothesis>(1);
  dist.sample_x = [](RngStream& r) { return Point{r.next_double()}; };
  RngStream rng = RngStream::from_seed(5);
  const Dataset s = dist.sample_dataset(50, rng);
  CHECK(s.size() == 50);
  for (const auto& e : s.items()) CHECK(e.y == 1);
}

}  // TEST_SUITE
