#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cleanlabel/classes.hpp"
#include "cleanlabel/core.hpp"
#include "cleanlabel/geometry.hpp"

using namespace cleanlabel;

namespace {

FiniteClassPtr thresholds_on_grid(std::size_t g) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < g; ++j) names.push_back("x" + std::to_string(j));
  std::vector<std::vector<Label>> table;
  for (std::size_t i = 0; i <= g; ++i) {
    std::vector<Label> row(g);
    for (std::size_t j = 0; j < g; ++j) row[j] = j >= i ? 1 : 0;
    table.push_back(std::move(row));
  }
  return std::make_shared<FiniteClass>(std::move(names), std::move(table));
}

FiniteClassPtr intervals_on_grid(std::size_t g) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < g; ++j) names.push_back("x" + std::to_string(j));
  std::vector<std::vector<Label>> table;
  table.emplace_back(g, 0);
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = a; b < g; ++b) {
      std::vector<Label> row(g, 0);
      for (std::size_t j = a; j <= b; ++j) row[j] = 1;
      table.push_back(std::move(row));
    }
  }
  return std::make_shared<FiniteClass>(std::move(names), std::move(table));
}

FiniteClassPtr full_class(std::size_t g) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < g; ++j) names.push_back("x" + std::to_string(j));
  std::vector<std::vector<Label>> table;
  for (std::size_t mask = 0; mask < (std::size_t{1} << g); ++mask) {
    std::vector<Label> row(g);
    for (std::size_t j = 0; j < g; ++j) row[j] = (mask >> j) & 1 ? 1 : 0;
    table.push_back(std::move(row));
  }
  return std::make_shared<FiniteClass>(std::move(names), std::move(table));
}

}  // namespace

TEST_SUITE("classes") {

TEST_CASE("interval hypotheses respect their endpoint conventions") {
  const IntervalHypothesis none = IntervalHypothesis::empty();
  CHECK(none.predict({0.5}) == 0);
  CHECK_FALSE(none.contains(0.0));
  CHECK(none.length() == 0.0);

  const IntervalHypothesis open = IntervalHypothesis::open(0.3, 0.6);
  CHECK_FALSE(open.contains(0.3));
  CHECK(open.contains(0.45));
  CHECK_FALSE(open.contains(0.6));
  CHECK(open.length() == doctest::Approx(0.3));

  const IntervalHypothesis closed = IntervalHypothesis::closed(0.3, 0.6);
  CHECK(closed.contains(0.3));
  CHECK(closed.contains(0.6));
  CHECK_FALSE(closed.contains(0.7));

  CHECK_THROWS_AS(IntervalHypothesis::open(0.6, 0.3), Error);
  CHECK_THROWS_AS(IntervalHypothesis::closed(-0.1, 0.5), Error);
}

TEST_CASE("union of intervals predicts membership in any part") {
  const UnionOfIntervalsHypothesis u({IntervalHypothesis::closed(0.1, 0.2),
                                      IntervalHypothesis::open(0.5, 0.7)});
  CHECK(u.predict({0.15}) == 1);
  CHECK(u.predict({0.5}) == 0);
  CHECK(u.predict({0.6}) == 1);
  CHECK(u.predict({0.9}) == 0);
  CHECK(UnionOfIntervalsHypothesis{}.predict({0.5}) == 0);
}

TEST_CASE("linear hypothesis thresholds the affine value at zero") {
  const LinearHypothesis h({1.0, -1.0}, 0.5);
  CHECK(h.predict({1.0, 1.0}) == 1);
  CHECK(h.predict({0.0, 1.0}) == 0);
  CHECK(h.predict({-0.5, 0.0}) == 1);
  CHECK(h.decision_value({2.0, 0.5}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(LinearHypothesis({0.0, 0.0}, 1.0), Error);
}

TEST_CASE("sphere circles label by marked-circle membership") {
  const UnitVector e3({0.0, 0.0, 1.0});
  const SphereCirclesHypothesis h({e3}, {1});

  CHECK(SphereCirclesHypothesis::sphere_center(0) == Point{3.0, 0.0, 0.0});
  CHECK(SphereCirclesHypothesis::sphere_center(1) == Point{6.0, 0.0, 0.0});

  const Point origin{0.0, 0.0, 0.0};
  CHECK_FALSE(h.sphere_index(origin).has_value());
  CHECK(h.predict(origin) == 0);

  const Point off_circle{4.0, 0.0, 0.0};
  REQUIRE(h.sphere_index(off_circle).has_value());
  CHECK(*h.sphere_index(off_circle) == 0);
  CHECK_FALSE(h.on_marked_circle(0, off_circle));
  CHECK(h.predict(off_circle) == 0);

  const double r = 0.8660254037844386;
  const Point on_circle{3.0 + r, 0.0, 0.5};
  REQUIRE(h.sphere_index(on_circle).has_value());
  CHECK(h.on_marked_circle(0, on_circle));
  CHECK(h.predict(on_circle) == 1);

  const SphereCirclesHypothesis flipped({e3}, {0});
  CHECK(flipped.predict(on_circle) == 0);
  CHECK(flipped.predict(off_circle) == 1);
}

TEST_CASE("circle band boundaries sit on the two sides of the marked circle") {
  const UnitVector w({0.0, 0.0, 1.0});
  const CircleBandHypothesis pos(w, 1, 0.1);
  CHECK(pos.predict({0.0, 0.0, 0.5}) == 1);
  CHECK(pos.predict({0.0, 0.0, 0.5 - 1e-12}) == 1);
  CHECK(pos.predict({0.0, 0.0, 0.9}) == 1);
  CHECK(pos.predict({0.0, 0.0, 0.4}) == 0);

  const CircleBandHypothesis neg(w, 0, 0.1);
  CHECK(neg.predict({0.0, 0.0, 0.5}) == 0);
  CHECK(neg.predict({0.0, 0.0, 0.45}) == 1);
  CHECK(neg.predict({0.0, 0.0, 0.0}) == 1);
  CHECK(neg.predict({0.0, 0.0, 0.9}) == 0);
}

TEST_CASE("finite classes embed their domain as 1-D points") {
  const FiniteClassPtr cls = thresholds_on_grid(3);
  CHECK(cls->domain_size() == 3);
  CHECK(cls->num_hypotheses() == 4);
  CHECK(cls->domain_point(2) == Point{2.0});
  CHECK(cls->index_of_point({1.0}).value() == 1);
  CHECK_FALSE(cls->index_of_point({1.5}).has_value());
  CHECK_FALSE(cls->index_of_point({7.0}).has_value());

  const FiniteRowHypothesis h(cls, 1);
  CHECK(h.predict({0.0}) == 0);
  CHECK(h.predict({1.0}) == 1);
  CHECK(h.predict({2.0}) == 1);
  CHECK(h.predict({9.0}) == 0);
}

TEST_CASE("finite class json roundtrip preserves names and table") {
  const HollowStarConstruction hs = make_hollow_star_class(4);
  const std::string text = finite_class_to_json(*hs.cls);
  const FiniteClass back = finite_class_from_json(text);
  CHECK(back.names() == hs.cls->names());
  CHECK(back.table() == hs.cls->table());
  CHECK_THROWS_AS(finite_class_from_json("{\"bogus\": 1}"), Error);
}

TEST_CASE("margin predicate scales with the weight norm") {
  MarginDescriptor md;
  md.gamma = 0.5;
  md.target = std::make_shared<LinearHypothesis>(Point{1.0, 0.0}, 0.0);
  CHECK(margin_satisfied(md, {{0.3, 0.0}, 1}));
  CHECK_FALSE(margin_satisfied(md, {{0.2, 0.0}, 1}));
  CHECK(margin_satisfied(md, {{-0.3, 0.0}, 0}));
  CHECK_FALSE(margin_satisfied(md, {{0.3, 0.0}, 0}));

  MarginDescriptor scaled_md;
  scaled_md.gamma = 0.5;
  scaled_md.target = std::make_shared<LinearHypothesis>(Point{2.0, 0.0}, 0.0);
  CHECK(margin_satisfied(scaled_md, {{0.3, 0.0}, 1}));
  CHECK_FALSE(margin_satisfied(scaled_md, {{0.2, 0.0}, 1}));
}

TEST_CASE("piecewise densities sample inside their pieces at the right rates") {
  const PiecewiseDensity u = PiecewiseDensity::uniform();
  RngStream r = RngStream::from_seed(31);
  for (int i = 0; i < 500; ++i) {
    const double x = u.sample(r);
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }

  const PiecewiseDensity skewed({{0.0, 0.5, 0.75}, {0.5, 1.0, 0.25}});
  int low = 0;
  const int n = 8000;
  for (int i = 0; i < n; ++i) {
    const double x = skewed.sample(r);
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    if (x < 0.5) ++low;
  }
  CHECK(static_cast<double>(low) / n == doctest::Approx(0.75).epsilon(0.04));

  CHECK_THROWS_AS(PiecewiseDensity({{0.0, 1.0, 0.5}}), Error);
  CHECK_THROWS_AS(PiecewiseDensity({{0.5, 0.4, 1.0}}), Error);
  CHECK_THROWS_AS(
      PiecewiseDensity({{0.0, 0.6, 0.5}, {0.4, 1.0, 0.5}}), Error);
}

TEST_CASE("interval experiment samples the unit interval with target labels") {
  const IntervalHypothesis target = IntervalHypothesis::open(0.3, 0.6);
  const TargetedDistribution dist =
      make_interval_experiment(target, PiecewiseDensity::uniform());
  RngStream r = RngStream::from_seed(37);
  for (int i = 0; i < 300; ++i) {
    const LabeledExample e = dist.sample(r);
    REQUIRE(e.x.size() == 1);
    CHECK(e.x[0] >= 0.0);
    CHECK(e.x[0] < 1.0);
    CHECK(e.y == (target.contains(e.x[0]) ? 1 : 0));
  }
}

TEST_CASE("half-sphere experiment concentrates mass at the antipode") {
  const std::size_t n = 8;
  const double eps = 0.01;
  const TargetedDistribution dist = make_halfsphere_experiment(n, eps);
  RngStream r = RngStream::from_seed(41);
  Point neg_e1(n, 0.0);
  neg_e1[0] = -1.0;
  int positives = 0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const LabeledExample e = dist.sample(r);
    if (e.y == 0) {
      CHECK(e.x == neg_e1);
    } else {
      ++positives;
      CHECK(norm(e.x) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(e.x[0] >= 0.0);
    }
  }
  const double frac = static_cast<double>(positives) / draws;
  CHECK(frac > 0.06);
  CHECK(frac < 0.10);

  CHECK_THROWS_AS(make_halfsphere_experiment(2, 0.01), Error);
  CHECK_THROWS_AS(make_halfsphere_experiment(8, 0.2), Error);
}

TEST_CASE("margin lower-bound experiment splits mass between apex and shifted sphere") {
  RngStream setup = RngStream::from_seed(43);
  const std::size_t n = 9;
  const double eps = 0.05;
  const Experiment ex = make_margin_lb_experiment(n, eps, setup);
  REQUIRE(ex.ctx.w_star.has_value());
  REQUIRE(ex.ctx.j.has_value());
  REQUIRE(ex.ctx.gamma.has_value());
  const Point& w = ex.ctx.w_star->coords();
  REQUIRE(w.size() == n - 1);
  const double gamma = *ex.ctx.gamma;
  const int j = *ex.ctx.j;

  RngStream r = RngStream::from_seed(47);
  int apex = 0, sphere = 0;
  for (int i = 0; i < 400; ++i) {
    const LabeledExample e = ex.dist.sample(r);
    REQUIRE(e.x.size() == n);
    if (e.x[n - 1] == 1.0) {
      ++apex;
      for (std::size_t c = 0; c + 1 < n; ++c) CHECK(e.x[c] == 0.0);
      CHECK(e.y == 1);
    } else {
      ++sphere;
      CHECK(e.x[n - 1] == 0.0);
      Point head(w.size());
      for (std::size_t c = 0; c + 1 < n; ++c) head[c] = e.x[c];
      const Point u = sub(head, scaled(w, gamma));
      CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(dot(u, w) >= -1e-9);
      CHECK(e.y == (j == 1 ? 1 : 0));
    }
  }
  CHECK(apex > sphere);
  CHECK(sphere > 0);
}

TEST_CASE("circles experiment puts every non-origin sample on a marked circle") {
  RngStream setup = RngStream::from_seed(53);
  const Experiment ex = make_circles_experiment(2, 4, 30, setup);
  REQUIRE(ex.ctx.circles != nullptr);
  const auto& target = *ex.ctx.circles;

  RngStream r = RngStream::from_seed(59);
  int on_circles = 0;
  for (int i = 0; i < 600; ++i) {
    const LabeledExample e = ex.dist.sample(r);
    if (e.x == Point{0.0, 0.0, 0.0}) {
      CHECK(e.y == 0);
      continue;
    }
    ++on_circles;
    const auto idx = target.sphere_index(e.x);
    REQUIRE(idx.has_value());
    CHECK(target.on_marked_circle(*idx, e.x));
    CHECK(e.y == target.s(*idx));
  }
  CHECK(on_circles > 0);
}

TEST_CASE("circle band experiment draws from the marked circle with constant label") {
  RngStream setup = RngStream::from_seed(61);
  const Experiment ex = make_circle_band_experiment(1e-3, setup);
  REQUIRE(ex.ctx.w_star.has_value());
  REQUIRE(ex.ctx.j.has_value());
  const Point& w = ex.ctx.w_star->coords();

  RngStream r = RngStream::from_seed(67);
  for (int i = 0; i < 300; ++i) {
    const LabeledExample e = ex.dist.sample(r);
    CHECK(norm(e.x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(w, e.x) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.y == *ex.ctx.j);
  }
  CHECK_THROWS_AS(make_circle_band_experiment(0.6, setup), Error);
}

TEST_CASE("hollow-star experiment never draws the hidden point") {
  const HollowStarConstruction hs = make_hollow_star_class(5);
  const Experiment ex = make_hollow_star_experiment(hs.cls, 2);
  RngStream r = RngStream::from_seed(71);
  for (int i = 0; i < 300; ++i) {
    const LabeledExample e = ex.dist.sample(r);
    const auto idx = hs.cls->index_of_point(e.x);
    REQUIRE(idx.has_value());
    CHECK(*idx != 2);
    CHECK(e.y == 0);
  }
  CHECK_THROWS_AS(make_hollow_star_experiment(hs.cls, 99), Error);
  CHECK_THROWS_AS(make_hollow_star_experiment(nullptr, 0), Error);
}

TEST_CASE("margin disk experiment excludes the low-margin band") {
  RngStream setup = RngStream::from_seed(73);
  const Experiment ex = make_margin_disk_experiment(3, 0.25, setup);
  REQUIRE(ex.ctx.w_star.has_value());
  const Point& w = ex.ctx.w_star->coords();

  RngStream r = RngStream::from_seed(79);
  for (int i = 0; i < 400; ++i) {
    const LabeledExample e = ex.dist.sample(r);
    CHECK(norm(e.x) <= 1.0 + 1e-12);
    const double v = dot(w, e.x);
    CHECK(std::abs(v) >= 0.125);
    CHECK(e.y == (v >= 0.0 ? 1 : 0));
  }
  CHECK_THROWS_AS(make_margin_disk_experiment(1, 0.5, setup), Error);
  CHECK_THROWS_AS(make_margin_disk_experiment(3, 1.5, setup), Error);
}

TEST_CASE("vc dimension oracle matches hand-computed classes") {
  CHECK(finite_vc_dimension(*thresholds_on_grid(5)) == 1);
  CHECK(finite_vc_dimension(*intervals_on_grid(6)) == 2);
  CHECK(finite_vc_dimension(*full_class(3)) == 3);
  CHECK(finite_vc_dimension(*make_hollow_star_class(5).cls) == 1);
}

TEST_CASE("star number oracle matches the threshold class") {
  CHECK(finite_star_number(*thresholds_on_grid(5)) == 2);
}

TEST_CASE("hollow star number oracle matches hand-computed classes") {
  CHECK(finite_hollow_star_number(*intervals_on_grid(6)).value() == 3);
  CHECK_FALSE(finite_hollow_star_number(*full_class(3)).has_value());
  CHECK(finite_hollow_star_number(*make_hollow_star_class(3).cls).value() == 3);
  CHECK(finite_hollow_star_number(*make_hollow_star_class(5).cls).value() == 5);
}

TEST_CASE("hollow star construction flips one bit per row") {
  const HollowStarConstruction hs = make_hollow_star_class(4);
  CHECK(hs.cls->domain_size() == 4);
  CHECK(hs.cls->num_hypotheses() == 4);
  REQUIRE(hs.hollow_set.size() == 4);
  for (const auto& e : hs.hollow_set) CHECK(e.y == 0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(hs.cls->label(i, j) == (i == j ? 1 : 0));
    }
  }
  CHECK_THROWS_AS(make_hollow_star_class(2), Error);
}

TEST_CASE("disagreement order on thresholds is the point order") {
  const FiniteClassPtr cls = thresholds_on_grid(3);
  const PartialOrder order = partial_order_leq(*cls, 0);
  CHECK(order.size() == 3);
  for (std::size_t x = 0; x < 3; ++x) CHECK(order.leq(x, x));
  CHECK(order.leq(0, 1));
  CHECK(order.leq(0, 2));
  CHECK(order.leq(1, 2));
  CHECK_FALSE(order.leq(1, 0));
  CHECK_FALSE(order.leq(2, 0));
  CHECK_FALSE(order.leq(2, 1));
}

TEST_CASE("projection number oracle matches hand-computed classes") {
  CHECK(compute_projection_number(*full_class(3)) == 2);
  CHECK(compute_projection_number(*make_hollow_star_class(3).cls) == 3);
  CHECK(compute_projection_number(*make_hollow_star_class(5).cls) == 5);
}

}  // TEST_SUITE
