#include <doctest.h>

#include <cmath>
#include <vector>

#include "cleanlabel/attackers.hpp"
#include "cleanlabel/classes.hpp"
#include "cleanlabel/core.hpp"
#include "cleanlabel/eval.hpp"
#include "cleanlabel/geometry.hpp"
#include "cleanlabel/learners.hpp"

using namespace cleanlabel;

namespace {

Dataset line_dataset(std::initializer_list<std::pair<double, Label>> items) {
  std::vector<LabeledExample> v;
  for (const auto& [x, y] : items) v.push_back({{x}, y});
  return Dataset(std::move(v));
}

Point circle_pt(double theta) {
  const double r = std::sqrt(3.0) / 2.0;
  return {r * std::cos(theta), r * std::sin(theta), 0.5};
}

Point marked_pt(const Point& center, double theta) {
  return add(circle_pt(theta), sub(center, Point{0.0, 0.0, 0.0}));
}

}  // namespace

TEST_SUITE("attackers") {

TEST_CASE("null attacker never adds anything and claims a zero budget") {
  const Attacker a = make_null_attacker();
  CHECK(a.budget.finite);
  CHECK(a.budget.t == 0);
  RngStream r = RngStream::from_seed(191);
  const IntervalHypothesis target = IntervalHypothesis::empty();
  const Dataset S = line_dataset({{0.5, 0}});
  CHECK(a.poison(target, S, {0.25}, r).empty());
}

TEST_CASE("interval flood splits exactly the gaps away from the test point") {
  const Attacker a = make_interval_flood_attacker();
  CHECK_FALSE(a.budget.finite);
  RngStream r = RngStream::from_seed(193);
  const IntervalHypothesis target = IntervalHypothesis::empty();

  const Dataset S = line_dataset({{0.5, 0}});
  const Dataset poison = a.poison(target, S, {0.75}, r);
  REQUIRE(poison.size() == 1);
  CHECK(poison.items()[0].x[0] == doctest::Approx(0.25));
  CHECK(poison.items()[0].y == 0);

  const IntervalHypothesis before = fit_max_interval(S);
  const IntervalHypothesis after = fit_max_interval(dataset_union(S, poison));
  CHECK(before.predict({0.75}) == 0);
  CHECK(after.predict({0.75}) == 1);
  CHECK(after.a() == doctest::Approx(0.5));
  CHECK(after.b() == doctest::Approx(1.0));
}

TEST_CASE("interval flood handles several gaps and labels poison by the target") {
  const Attacker a = make_interval_flood_attacker();
  RngStream r = RngStream::from_seed(197);

  const Dataset S = line_dataset({{0.3, 0}, {0.6, 0}});
  const Dataset poison =
      a.poison(IntervalHypothesis::empty(), S, {0.45}, r);
  REQUIRE(poison.size() == 2);
  CHECK(poison.items()[0].x[0] == doctest::Approx(0.15));
  CHECK(poison.items()[1].x[0] == doctest::Approx(0.8));
  const IntervalHypothesis after =
      fit_max_interval(dataset_union(S, poison));
  CHECK(after.a() == doctest::Approx(0.3));
  CHECK(after.b() == doctest::Approx(0.6));

  const Dataset relabeled =
      a.poison(IntervalHypothesis::closed(0.7, 0.9), S, {0.45}, r);
  REQUIRE(relabeled.size() == 2);
  CHECK(relabeled.items()[0].y == 0);
  CHECK(relabeled.items()[1].y == 1);
}

TEST_CASE("interval flood declines test points it cannot capture") {
  const Attacker a = make_interval_flood_attacker();
  RngStream r = RngStream::from_seed(199);
  const IntervalHypothesis target = IntervalHypothesis::empty();
  const Dataset S = line_dataset({{0.5, 0}});
  CHECK(a.poison(target, S, {0.5}, r).empty());
  CHECK(a.poison(target, S, {1.5}, r).empty());
  CHECK(a.poison(target, S, {-0.5}, r).empty());
}

TEST_CASE("svm one-point attack places the margin-breaking example") {
  const UnitVector v1({1.0, 0.0, 0.0});
  const Attacker a = make_svm_one_point_attacker(v1, 0.125);
  CHECK(a.budget.finite);
  CHECK(a.budget.t == 1);
  RngStream r = RngStream::from_seed(211);
  const LinearHypothesis target({1.0, 0.0, 0.0}, 0.0625);

  const Dataset with_pos(
      std::vector<LabeledExample>{{{0.0, 0.0, 1.0}, 1}, {{-1.0, 0.0, 0.0}, 0}});
  const Dataset neg_point = a.poison(target, with_pos, {0.0, 1.0, 0.0}, r);
  REQUIRE(neg_point.size() == 1);
  CHECK(neg_point.items()[0].y == 0);
  CHECK(neg_point.items()[0].x[0] == doctest::Approx(-0.125));
  CHECK(neg_point.items()[0].x[1] == doctest::Approx(std::sqrt(1.0 - 0.125 * 0.125)));
  CHECK(neg_point.items()[0].x[2] == doctest::Approx(0.0));

  const Dataset no_pos(std::vector<LabeledExample>{{{-1.0, 0.0, 0.0}, 0}});
  const Dataset pos_point = a.poison(target, no_pos, {0.0, 1.0, 0.0}, r);
  REQUIRE(pos_point.size() == 1);
  CHECK(pos_point.items()[0].y == 1);
  CHECK(pos_point.items()[0].x[0] == doctest::Approx(0.0));
  CHECK(pos_point.items()[0].x[1] == doctest::Approx(-1.0));

  const Dataset rescaled = a.poison(target, with_pos, {0.6, 0.8, 0.0}, r);
  REQUIRE(rescaled.size() == 1);
  CHECK(rescaled.items()[0].x[1] == doctest::Approx(std::sqrt(1.0 - 0.125 * 0.125)));

  CHECK(a.poison(target, with_pos, {1.0, 0.0, 0.0}, r).empty());
  CHECK(a.poison(target, with_pos, {-1.0, 0.0, 0.0}, r).empty());
}

TEST_CASE("sphere reflection mirrors the sample through the test axis") {
  const Attacker a = make_sphere_reflection_attacker(1e-3);
  RngStream r = RngStream::from_seed(223);
  const UnitVector w({0.0, 0.0, 1.0});
  const CircleBandHypothesis target(w, 1, 1e-3);

  const Point x0 = circle_pt(0.0);
  const Dataset S(std::vector<LabeledExample>{{circle_pt(1.0), 1},
                                              {circle_pt(2.5), 1}});
  const Dataset poison = a.poison(target, S, x0, r);
  REQUIRE(poison.size() == 2);

  std::vector<LabeledExample> expected;
  const UnitVector axis(x0);
  for (const auto& e : S.items()) {
    expected.push_back({reflect_axis(UnitVector(e.x), axis).coords(), 0});
  }
  CHECK(poison == Dataset(std::move(expected)));
  for (const auto& e : poison.items()) {
    CHECK(target.predict(e.x) == e.y);
  }
}

TEST_CASE("sphere reflection declines when the sample crowds the test point") {
  const Attacker a = make_sphere_reflection_attacker(1e-3);
  RngStream r = RngStream::from_seed(227);
  const UnitVector w({0.0, 0.0, 1.0});
  const CircleBandHypothesis target(w, 1, 1e-3);
  const Point x0 = circle_pt(0.0);
  const Dataset S(std::vector<LabeledExample>{{circle_pt(0.01), 1}});
  CHECK(a.poison(target, S, x0, r).empty());
  CHECK_THROWS_AS(a.poison(target, S, {0.5, 0.0, 0.0}, r), Error);
}

TEST_CASE("margin reflection mirrors exactly the sphere-borne examples") {
  RngStream seeds = RngStream::from_seed(229);
  bool fired = false;
  for (int attempt = 0; attempt < 300 && !fired; ++attempt) {
    RngStream setup = seeds.derive(attempt);
    const Experiment ex = make_margin_lb_experiment(9, 0.05, setup);
    const Attacker a = make_margin_reflection_attacker(ex.ctx);
    RngStream draw = setup.derive("draw");
    const Dataset S = ex.dist.sample_dataset(12, draw);

    Point x0;
    RngStream xr = setup.derive("x0");
    for (int k = 0; k < 200; ++k) {
      const LabeledExample e = ex.dist.sample(xr);
      if (e.x.back() == 0.0) {
        x0 = e.x;
        break;
      }
    }
    if (x0.empty()) continue;

    RngStream pr = setup.derive("poison");
    const Dataset poison = a.poison(*ex.dist.target, S, x0, pr);
    if (poison.empty()) continue;
    fired = true;

    std::size_t sphere_count = 0;
    for (const auto& e : S.items()) {
      if (e.x.back() == 0.0) ++sphere_count;
    }
    CHECK(poison.size() == sphere_count);
    for (const auto& e : poison.items()) {
      CHECK(e.x.back() == 0.0);
      CHECK(ex.dist.target->predict(e.x) == e.y);
    }
  }
  CHECK(fired);
}

TEST_CASE("margin reflection declines apex and axis-aligned test points") {
  RngStream setup = RngStream::from_seed(233);
  const Experiment ex = make_margin_lb_experiment(9, 0.05, setup);
  const Attacker a = make_margin_reflection_attacker(ex.ctx);
  RngStream draw = setup.derive("draw");
  const Dataset S = ex.dist.sample_dataset(8, draw);
  RngStream r = RngStream::from_seed(239);

  Point apex(9, 0.0);
  apex[8] = 1.0;
  CHECK(a.poison(*ex.dist.target, S, apex, r).empty());

  Point aligned = scaled(ex.ctx.w_star->coords(), *ex.ctx.gamma);
  aligned.push_back(0.0);
  CHECK(a.poison(*ex.dist.target, S, aligned, r).empty());

  AttackContext bare;
  CHECK_THROWS_AS(make_margin_reflection_attacker(bare), Error);
}

TEST_CASE("circle t-point attack mirrors the on-circle examples") {
  const UnitVector q({0.0, 0.0, 1.0});
  const auto circles = std::make_shared<SphereCirclesHypothesis>(
      std::vector<UnitVector>{q}, std::vector<Label>{1});
  AttackContext ctx;
  ctx.circles = circles;
  const Attacker a = make_circle_tpoint_attacker(2, ctx);
  CHECK(a.budget.finite);
  CHECK(a.budget.t == 2);

  const Point center = SphereCirclesHypothesis::sphere_center(0);
  const Point x0 = marked_pt(center, 0.0);
  RngStream r = RngStream::from_seed(241);

  const Dataset S(std::vector<LabeledExample>{{marked_pt(center, 1.0), 1},
                                              {marked_pt(center, 2.0), 1},
                                              {{4.0, 0.0, 0.0}, 0},
                                              {{0.0, 0.0, 0.0}, 0}});
  const Dataset poison = a.poison(*circles, S, x0, r);
  REQUIRE(poison.size() == 2);
  for (const auto& e : poison.items()) {
    CHECK(e.y == 0);
    CHECK(std::sqrt(squared_distance(e.x, center)) == doctest::Approx(1.0));
    CHECK_FALSE(circles->on_marked_circle(0, e.x));
    CHECK(circles->predict(e.x) == e.y);
  }
}

TEST_CASE("circle t-point attack declines bad test points and oversize circles") {
  const UnitVector q({0.0, 0.0, 1.0});
  const auto circles = std::make_shared<SphereCirclesHypothesis>(
      std::vector<UnitVector>{q}, std::vector<Label>{1});
  AttackContext ctx;
  ctx.circles = circles;
  const Point center = SphereCirclesHypothesis::sphere_center(0);
  RngStream r = RngStream::from_seed(251);

  const Dataset three(std::vector<LabeledExample>{{marked_pt(center, 1.0), 1},
                                                  {marked_pt(center, 2.0), 1},
                                                  {marked_pt(center, 3.0), 1}});
  const Attacker tight = make_circle_tpoint_attacker(2, ctx);
  CHECK(tight.poison(*circles, three, marked_pt(center, 0.0), r).empty());

  const Attacker a = make_circle_tpoint_attacker(4, ctx);
  CHECK(a.poison(*circles, three, {0.0, 0.0, 0.0}, r).empty());
  CHECK(a.poison(*circles, three, {4.0, 0.0, 0.0}, r).empty());
  CHECK(a.poison(*circles, three, marked_pt(center, 1.0), r).empty());

  AttackContext bare;
  CHECK_THROWS_AS(make_circle_tpoint_attacker(2, bare), Error);
}

TEST_CASE("hollow star attack pins every spare domain point") {
  const HollowStarConstruction hs = make_hollow_star_class(5);
  const Attacker a = make_hollow_star_attacker(hs.cls, 2);
  CHECK(a.budget.finite);
  CHECK(a.budget.t == 3);
  RngStream r = RngStream::from_seed(257);
  const FiniteRowHypothesis target(hs.cls, 2);

  const Dataset S(std::vector<LabeledExample>{{hs.cls->domain_point(1), 0}});
  const Dataset poison = a.poison(target, S, hs.cls->domain_point(4), r);
  std::vector<LabeledExample> expected;
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{3}}) {
    expected.push_back({hs.cls->domain_point(j), 0});
  }
  CHECK(poison == Dataset(std::move(expected)));

  CHECK(a.poison(target, S, hs.cls->domain_point(2), r).empty());
  CHECK(a.poison(target, S, {7.5}, r).empty());
  CHECK(a.poison(target, S, hs.cls->domain_point(1), r).empty());
}

TEST_CASE("boundary reflection flips examples across the separator") {
  const Attacker a = make_boundary_reflection_attacker(
      UnitVector({1.0, 0.0}), 0.0);
  CHECK_FALSE(a.budget.finite);
  RngStream r = RngStream::from_seed(263);
  const LinearHypothesis target({1.0, 0.0}, 0.0);

  const Dataset S(std::vector<LabeledExample>{{{0.5, 0.3}, 1}});
  const Dataset poison = a.poison(target, S, {0.9, 0.0}, r);
  REQUIRE(poison.size() == 1);
  CHECK(poison.items()[0].x[0] == doctest::Approx(-0.5));
  CHECK(poison.items()[0].x[1] == doctest::Approx(0.3));
  CHECK(poison.items()[0].y == 0);

  const Dataset near_plane(std::vector<LabeledExample>{{{1e-10, 0.7}, 1}});
  CHECK(a.poison(target, near_plane, {0.9, 0.0}, r).empty());

  const Attacker off = make_boundary_reflection_attacker(
      UnitVector({1.0, 0.0}), -0.5);
  const Dataset S2(std::vector<LabeledExample>{{{0.7, 0.0}, 1}});
  const Dataset poison2 = off.poison(target, S2, {0.9, 0.0}, r);
  REQUIRE(poison2.size() == 1);
  CHECK(poison2.items()[0].x[0] == doctest::Approx(0.3));

  const Dataset wrong_dim(std::vector<LabeledExample>{{{0.1, 0.2, 0.3}, 1}});
  CHECK_THROWS_AS(a.poison(target, wrong_dim, {0.9, 0.0}, r), Error);
}

TEST_CASE("budget wrapper truncates in canonical order") {
  const Attacker inner = make_interval_flood_attacker();
  const Attacker a = make_budget_wrapper(inner, 1);
  CHECK(a.name == "budget(interval_flood,t=1)");
  CHECK(a.budget.finite);
  CHECK(a.budget.t == 1);
  RngStream r = RngStream::from_seed(269);
  const IntervalHypothesis target = IntervalHypothesis::empty();

  const Dataset S = line_dataset({{0.3, 0}, {0.6, 0}});
  const Dataset cut = a.poison(target, S, {0.45}, r);
  REQUIRE(cut.size() == 1);
  CHECK(cut.items()[0].x[0] == doctest::Approx(0.15));

  const Attacker roomy = make_budget_wrapper(make_interval_flood_attacker(), 10);
  const Dataset full = roomy.poison(target, S, {0.45}, r);
  CHECK(full.size() == 2);
}

TEST_CASE("attackers pass focused audits with zero violations") {
  const TargetedDistribution interval_dist = make_interval_experiment(
      IntervalHypothesis::empty(), PiecewiseDensity::uniform());

  const AuditReport flood =
      audit_attacker(make_interval_flood_attacker(), interval_dist, 30, 200,
                     RngStream::from_seed(271));
  CHECK(flood.invocations == 200);
  CHECK(flood.clean_label_violations == 0);
  CHECK(flood.budget_violations == 0);
  CHECK(flood.nonempty_poisons > 0);

  const AuditReport capped = audit_attacker(
      make_budget_wrapper(make_interval_flood_attacker(), 2), interval_dist,
      30, 200, RngStream::from_seed(277));
  CHECK(capped.clean_label_violations == 0);
  CHECK(capped.budget_violations == 0);

  const TargetedDistribution half = make_halfsphere_experiment(8, 0.01);
  const AuditReport one_point = audit_attacker(
      make_svm_one_point_attacker(UnitVector(Point{1, 0, 0, 0, 0, 0, 0, 0}),
                                  0.125),
      half, 20, 200, RngStream::from_seed(281));
  CHECK(one_point.clean_label_violations == 0);
  CHECK(one_point.budget_violations == 0);
  CHECK(one_point.nonempty_poisons > 0);

  const AuditReport hollow = audit_attacker(
      make_hollow_star_attacker(make_hollow_star_class(5).cls, 0),
      make_hollow_star_experiment(make_hollow_star_class(5).cls, 0).dist, 4,
      200, RngStream::from_seed(283));
  CHECK(hollow.clean_label_violations == 0);
  CHECK(hollow.budget_violations == 0);
  CHECK(hollow.nonempty_poisons > 0);

  const AuditReport tpoint = audit_attacker(
      [](const Experiment& ex) { return make_circle_tpoint_attacker(4, ex.ctx); },
      [](RngStream& r) { return make_circles_experiment(1, 4, 8, r); }, 8, 200,
      RngStream::from_seed(293));
  CHECK(tpoint.invocations == 200);
  CHECK(tpoint.clean_label_violations == 0);
  CHECK(tpoint.budget_violations == 0);
  CHECK(tpoint.nonempty_poisons > 0);
}

}  // TEST_SUITE
