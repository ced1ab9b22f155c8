#include <doctest.h>

#include <cmath>

#include "cleanlabel/core.hpp"
#include "cleanlabel/geometry.hpp"

using namespace cleanlabel;

namespace {

UnitVector random_unit(RngStream& r, std::size_t n) {
  Point v(n);
  double s = 0.0;
  do {
    for (auto& c : v) c = r.next_gaussian();
    s = norm(v);
  } while (s < 1e-6);
  for (auto& c : v) c /= s;
  return UnitVector(v);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("unit vector wrapper enforces unit norm") {
  CHECK_NOTHROW(UnitVector({0.0, 1.0}));
  CHECK_THROWS_AS(UnitVector({0.0, 0.5}), Error);
  CHECK_THROWS_AS(UnitVector({1.0, 1.0}), Error);
}

TEST_CASE("axis reflection flips the orthogonal part") {
  const UnitVector axis({1.0, 0.0});
  const UnitVector p({0.0, 1.0});
  const UnitVector q = reflect_axis(p, axis);
  CHECK(q.coords()[0] == doctest::Approx(0.0));
  CHECK(q.coords()[1] == doctest::Approx(-1.0));

  const UnitVector on_axis({1.0, 0.0});
  const UnitVector fixed = reflect_axis(on_axis, axis);
  CHECK(squared_distance(fixed.coords(), on_axis.coords()) < 1e-18);
}

TEST_CASE("axis reflection is an involution preserving the axis component") {
  RngStream r = RngStream::from_seed(11);
  for (int i = 0; i < 400; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(r.next_below(6));
    const UnitVector axis = random_unit(r, n);
    const UnitVector x = random_unit(r, n);
    const UnitVector y = reflect_axis(x, axis);
    CHECK(norm(y.coords()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dot(y.coords(), axis.coords()) ==
          doctest::Approx(dot(x.coords(), axis.coords())).epsilon(1e-9));
    const UnitVector back = reflect_axis(y, axis);
    CHECK(squared_distance(back.coords(), x.coords()) < 1e-18);
  }
}

TEST_CASE("span-plane reflection negates the off-line coordinate in a standard frame") {
  const UnitVector v1({1.0, 0.0, 0.0});
  const Point x0{0.0, 1.0, 0.0};
  const Point x{0.3, -0.7, 0.2};
  const Point y = reflect_span_plane(x, x0, v1);
  CHECK(y[0] == doctest::Approx(-0.3));
  CHECK(y[1] == doctest::Approx(-0.7));
  CHECK(y[2] == doctest::Approx(0.2));
}

TEST_CASE("span-plane reflection fixes x0 and is an in-plane isometry") {
  RngStream r = RngStream::from_seed(13);
  int done = 0;
  while (done < 400) {
    const std::size_t n = 3 + static_cast<std::size_t>(r.next_below(5));
    const UnitVector v1 = random_unit(r, n);
    const Point x0 = random_unit(r, n).coords();
    if (std::abs(std::abs(dot(x0, v1.coords())) - 1.0) < 1e-6) continue;
    const Point x = random_unit(r, n).coords();
    const Point y = reflect_span_plane(x, x0, v1);
    CHECK(norm(y) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dot(y, x0) == doctest::Approx(dot(x, x0)).epsilon(1e-9));
    const Point fixed = reflect_span_plane(x0, x0, v1);
    CHECK(squared_distance(fixed, x0) < 1e-18);
    const Point back = reflect_span_plane(y, x0, v1);
    CHECK(squared_distance(back, x) < 1e-15);
    ++done;
  }
}

TEST_CASE("span-plane reflection rejects x0 parallel to v1") {
  const UnitVector v1({1.0, 0.0, 0.0});
  const Point x0{-1.0, 0.0, 0.0};
  CHECK_THROWS_AS(reflect_span_plane(Point{0.1, 0.2, 0.3}, x0, v1), Error);
}

TEST_CASE("circle points satisfy the defining sphere identities") {
  const UnitVector q({0.0, 0.0, 1.0});
  const SphereCircle c(q);
  CHECK(norm(c.basis_u1()) == doctest::Approx(1.0));
  CHECK(norm(c.basis_u2()) == doctest::Approx(1.0));
  CHECK(dot(c.basis_u1(), c.basis_u2()) == doctest::Approx(0.0));
  CHECK(dot(c.basis_u1(), q.coords()) == doctest::Approx(0.0));
  RngStream r = RngStream::from_seed(17);
  for (int i = 0; i < 200; ++i) {
    const double theta = r.next_double() * 6.283185307179586;
    const UnitVector p = circle_point(c, theta);
    CHECK(norm(p.coords()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(q.coords(), p.coords()) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("half-sphere samples stay on the positive side of the axis") {
  RngStream r = RngStream::from_seed(19);
  const std::size_t n = 3;
  const UnitVector axis = random_unit(r, n);
  double acc = 0.0;
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    const UnitVector x = sample_half_sphere(n, axis, r);
    CHECK(norm(x.coords()) == doctest::Approx(1.0).epsilon(1e-9));
    const double c = dot(x.coords(), axis.coords());
    CHECK(c >= 0.0);
    acc += c;
  }
  CHECK(acc / trials == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("sphere samples are unit length in any dimension") {
  RngStream r = RngStream::from_seed(23);
  for (std::size_t n : {std::size_t{2}, std::size_t{3}, std::size_t{16}}) {
    for (int i = 0; i < 50; ++i) {
      CHECK(norm(sample_sphere(n, r).coords()) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("random rotations are orthogonal and invert cleanly") {
  RngStream r = RngStream::from_seed(29);
  const std::size_t n = 5;
  const Rotation rot = random_rotation(n, r);
  for (int i = 0; i < 100; ++i) {
    const Point x = random_unit(r, n).coords();
    const Point y = rot.apply(x);
    CHECK(norm(y) == doctest::Approx(1.0).epsilon(1e-9));
    const Point back = rot.apply_inverse(y);
    CHECK(squared_distance(back, x) < 1e-18);
  }
  const Point x2 = random_unit(r, n).coords();
  const Point y2 = random_unit(r, n).coords();
  CHECK(dot(rot.apply(x2), rot.apply(y2)) == doctest::Approx(dot(x2, y2)).epsilon(1e-9));
}

}  // TEST_SUITE
