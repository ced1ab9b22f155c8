// Vector geometry for the attack constructions: sphere sampling, reflections
// through axes and in-plane lines, circles of intersection, Haar-random
// rotations.
#pragma once

#include <cstddef>

#include "cleanlabel/core.hpp"

namespace cleanlabel {

// Construction-time tolerances are tighter than derived-identity tolerances;
// reflections accumulate a little rounding.
inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kGeometryTolerance = 1e-9;

// A point on the unit sphere, validated at construction (norm within 1e-12).
class UnitVector {
 public:
  explicit UnitVector(Point coords);

  const Point& coords() const noexcept { return coords_; }
  std::size_t dimension() const noexcept { return coords_.size(); }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  Point coords_;
};

// The circle cut out of the unit sphere in R^3 by the unit sphere centered at
// q: center q/2, radius sqrt(3)/2. Parameterized against a deterministic
// orthonormal basis of q's orthogonal complement.
class SphereCircle {
 public:
  explicit SphereCircle(UnitVector q);

  const UnitVector& q() const noexcept { return q_; }
  Point center() const { return scaled(q_.coords(), 0.5); }
  static double radius() { return 0.8660254037844386; }  // sqrt(3)/2

  const Point& basis_u1() const noexcept { return u1_; }
  const Point& basis_u2() const noexcept { return u2_; }

 private:
  UnitVector q_;
  Point u1_, u2_;
};

// Reflection of x through the line spanned by x0: 2<x0,x>x0 - x.
// Both inputs unit; the output is unit up to rounding.
UnitVector reflect_axis(const UnitVector& x, const UnitVector& x0);

// Reflects the span{v1, v2} component of x across the line through x0 inside
// that plane, where v2 is the unit vector along x0 - <x0,v1>v1, and keeps the
// orthogonal component. x0 is a general nonzero axis (its norm divides out).
// Errors when x0 is parallel to v1, which leaves v2 undefined.
Point reflect_span_plane(const Point& x, const Point& x0, const UnitVector& v1);

// Uniform on the unit sphere in R^n (Gaussian normalization). n >= 2.
UnitVector sample_sphere(std::size_t n, RngStream& rng);

// Uniform on {x : ||x|| = 1, <x, axis> >= 0} by sign-flipping sphere samples.
UnitVector sample_half_sphere(std::size_t n, const UnitVector& axis,
                              RngStream& rng);

// Point of c at the given angle: q/2 + r(cos(angle) u1 + sin(angle) u2).
UnitVector circle_point(const SphereCircle& c, double angle);

// A dense orthogonal matrix acting on points.
class Rotation {
 public:
  Rotation(std::size_t n, std::vector<double> row_major);

  std::size_t dimension() const noexcept { return n_; }
  Point apply(const Point& x) const;
  // Applies the transpose (= inverse for orthogonal matrices).
  Point apply_inverse(const Point& x) const;

 private:
  std::size_t n_;
  std::vector<double> m_;  // row-major n x n
};

// Haar-distributed rotation via QR of a Gaussian matrix with the R diagonal's
// signs folded into Q. n >= 1.
Rotation random_rotation(std::size_t n, RngStream& rng);

}  // namespace cleanlabel
