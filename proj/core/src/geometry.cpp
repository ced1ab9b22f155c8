#include "cleanlabel/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cleanlabel {

UnitVector::UnitVector(Point coords) : coords_(std::move(coords)) {
  if (coords_.empty()) {
    fail(ErrorKind::precondition, "unit vector needs at least one coordinate");
  }
  check_finite(coords_);
  const double n = norm(coords_);
  if (std::abs(n - 1.0) > kUnitTolerance) {
    fail(ErrorKind::precondition, "vector is not unit-norm");
  }
}

SphereCircle::SphereCircle(UnitVector q) : q_(std::move(q)) {
  if (q_.dimension() != 3) {
    fail(ErrorKind::precondition, "sphere circles live in dimension 3");
  }
  // Orthonormal basis of q's complement, built by Gram-Schmidt against the
  // two coordinate axes least aligned with q. Ties break toward the lower
  // index so the parameterization is reproducible.
  const Point& qc = q_.coords();
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(qc[a]), fb = std::abs(qc[b]);
    if (fa != fb) return fa < fb;
    return a < b;
  });

  Point e1(3, 0.0), e2(3, 0.0);
  e1[order[0]] = 1.0;
  e2[order[1]] = 1.0;

  u1_ = sub(e1, scaled(qc, dot(e1, qc)));
  u1_ = scaled(u1_, 1.0 / norm(u1_));
  u2_ = sub(sub(e2, scaled(qc, dot(e2, qc))), scaled(u1_, dot(e2, u1_)));
  u2_ = scaled(u2_, 1.0 / norm(u2_));
}

UnitVector reflect_axis(const UnitVector& x, const UnitVector& x0) {
  if (x.dimension() != x0.dimension()) {
    fail(ErrorKind::dimension_mismatch, "reflect_axis: dimension mismatch");
  }
  const double c = dot(x0.coords(), x.coords());
  return UnitVector(sub(scaled(x0.coords(), 2.0 * c), x.coords()));
}

Point reflect_span_plane(const Point& x, const Point& x0,
                         const UnitVector& v1) {
  if (x.size() != x0.size() || x.size() != v1.dimension()) {
    fail(ErrorKind::dimension_mismatch, "reflect_span_plane: dimension mismatch");
  }
  const double x0_norm2 = dot(x0, x0);
  if (x0_norm2 < kUnitTolerance * kUnitTolerance) {
    fail(ErrorKind::degenerate_geometry, "reflect_span_plane: zero axis");
  }
  // v2 spans the part of x0 orthogonal to v1.
  Point r = sub(x0, scaled(v1.coords(), dot(x0, v1.coords())));
  const double rn = norm(r);
  if (rn <= kUnitTolerance * std::sqrt(x0_norm2)) {
    fail(ErrorKind::degenerate_geometry,
         "reflect_span_plane: axis parallel to v1");
  }
  const Point v2 = scaled(r, 1.0 / rn);

  const double a = dot(x, v1.coords());
  const double b = dot(x, v2);
  const Point x_par = add(scaled(v1.coords(), a), scaled(v2, b));
  const double c = dot(x_par, x0);
  // x_perp + (2<x_par,x0>/||x0||^2) x0 - x_par
  Point out = sub(x, scaled(x_par, 2.0));
  out = add(out, scaled(x0, 2.0 * c / x0_norm2));
  return out;
}

UnitVector sample_sphere(std::size_t n, RngStream& rng) {
  if (n < 2) {
    fail(ErrorKind::precondition, "sample_sphere: dimension must be >= 2");
  }
  Point g(n);
  double nn = 0.0;
  do {
    for (std::size_t i = 0; i < n; ++i) g[i] = rng.next_gaussian();
    nn = norm(g);
  } while (nn < 1e-8);
  return UnitVector(scaled(g, 1.0 / nn));
}

UnitVector sample_half_sphere(std::size_t n, const UnitVector& axis,
                              RngStream& rng) {
  if (axis.dimension() != n) {
    fail(ErrorKind::dimension_mismatch, "sample_half_sphere: axis dimension");
  }
  UnitVector x = sample_sphere(n, rng);
  if (dot(x.coords(), axis.coords()) < 0.0) {
    return UnitVector(scaled(x.coords(), -1.0));
  }
  return x;
}

UnitVector circle_point(const SphereCircle& c, double angle) {
  const double r = SphereCircle::radius();
  Point p = c.center();
  p = add(p, scaled(c.basis_u1(), r * std::cos(angle)));
  p = add(p, scaled(c.basis_u2(), r * std::sin(angle)));
  return UnitVector(std::move(p));
}

// ---------------------------------------------------------------------------
// Rotations

Rotation::Rotation(std::size_t n, std::vector<double> row_major)
    : n_(n), m_(std::move(row_major)) {
  if (m_.size() != n_ * n_) {
    fail(ErrorKind::precondition, "rotation matrix has wrong size");
  }
}

Point Rotation::apply(const Point& x) const {
  if (x.size() != n_) {
    fail(ErrorKind::dimension_mismatch, "rotation: dimension mismatch");
  }
  Point y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    const double* row = &m_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Point Rotation::apply_inverse(const Point& x) const {
  if (x.size() != n_) {
    fail(ErrorKind::dimension_mismatch, "rotation: dimension mismatch");
  }
  Point y(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += m_[i * n_ + j] * x[i];
    y[j] = s;
  }
  return y;
}

Rotation random_rotation(std::size_t n, RngStream& rng) {
  if (n < 1) {
    fail(ErrorKind::precondition, "random_rotation: dimension must be >= 1");
  }
  std::vector<double> a(n * n);
  for (double& v : a) v = rng.next_gaussian();

  // Householder QR. Reflectors are kept to form Q afterwards; folding the
  // signs of R's diagonal into Q makes the distribution exactly
  // rotation-invariant rather than merely orthogonal.
  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> vnorm2(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = k; i < n; ++i) s += a[i * n + k] * a[i * n + k];
    s = std::sqrt(s);
    if (s == 0.0) continue;
    const double alpha = a[k * n + k] > 0.0 ? -s : s;
    std::vector<double> v(n - k);
    v[0] = a[k * n + k] - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i - k] = a[i * n + k];
    double vv = 0.0;
    for (double t : v) vv += t * t;
    if (vv == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double d = 0.0;
      for (std::size_t i = k; i < n; ++i) d += v[i - k] * a[i * n + j];
      const double f = 2.0 * d / vv;
      for (std::size_t i = k; i < n; ++i) a[i * n + j] -= f * v[i - k];
    }
    a[k * n + k] = alpha;  // exact diagonal, free of cancellation noise
    reflectors[k] = std::move(v);
    vnorm2[k] = vv;
  }

  // Q = H_0 H_1 ... H_{n-1}, accumulated right-to-left onto the identity.
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    if (reflectors[kk].empty()) continue;
    const auto& v = reflectors[kk];
    const double vv = vnorm2[kk];
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0.0;
      for (std::size_t i = kk; i < n; ++i) d += v[i - kk] * q[i * n + j];
      const double f = 2.0 * d / vv;
      for (std::size_t i = kk; i < n; ++i) q[i * n + j] -= f * v[i - kk];
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (a[k * n + k] < 0.0) {
      for (std::size_t i = 0; i < n; ++i) q[i * n + k] = -q[i * n + k];
    }
  }
  return Rotation(n, std::move(q));
}

}  // namespace cleanlabel
