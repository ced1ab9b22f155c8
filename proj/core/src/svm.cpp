#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "cleanlabel/learners.hpp"

namespace cleanlabel {

namespace {

constexpr double kGapTolerance = 1e-9;
constexpr std::size_t kMaxIterations = 2000000;
constexpr std::size_t kMaxPoints = 2000;
constexpr double kAlphaDivergence = 1e12;

}  // namespace

// Hard-margin SMO. The dual is minimized over alpha >= 0 with sum(y*alpha)=0
// by repeatedly optimizing the most violating pair (largest KKT gap); the
// offset is read off the converged gap interval. Duplicate instances carry no
// weight in a hard margin, so they are merged up front.
std::shared_ptr<const LinearHypothesis> fit_svm(const Dataset& S) {
  if (S.empty()) {
    fail(ErrorKind::precondition, "cannot fit a separator to an empty sample");
  }

  std::map<Point, int> dedup;
  for (const auto& e : S.items()) {
    const int y = e.y == 1 ? 1 : -1;
    auto [it, inserted] = dedup.emplace(e.x, y);
    if (!inserted && it->second != y) {
      fail(ErrorKind::unrealizable,
           "conflicting labels for one instance in the sample");
    }
  }

  std::vector<Point> xs;
  std::vector<int> ys;
  xs.reserve(dedup.size());
  ys.reserve(dedup.size());
  std::size_t n_pos = 0;
  for (auto& [x, y] : dedup) {
    xs.push_back(x);
    ys.push_back(y);
    if (y > 0) ++n_pos;
  }
  const std::size_t m = xs.size();
  const std::size_t dim = xs[0].size();

  if (n_pos == 0 || n_pos == m) {
    // Single-class sample: any separator constant on the data region works.
    Point w(dim, 0.0);
    w[0] = 1.0;
    return std::make_shared<const LinearHypothesis>(w, n_pos == m ? 4.0 : -4.0);
  }
  if (m > kMaxPoints) {
    fail(ErrorKind::policy, "sample too large for the dense Gram matrix");
  }

  std::vector<double> K(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      K[i * m + j] = K[j * m + i] = dot(xs[i], xs[j]);
    }
  }

  std::vector<double> alpha(m, 0.0);
  std::vector<double> G(m, -1.0);  // gradient of the dual at alpha = 0

  double m_val = 0.0, M_val = 0.0;
  std::size_t it = 0;
  for (;; ++it) {
    if (it >= kMaxIterations) {
      fail(ErrorKind::numerical, "margin optimization did not converge");
    }

    // Most violating pair: i maximizes -y*G over coordinates free to grow,
    // j minimizes it over coordinates free to shrink.
    std::size_t bi = m, bj = m;
    m_val = -std::numeric_limits<double>::infinity();
    M_val = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -ys[t] * G[t];
      const bool in_up = ys[t] > 0 || alpha[t] > 0.0;
      const bool in_low = ys[t] < 0 || alpha[t] > 0.0;
      if (in_up && v > m_val) {
        m_val = v;
        bi = t;
      }
      if (in_low && v < M_val) {
        M_val = v;
        bj = t;
      }
    }
    if (m_val - M_val <= kGapTolerance) break;

    const std::size_t i = bi, j = bj;
    double quad = K[i * m + i] + K[j * m + j] - 2.0 * K[i * m + j];
    quad = std::max(quad, 1e-12);
    double d = (m_val - M_val) / quad;

    double ub = std::numeric_limits<double>::infinity();
    if (ys[i] < 0) ub = std::min(ub, alpha[i]);
    if (ys[j] > 0) ub = std::min(ub, alpha[j]);
    d = std::min(d, ub);

    alpha[i] += ys[i] > 0 ? d : -d;
    alpha[j] -= ys[j] > 0 ? d : -d;
    if (alpha[i] > kAlphaDivergence || alpha[j] > kAlphaDivergence) {
      fail(ErrorKind::unrealizable, "sample is not linearly separable");
    }
    for (std::size_t t = 0; t < m; ++t) {
      G[t] += ys[t] * d * (K[t * m + i] - K[t * m + j]);
    }
  }

  Point w(dim, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (alpha[i] == 0.0) continue;
    const double coef = alpha[i] * ys[i];
    for (std::size_t c = 0; c < dim; ++c) w[c] += coef * xs[i][c];
  }
  if (norm(w) < 1e-15) {
    fail(ErrorKind::numerical, "degenerate separator");
  }
  const double b = (m_val + M_val) / 2.0;
  return std::make_shared<const LinearHypothesis>(std::move(w), b);
}

}  // namespace cleanlabel
