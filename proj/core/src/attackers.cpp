#include "cleanlabel/attackers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace cleanlabel {

namespace {

// Largest poison set interval_flood is willing to build before declaring the
// target gap too small to starve out.
constexpr std::size_t kMaxFloodPoints = 2000000;

std::string sized_name(const char* base, std::size_t t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s(t=%zu)", base, t);
  return std::string(buf);
}

}  // namespace

Attacker make_null_attacker() {
  Attacker a;
  a.name = "null";
  a.budget = Budget::Finite(0);
  a.poison_fn = [](const Hypothesis&, const Dataset&, const Point&,
                   RngStream&) { return Dataset{}; };
  return a;
}

Attacker make_interval_flood_attacker() {
  Attacker a;
  a.name = "interval_flood";
  a.budget = Budget::Unbounded();
  a.poison_fn = [](const Hypothesis& target, const Dataset& S, const Point& x0,
                   RngStream&) {
    if (x0.size() != 1) {
      fail(ErrorKind::precondition, "interval_flood expects 1-D instances");
    }
    const double z = x0[0];
    std::vector<double> cuts{0.0, 1.0};
    for (const auto& e : S.items()) {
      if (e.x.size() != 1) {
        fail(ErrorKind::precondition, "interval_flood expects 1-D instances");
      }
      if (e.y == 0 && e.x[0] >= 0.0 && e.x[0] <= 1.0) cuts.push_back(e.x[0]);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // x0 has to sit strictly inside one gap between negatives; a test point
    // that collides with a training negative cannot be captured by an open
    // interval at all.
    const auto hi_it = std::upper_bound(cuts.begin(), cuts.end(), z);
    if (hi_it == cuts.begin() || hi_it == cuts.end()) return Dataset{};
    const double lo = *(hi_it - 1);
    const double hi = *hi_it;
    if (!(z > lo) || !(z < hi)) return Dataset{};
    const double gap = hi - lo;
    if (!(gap > 0.0)) return Dataset{};
    const double limit = gap * (1.0 - 1e-6);

    std::size_t total = 0;
    std::vector<LabeledExample> poison;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a_lo = cuts[i];
      const double a_hi = cuts[i + 1];
      if (a_lo == lo) continue;
      const double len = a_hi - a_lo;
      if (len <= limit) continue;
      const auto pieces = static_cast<std::size_t>(std::ceil(len / limit));
      if (pieces < 2) continue;
      total += pieces - 1;
      if (total > kMaxFloodPoints) return Dataset{};
      for (std::size_t k = 1; k < pieces; ++k) {
        Point p{a_lo + len * static_cast<double>(k) / static_cast<double>(pieces)};
        Label y = target.predict(p);
        poison.push_back({std::move(p), y});
      }
    }
    return Dataset(std::move(poison));
  };
  return a;
}

Attacker make_svm_one_point_attacker(UnitVector v1, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    fail(ErrorKind::precondition, "svm_one_point needs gamma in (0,1)");
  }
  Attacker a;
  a.name = "svm_one_point";
  a.budget = Budget::Finite(1);
  a.poison_fn = [v1 = std::move(v1), gamma](const Hypothesis&, const Dataset& S,
                                            const Point& x0, RngStream&) {
    if (x0.size() != v1.dimension()) {
      fail(ErrorKind::dimension_mismatch, "svm_one_point: x0 dimension");
    }
    Point r = sub(x0, scaled(v1.coords(), dot(x0, v1.coords())));
    const double nr = norm(r);
    if (nr <= 1e-12) return Dataset{};
    const Point v2 = scaled(r, 1.0 / nr);

    std::size_t positives = 0;
    for (const auto& e : S.items()) {
      if (e.y == 1) ++positives;
    }

    Dataset poison;
    if (positives == 0) {
      poison.add({scaled(v2, -1.0), 1});
    } else {
      Point p = add(scaled(v1.coords(), -gamma),
                    scaled(v2, std::sqrt(1.0 - gamma * gamma)));
      poison.add({std::move(p), 0});
    }
    return poison;
  };
  return a;
}

Attacker make_sphere_reflection_attacker(double eta) {
  if (!(eta > 0.0)) {
    fail(ErrorKind::precondition, "sphere_reflection needs eta > 0");
  }
  Attacker a;
  a.name = "sphere_reflection";
  a.budget = Budget::Unbounded();
  a.poison_fn = [eta](const Hypothesis&, const Dataset& S, const Point& x0,
                      RngStream&) {
    const UnitVector axis(x0);
    for (const auto& e : S.items()) {
      if (squared_distance(e.x, x0) < 1.5 * eta) return Dataset{};
    }
    Dataset poison;
    for (const auto& e : S.items()) {
      const UnitVector xr = reflect_axis(UnitVector(e.x), axis);
      poison.add({xr.coords(), 1 - e.y});
    }
    return poison;
  };
  return a;
}

Attacker make_margin_reflection_attacker(AttackContext ctx) {
  if (!ctx.w_star || !ctx.gamma || !ctx.epsilon) {
    fail(ErrorKind::precondition,
         "margin_reflection needs w_star, gamma, epsilon");
  }
  Attacker a;
  a.name = "margin_reflection";
  a.budget = Budget::Unbounded();
  a.poison_fn = [ctx = std::move(ctx)](const Hypothesis&, const Dataset& S,
                                       const Point& x0, RngStream&) {
    const UnitVector& w = *ctx.w_star;
    const double gamma = *ctx.gamma;
    const double epsilon = *ctx.epsilon;
    const std::size_t n = w.dimension() + 1;
    if (x0.size() != n) {
      fail(ErrorKind::dimension_mismatch, "margin_reflection: x0 dimension");
    }
    if (std::abs(x0[n - 1]) > 1e-12) return Dataset{};
    const Point front0(x0.begin(), x0.end() - 1);

    Point r = sub(front0, scaled(w.coords(), dot(front0, w.coords())));
    const double nr = norm(r);
    if (nr <= 1e-12) return Dataset{};
    const Point v2 = scaled(r, 1.0 / nr);

    const double cap = 0.125 + gamma;
    if (dot(front0, w.coords()) > cap) return Dataset{};

    std::vector<const LabeledExample*> on_sphere;
    for (const auto& e : S.items()) {
      if (e.x.size() != n) {
        fail(ErrorKind::dimension_mismatch, "margin_reflection: sample dimension");
      }
      if (std::abs(e.x[n - 1]) > 1e-12) continue;
      const Point fx(e.x.begin(), e.x.end() - 1);
      if (dot(fx, w.coords()) > cap) return Dataset{};
      if (dot(fx, v2) > 0.125) return Dataset{};
      on_sphere.push_back(&e);
    }
    const double budget = 32.0 * static_cast<double>(S.size()) * epsilon;
    if (static_cast<double>(on_sphere.size()) > budget) return Dataset{};

    Dataset poison;
    for (const auto* e : on_sphere) {
      const Point fx(e->x.begin(), e->x.end() - 1);
      Point pr = reflect_span_plane(fx, front0, w);
      pr.push_back(0.0);
      poison.add({std::move(pr), 1 - e->y});
    }
    return poison;
  };
  return a;
}

Attacker make_circle_tpoint_attacker(std::size_t t, AttackContext ctx) {
  if (!ctx.circles) {
    fail(ErrorKind::precondition, "circle_tpoint needs the circle collection");
  }
  Attacker a;
  a.name = sized_name("circle_tpoint", t);
  a.budget = Budget::Finite(t);
  a.poison_fn = [t, circles = ctx.circles](const Hypothesis&, const Dataset& S,
                                           const Point& x0, RngStream&) {
    if (norm(x0) <= 1e-12) return Dataset{};
    const auto sphere = circles->sphere_index(x0);
    if (!sphere || !circles->on_marked_circle(*sphere, x0)) return Dataset{};
    if (S.contains_instance(x0)) return Dataset{};

    std::vector<const LabeledExample*> on_circle;
    for (const auto& e : S.items()) {
      const auto si = circles->sphere_index(e.x);
      if (si && *si == *sphere && circles->on_marked_circle(*sphere, e.x)) {
        on_circle.push_back(&e);
      }
    }
    if (on_circle.size() > t) return Dataset{};

    const Point center = SphereCirclesHypothesis::sphere_center(*sphere);
    Point x0l = sub(x0, center);
    x0l = scaled(x0l, 1.0 / norm(x0l));
    const Point& q = circles->q_local(*sphere).coords();

    // Mirror plane through the sphere center and x0, normal to q's component
    // orthogonal to x0. It fixes x0 and swaps the marked circle with its
    // reflection, which meets the original only at x0 and at one point of the
    // mirror plane; a training point at that crossing would make the flipped
    // labels dirty, so the attack declines when any reflection lands back on
    // the marked circle.
    Point nv = sub(q, scaled(x0l, dot(q, x0l)));
    const double nn = norm(nv);
    if (nn <= 1e-12) return Dataset{};
    nv = scaled(nv, 1.0 / nn);

    Dataset poison;
    for (const auto* e : on_circle) {
      const Point xl = sub(e->x, center);
      const Point xr = sub(xl, scaled(nv, 2.0 * dot(xl, nv)));
      if (std::abs(dot(q, xr) - 0.5) <= 1e-6) return Dataset{};
      poison.add({add(xr, center), 1 - e->y});
    }
    return poison;
  };
  return a;
}

Attacker make_hollow_star_attacker(FiniteClassPtr cls, std::size_t i_star) {
  if (!cls) fail(ErrorKind::precondition, "hollow_star needs a finite class");
  if (i_star >= cls->num_hypotheses() || i_star >= cls->domain_size()) {
    fail(ErrorKind::precondition, "hollow_star: i_star out of range");
  }
  Attacker a;
  a.name = "hollow_star";
  a.budget = cls->domain_size() >= 2 ? Budget::Finite(cls->domain_size() - 2)
                                     : Budget::Finite(0);
  a.poison_fn = [cls = std::move(cls), i_star](const Hypothesis&,
                                               const Dataset& S, const Point& x0,
                                               RngStream&) {
    const auto idx = cls->index_of_point(x0);
    if (!idx || *idx == i_star) return Dataset{};
    if (S.contains_instance(x0)) return Dataset{};
    Dataset poison;
    for (std::size_t j = 0; j < cls->domain_size(); ++j) {
      if (j == *idx || j == i_star) continue;
      poison.add({cls->domain_point(j), cls->label(i_star, j)});
    }
    return poison;
  };
  return a;
}

Attacker make_boundary_reflection_attacker(UnitVector w, double b) {
  Attacker a;
  a.name = "boundary_reflection";
  a.budget = Budget::Unbounded();
  a.poison_fn = [w = std::move(w), b](const Hypothesis&, const Dataset& S,
                                      const Point&, RngStream&) {
    std::vector<LabeledExample> poison;
    poison.reserve(S.size());
    for (const auto& e : S.items()) {
      if (e.x.size() != w.dimension()) {
        fail(ErrorKind::dimension_mismatch, "boundary_reflection: sample dimension");
      }
      const double dv = dot(w.coords(), e.x) + b;
      if (std::abs(dv) <= 1e-9) continue;
      poison.push_back({sub(e.x, scaled(w.coords(), 2.0 * dv)), 1 - e.y});
    }
    return Dataset(std::move(poison));
  };
  return a;
}

Attacker make_budget_wrapper(Attacker inner, std::size_t t) {
  Attacker a;
  a.name = "budget(" + inner.name + ",t=" + std::to_string(t) + ")";
  a.budget = Budget::Finite(t);
  a.poison_fn = [inner = std::move(inner), t](const Hypothesis& target,
                                              const Dataset& S, const Point& x0,
                                              RngStream& rng) {
    const Dataset full = inner.poison(target, S, x0, rng);
    if (full.size() <= t) return full;
    Dataset cut;
    for (std::size_t i = 0; i < t; ++i) cut.add(full.items()[i]);
    return cut;
  };
  return a;
}

}  // namespace cleanlabel
