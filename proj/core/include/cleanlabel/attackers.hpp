// Poisoning strategies. Every poison set is labeled consistently with the
// attacked target (audits in eval.hpp verify this independently); gates that
// cannot be met make an attacker return the empty set rather than cheat.
#pragma once

#include "cleanlabel/classes.hpp"
#include "cleanlabel/core.hpp"
#include "cleanlabel/geometry.hpp"

namespace cleanlabel {

// Adds nothing; measures plain generalization error.
Attacker make_null_attacker();

// Splits every negative gap other than the one holding x0 into pieces
// strictly shorter than that gap, so a longest-open-interval rule must pick
// the gap around x0. Labels come from the target.
Attacker make_interval_flood_attacker();

// One point against the max-margin separator on the half-sphere
// construction with axis v1 and margin gamma: a negative at
// -gamma*v1 + sqrt(1-gamma^2)*v2 (v2 = unit component of x0 orthogonal to
// v1), or the positive -v2 when the sample has no positives. Empty when x0
// is parallel to v1.
Attacker make_svm_one_point_attacker(UnitVector v1, double gamma);

// Reflects the whole training sample through the axis of x0 with flipped
// labels, provided every training instance is at squared distance at least
// 3*eta/2 from x0 (which makes the flipped labels agree with the target).
Attacker make_sphere_reflection_attacker(double eta);

// High-dimensional analogue for the shifted half-sphere construction: under
// the concentration gate, reflects the sphere-borne part of the sample across
// the plane spanned by the hidden direction and x0, flipping labels.
Attacker make_margin_reflection_attacker(AttackContext ctx);

// Reflects the at-most-t training points on x0's marked circle through the
// 3-D mirror that fixes x0 and the sphere, flipping labels; the mirrored
// marked circle explains the poisoned sample just as well as the real one.
Attacker make_circle_tpoint_attacker(std::size_t t, AttackContext ctx);

// Finite single-flip attack: labels every domain point other than x0 and the
// target's flip point with the target's labels.
Attacker make_hollow_star_attacker(FiniteClassPtr cls, std::size_t i_star);

// Reflects training points across the hyperplane <w,x> + b = 0 with flipped
// labels (points within 1e-9 of the plane are skipped).
Attacker make_boundary_reflection_attacker(UnitVector w, double b);

// Enforces a budget of t points on another attacker by truncating its poison
// set in canonical order.
Attacker make_budget_wrapper(Attacker inner, std::size_t t);

}  // namespace cleanlabel
