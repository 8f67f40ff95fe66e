#pragma once

#include "space.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace invmeas {

using IntervalFn = std::function<RatInterval(const RatInterval&)>;

// Exact affine form y = slope * x + offset.
struct Affine {
    Rational slope;
    Rational offset;
    Rational operator()(const Rational& x) const { return slope * x + offset; }
};

// A map of [0,1] or the circle. For circle maps, `eval` works on a lift: it
// takes an interval inside [0,1] and returns an interval of reals whose image
// modulo 1 contains the true image.
//
// eval must enclose T(x) for every x of the closed argument interval, so on
// intervals straddling a point of D it returns the hull of both sides.
// eval_piece (optional) may be tighter: for intervals whose interior avoids D
// it encloses the closure of T(interior), i.e. the one-sided continuous
// extensions at the endpoints. affine_piece (optional) returns the exact
// affine form of that extension when there is one.
struct MapModel {
    std::string name;
    Space space = Space::unit_interval();
    IntervalFn eval;
    IntervalFn eval_piece;
    std::function<std::optional<Affine>(const RatInterval&)> affine_piece;
    std::vector<RatInterval> D;
    Rational dimD_bound = 0;
    std::optional<Rational> lip_away;
    std::function<Rational(const Rational&)> modulus;
    bool monotone = false;
    int degree = 1;                // circle maps: degree of the lift
    Rational uniform_error = 0;    // declared sup |T - T_true| for truncated maps

    RatInterval eval_on_piece(const RatInterval& I) const { return eval_piece ? eval_piece(I) : eval(I); }

    bool interior_meets_D(const RatInterval& I) const
    {
        for (const auto& d : D)
            if (d.is_point() ? (I.lo < d.lo && d.lo < I.hi) : I.interior_meets(d))
                return true;
        return false;
    }
};

// Evaluates a circle lift on any real interval by shifting into [0,1] and
// splitting at integers; interval maps are evaluated directly after clamping.
inline RatInterval eval_anywhere(const MapModel& T, const RatInterval& I)
{
    if (!T.space.is_circle()) {
        RatInterval J(rmax(I.lo, Rational(0)), rmin(I.hi, Rational(1)));
        return T.eval(J);
    }
    // Split at integers; on [k, k+1] the lift is T(x - k) + k * degree.
    Integer k = floor_int(I.lo);
    std::optional<RatInterval> acc;
    for (;; ++k) {
        Rational base(k);
        if (base > I.hi || (base == I.hi && acc))
            break;
        Rational lo = rmax(I.lo, base) - base;
        Rational hi = rmin(I.hi, base + 1) - base;
        RatInterval part = T.eval(RatInterval(lo, hi)) + RatInterval(Rational(base * T.degree));
        acc = acc ? hull(*acc, part) : part;
    }
    return *acc;
}

}  // namespace invmeas
