#pragma once

#include "interval.hpp"

#include <functional>
#include <optional>

namespace invmeas {

struct Budget {
    unsigned long steps = 0;
};

// Outcome of a budgeted semi-decision. There is deliberately no `No`.
enum class Semi { Yes, Unresolved };

inline const char* to_string(Semi s) { return s == Semi::Yes ? "Yes" : "Unresolved"; }

// A real x given by approx(n) with |approx(n) - x| < 2^-n. An empty optional
// means the underlying generator ran out of budget at that precision.
struct CRealOracle {
    std::function<std::optional<Rational>(unsigned)> approx;
};

// A real given as the supremum of a non-decreasing rational sequence.
struct LscRealOracle {
    std::function<Rational(unsigned long)> lower_seq;
};

inline std::optional<Rational> eval_creal(const CRealOracle& x, unsigned n)
{
    return x.approx(n);
}

// Closed interval [q - 2^-n, q + 2^-n] enclosing x.
inline std::optional<RatInterval> enclose_creal(const CRealOracle& x, unsigned n)
{
    auto q = x.approx(n);
    if (!q)
        return std::nullopt;
    Rational e = pow2(-static_cast<long>(n));
    return RatInterval(*q - e, *q + e);
}

inline Rational lsc_sup_at(const LscRealOracle& x, Budget b)
{
    if (b.steps < 1)
        throw UsageError("lsc_sup_at: budget must be at least 1 step");
    return x.lower_seq(b.steps);
}

inline CRealOracle creal_const(Rational q)
{
    return {[q = std::move(q)](unsigned) -> std::optional<Rational> { return q; }};
}

// The unique root in [lo, hi] of an increasing predicate boundary: `below(y)`
// holds exactly for y < x. Bisection on dyadics, so approx(n) is exact to 2^-(n+1).
inline CRealOracle creal_bisection(Rational lo, Rational hi, std::function<bool(const Rational&)> below)
{
    return {[lo, hi, below](unsigned n) -> std::optional<Rational> {
        Rational a = lo, b = hi;
        Rational target = pow2(-static_cast<long>(n) - 1);
        while (b - a > target) {
            Rational m = (a + b) / 2;
            if (below(m))
                a = m;
            else
                b = m;
        }
        return (a + b) / 2;
    }};
}

// x^(p/q) for rational x >= 0 as a computable real.
inline CRealOracle creal_pow(Rational x, unsigned long p, unsigned long q)
{
    return {[x = std::move(x), p, q](unsigned n) -> std::optional<Rational> {
        return rpow_enclose(x, p, q, static_cast<long>(n) + 2).mid();
    }};
}

}  // namespace invmeas
