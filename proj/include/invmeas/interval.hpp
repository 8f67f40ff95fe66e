#pragma once

#include "rational.hpp"

#include <algorithm>
#include <optional>
#include <ostream>

namespace invmeas {

struct RatInterval {
    Rational lo;
    Rational hi;

    RatInterval() = default;
    RatInterval(const Rational& point) : lo(point), hi(point) {}  // NOLINT: points convert implicitly
    RatInterval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h))
    {
        if (hi < lo)
            throw Error("RatInterval: lo > hi (" + to_string(lo) + " > " + to_string(hi) + ")");
    }

    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / 2; }
    bool is_point() const { return lo == hi; }
    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    bool contains(const RatInterval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool intersects(const RatInterval& o) const { return !(hi < o.lo || o.hi < lo); }
    // Nonempty intersection of the open interior of *this with o.
    bool interior_meets(const RatInterval& o) const
    {
        if (is_point())
            return false;
        return o.lo < hi && lo < o.hi;
    }
};

inline bool operator==(const RatInterval& a, const RatInterval& b) { return a.lo == b.lo && a.hi == b.hi; }

inline std::ostream& operator<<(std::ostream& os, const RatInterval& x)
{
    return os << '[' << to_string(x.lo) << ", " << to_string(x.hi) << ']';
}

inline RatInterval operator+(const RatInterval& a, const RatInterval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline RatInterval operator-(const RatInterval& a, const RatInterval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline RatInterval operator-(const RatInterval& a) { return {-a.hi, -a.lo}; }

inline RatInterval operator*(const RatInterval& a, const RatInterval& b)
{
    Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    auto [mn, mx] = std::minmax_element(p, p + 4);
    return {*mn, *mx};
}

inline RatInterval operator*(const Rational& s, const RatInterval& a)
{
    return s >= 0 ? RatInterval(s * a.lo, s * a.hi) : RatInterval(s * a.hi, s * a.lo);
}

inline RatInterval operator/(const RatInterval& a, const Rational& s)
{
    if (s == 0)
        throw Error("interval division by zero");
    return Rational(1 / s) * a;
}

inline RatInterval imin(const RatInterval& a, const RatInterval& b) { return {rmin(a.lo, b.lo), rmin(a.hi, b.hi)}; }
inline RatInterval imax(const RatInterval& a, const RatInterval& b) { return {rmax(a.lo, b.lo), rmax(a.hi, b.hi)}; }

inline RatInterval iabs(const RatInterval& a)
{
    if (a.lo >= 0)
        return a;
    if (a.hi <= 0)
        return -a;
    return {Rational(0), rmax(Rational(-a.lo), a.hi)};
}

inline RatInterval isqr(const RatInterval& a)
{
    RatInterval m = iabs(a);
    return {m.lo * m.lo, m.hi * m.hi};
}

inline RatInterval hull(const RatInterval& a, const RatInterval& b) { return {rmin(a.lo, b.lo), rmax(a.hi, b.hi)}; }

inline std::optional<RatInterval> intersect(const RatInterval& a, const RatInterval& b)
{
    Rational l = rmax(a.lo, b.lo), h = rmin(a.hi, b.hi);
    if (h < l)
        return std::nullopt;
    return RatInterval(l, h);
}

// Outward rounding to the dyadic grid 2^-bits; only ever enlarges.
inline RatInterval round_out(const RatInterval& a, long bits)
{
    return {floor_dyadic(a.lo, bits), ceil_dyadic(a.hi, bits)};
}

enum class Order { Less, Greater, Overlap };

inline Order compare_with_gap(const RatInterval& x, const RatInterval& y)
{
    if (x.hi < y.lo)
        return Order::Less;
    if (x.lo > y.hi)
        return Order::Greater;
    return Order::Overlap;
}

inline const char* to_string(Order o)
{
    switch (o) {
    case Order::Less: return "Less";
    case Order::Greater: return "Greater";
    default: return "Overlap";
    }
}

inline Rational rpow_int(const Rational& x, unsigned long e)
{
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), x.get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), x.get_den_mpz_t(), e);
    return r;  // already canonical: powers of coprime integers stay coprime
}

// Enclosure [lo, hi] of x^(p/q) for x >= 0, p, q >= 1, with dyadic endpoints
// and hi - lo <= 2^-bits. A double guess seeds a bracket that is then verified
// and bisected exactly on y^q versus x^p.
inline RatInterval rpow_enclose(const Rational& x, unsigned long p, unsigned long q, long bits)
{
    if (x < 0)
        throw Error("rpow_enclose: negative base");
    if (p == 0 || q == 0)
        throw Error("rpow_enclose: exponent must be positive");
    if (x == 0)
        return RatInterval(Rational(0));
    const Rational target = rpow_int(x, p);
    auto below = [&](const Rational& y) { return rpow_int(y, q) <= target; };
    double g = std::pow(x.get_d(), static_cast<double>(p) / static_cast<double>(q));
    Rational step = pow2(-bits);
    Rational lo = rmax(Rational(0), floor_dyadic(from_double(std::isfinite(g) ? g : 0.0), bits));
    Rational hi = lo + step;
    Rational s = step;
    while (!below(lo)) {
        lo -= s;
        s *= 2;
        if (lo <= 0) {
            lo = 0;
            break;
        }
    }
    s = step;
    while (below(hi) && rpow_int(hi, q) != target) {
        hi += s;
        s *= 2;
    }
    if (rpow_int(lo, q) == target)
        return RatInterval(lo);
    if (rpow_int(hi, q) == target)
        return RatInterval(hi);
    while (hi - lo > step) {
        Rational m = floor_dyadic((lo + hi) / 2, bits + 1);
        if (m <= lo || m >= hi)
            break;
        Rational mq = rpow_int(m, q);
        if (mq == target)
            return RatInterval(m);
        if (mq < target)
            lo = m;
        else
            hi = m;
    }
    return {lo, hi};
}

// Monotone (increasing) power on an interval with nonnegative lower end.
inline RatInterval ipow_enclose(const RatInterval& x, unsigned long p, unsigned long q, long bits)
{
    if (x.lo < 0)
        throw Error("ipow_enclose: negative base");
    return {rpow_enclose(x.lo, p, q, bits).lo, rpow_enclose(x.hi, p, q, bits).hi};
}

}  // namespace invmeas
