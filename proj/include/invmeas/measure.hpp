#pragma once

#include "space.hpp"

#include <algorithm>
#include <cstdint>
#include <variant>
#include <vector>

namespace invmeas {

struct Atom {
    Rational pos;
    Rational mass;
};

// Rational convex combination of Dirac masses; atoms kept sorted by position.
struct FinSupportMeasure {
    Space space = Space::unit_interval();
    std::vector<Atom> atoms;
};

// Piecewise-constant measure on the dyadic cells [k w, (k+1) w), w = 2^-level
// (the last cell of [0,1] is closed).
struct HistogramMeasure {
    Space space = Space::unit_interval();
    unsigned level = 0;
    std::vector<Rational> mass;

    std::size_t size() const { return mass.size(); }
    Rational width() const { return pow2(-static_cast<long>(level)); }
};

using Measure = std::variant<FinSupportMeasure, HistogramMeasure>;

inline const Space& space_of(const Measure& m)
{
    return std::visit([](const auto& x) -> const Space& { return x.space; }, m);
}

inline constexpr unsigned kMaxHistogramLevel = 24;

inline void check_measure_space(const Space& s)
{
    if (s.kind == Space::Kind::Product)
        throw UsageError("measures live on the interval or the circle");
}

inline FinSupportMeasure make_atoms(const Space& s, std::vector<Atom> atoms)
{
    check_measure_space(s);
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
    Rational total = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& a = atoms[i];
        if (a.mass <= 0)
            throw UsageError("atom masses must be positive");
        if (!in_carrier(s, IdealPoint(a.pos)))
            throw UsageError("atom position " + to_string(a.pos) + " outside the space");
        if (i > 0 && atoms[i - 1].pos == a.pos)
            throw UsageError("atom positions must be distinct");
        total += a.mass;
    }
    if (total != 1)
        throw UsageError("atom masses sum to " + to_string(total) + ", expected 1");
    return {s, std::move(atoms)};
}

inline FinSupportMeasure dirac(const Space& s, const Rational& x) { return make_atoms(s, {{x, Rational(1)}}); }

inline HistogramMeasure make_histogram(const Space& s, unsigned level, std::vector<Rational> mass)
{
    check_measure_space(s);
    if (level > kMaxHistogramLevel)
        throw UsageError("histogram level above " + std::to_string(kMaxHistogramLevel));
    if (mass.size() != (std::size_t{1} << level))
        throw UsageError("histogram at level " + std::to_string(level) + " needs " +
                         std::to_string(std::size_t{1} << level) + " cells");
    Rational total = 0;
    for (const auto& m : mass) {
        if (m < 0)
            throw UsageError("histogram masses must be nonnegative");
        total += m;
    }
    if (total != 1)
        throw UsageError("histogram masses sum to " + to_string(total) + ", expected 1");
    return {s, level, std::move(mass)};
}

inline HistogramMeasure uniform_histogram(const Space& s, unsigned level)
{
    std::size_t n = std::size_t{1} << level;
    return make_histogram(s, level, std::vector<Rational>(n, Rational(1, static_cast<long>(n))));
}

// Cell of a point under the half-open convention.
inline std::size_t cell_of(const Rational& x, unsigned level)
{
    std::size_t n = std::size_t{1} << level;
    Integer k = floor_int(x * pow2(level));
    if (k < 0)
        return 0;
    if (k >= Integer(static_cast<unsigned long>(n)))
        return n - 1;
    return k.get_ui();
}

inline std::vector<Rational> prefix_sums(const std::vector<Rational>& v)
{
    std::vector<Rational> p(v.size() + 1);
    p[0] = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        p[i + 1] = p[i] + v[i];
    return p;
}

// Mass per dyadic cell at `level`, exactly.
inline HistogramMeasure histogram_project(const Measure& mu, unsigned level)
{
    if (level > kMaxHistogramLevel)
        throw UsageError("histogram level above " + std::to_string(kMaxHistogramLevel));
    std::size_t n = std::size_t{1} << level;
    std::vector<Rational> mass(n, Rational(0));
    if (auto* a = std::get_if<FinSupportMeasure>(&mu)) {
        for (const auto& at : a->atoms)
            mass[cell_of(at.pos, level)] += at.mass;
        return {a->space, level, std::move(mass)};
    }
    const auto& h = std::get<HistogramMeasure>(mu);
    if (level <= h.level) {
        std::size_t f = std::size_t{1} << (h.level - level);
        for (std::size_t k = 0; k < h.size(); ++k)
            mass[k / f] += h.mass[k];
    } else {
        std::size_t f = std::size_t{1} << (level - h.level);
        for (std::size_t k = 0; k < h.size(); ++k) {
            Rational part = h.mass[k] / static_cast<long>(f);
            for (std::size_t j = 0; j < f; ++j)
                mass[k * f + j] = part;
        }
    }
    return {h.space, level, std::move(mass)};
}

// CDF F(t) = mu([0, t]) (right-continuous) and left limit F(t-) = mu([0, t)).
struct CdfValue {
    Rational left;
    Rational right;
};

inline CdfValue cdf_at(const Measure& mu, const Rational& t)
{
    if (auto* a = std::get_if<FinSupportMeasure>(&mu)) {
        Rational l = 0, r = 0;
        for (const auto& at : a->atoms) {
            if (at.pos < t)
                l += at.mass;
            if (at.pos <= t)
                r += at.mass;
        }
        return {l, r};
    }
    const auto& h = std::get<HistogramMeasure>(mu);
    if (t <= 0)
        return {0, 0};
    if (t >= 1)
        return {1, 1};
    Rational s = t * pow2(h.level);
    std::size_t k = floor_int(s).get_ui();
    Rational v = 0;
    for (std::size_t i = 0; i < k; ++i)
        v += h.mass[i];
    v += h.mass[k] * (s - Rational(k));
    return {v, v};
}

// Open-ball mass (lower) and closed-ball mass (upper) of B(c, r).
struct MassBounds {
    Rational lower;
    Rational upper;
};

namespace detail {

inline Rational histogram_mass_in(const HistogramMeasure& h, const Rational& a, const Rational& b)
{
    if (b <= a)
        return 0;
    Rational scale = pow2(h.level);
    Rational sa = rmax(Rational(0), a) * scale, sb = rmin(Rational(1), b) * scale;
    if (sb <= sa)
        return 0;
    std::size_t ka = floor_int(sa).get_ui();
    std::size_t kb = std::min<std::size_t>(floor_int(sb).get_ui(), h.size() - 1);
    if (ka == kb)
        return h.mass[ka] * (sb - sa);
    Rational v = h.mass[ka] * (Rational(ka + 1) - sa);
    for (std::size_t k = ka + 1; k < kb; ++k)
        v += h.mass[k];
    v += h.mass[kb] * (sb - Rational(kb));
    return v;
}

}  // namespace detail

inline MassBounds measure_ball_mass(const Measure& mu, const IdealBall& B)
{
    const Space& s = space_of(mu);
    const Rational& c = B.center.x();
    const Rational& r = B.radius;
    if (r <= 0)
        throw UsageError("ball radius must be positive");
    if (auto* a = std::get_if<FinSupportMeasure>(&mu)) {
        Rational lo = 0, hi = 0;
        for (const auto& at : a->atoms) {
            Rational d = factor_distance(s, at.pos, c);
            if (d < r)
                lo += at.mass;
            if (d <= r)
                hi += at.mass;
        }
        return {lo, hi};
    }
    const auto& h = std::get<HistogramMeasure>(mu);
    Rational m = 0;
    if (s.is_circle()) {
        if (r >= Rational(1, 2))
            m = 1;
        else {
            // Arc (c - r, c + r) unrolled into [0,1].
            Rational a = c - r, b = c + r;
            for (int shift = -1; shift <= 1; ++shift)
                m += detail::histogram_mass_in(h, a + shift, b + shift);
        }
    } else {
        m = detail::histogram_mass_in(h, c - r, c + r);
    }
    return {m, m};
}

}  // namespace invmeas
