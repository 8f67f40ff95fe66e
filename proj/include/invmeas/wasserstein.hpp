#pragma once

#include "measure.hpp"

namespace invmeas {

namespace detail {

// On [x_j, x_{j+1}] the CDF difference F_mu - F_nu is affine, running from d0
// (right limit at x_j) to d1 (left limit at x_{j+1}).
struct CdfSegment {
    Rational len;
    Rational d0;
    Rational d1;
};

inline void add_breakpoints(const Measure& m, std::vector<Rational>& xs)
{
    if (auto* a = std::get_if<FinSupportMeasure>(&m)) {
        for (const auto& at : a->atoms)
            xs.push_back(at.pos);
        return;
    }
    const auto& h = std::get<HistogramMeasure>(m);
    Rational w = h.width();
    for (std::size_t k = 1; k < h.size(); ++k)
        xs.push_back(Rational(k) * w);
}

// Left and right CDF values at each sorted breakpoint, in one sweep.
inline std::vector<CdfValue> sweep_cdf(const Measure& m, const std::vector<Rational>& xs)
{
    std::vector<CdfValue> out;
    out.reserve(xs.size());
    if (auto* a = std::get_if<FinSupportMeasure>(&m)) {
        std::size_t i = 0;
        Rational acc = 0;
        for (const auto& x : xs) {
            while (i < a->atoms.size() && a->atoms[i].pos < x)
                acc += a->atoms[i++].mass;
            Rational left = acc;
            Rational right = acc;
            std::size_t j = i;
            while (j < a->atoms.size() && a->atoms[j].pos == x)
                right += a->atoms[j++].mass;
            out.push_back({left, right});
        }
        return out;
    }
    const auto& h = std::get<HistogramMeasure>(m);
    Rational scale = pow2(h.level);
    std::size_t k = 0;
    Rational acc = 0;  // mass of cells < k
    for (const auto& x : xs) {
        if (x <= 0) {
            out.push_back({0, 0});
            continue;
        }
        if (x >= 1) {
            out.push_back({1, 1});
            continue;
        }
        Rational s = x * scale;
        std::size_t kk = floor_int(s).get_ui();
        while (k < kk)
            acc += h.mass[k++];
        Rational v = acc + h.mass[kk] * (s - Rational(kk));
        out.push_back({v, v});
    }
    return out;
}

inline std::vector<CdfSegment> cdf_difference(const Measure& mu, const Measure& nu)
{
    std::vector<Rational> xs{Rational(0), Rational(1)};
    add_breakpoints(mu, xs);
    add_breakpoints(nu, xs);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto fm = sweep_cdf(mu, xs);
    auto fn = sweep_cdf(nu, xs);
    std::vector<CdfSegment> segs;
    segs.reserve(xs.size());
    for (std::size_t j = 0; j + 1 < xs.size(); ++j)
        segs.push_back({xs[j + 1] - xs[j], fm[j].right - fn[j].right, fm[j + 1].left - fn[j + 1].left});
    return segs;
}

// Integral over [0, len] of |affine function from d0 to d1|.
inline Rational abs_affine_integral(const Rational& len, const Rational& d0, const Rational& d1)
{
    if ((d0 >= 0 && d1 >= 0) || (d0 <= 0 && d1 <= 0))
        return len * rabs(d0 + d1) / 2;
    Rational a = rabs(d0), b = rabs(d1);
    return len * (a * a + b * b) / (2 * (a + b));
}

inline void check_same_space(const Measure& mu, const Measure& nu, Space::Kind kind)
{
    if (space_of(mu).kind != kind || space_of(nu).kind != kind)
        throw UsageError(kind == Space::Kind::Circle ? "w1_circle needs two circle measures"
                                                     : "w1_line needs two interval measures");
}

// Lebesgue measure of {t : D(t) < s} (strict) or <= s.
inline Rational level_measure(const std::vector<CdfSegment>& segs, const Rational& s, bool strict)
{
    Rational total = 0;
    for (const auto& g : segs) {
        if (g.d0 == g.d1) {
            if (strict ? g.d0 < s : g.d0 <= s)
                total += g.len;
            continue;
        }
        // Fraction of the segment where the affine function lies below s.
        Rational t = (s - g.d0) / (g.d1 - g.d0);
        if (g.d1 > g.d0)
            total += g.len * rmin(rmax(t, Rational(0)), Rational(1));
        else
            total += g.len * (1 - rmin(rmax(t, Rational(0)), Rational(1)));
    }
    return total;
}

}  // namespace detail

// W1 on [0,1] = ∫ |F_mu - F_nu|.
inline Rational w1_line(const Measure& mu, const Measure& nu)
{
    detail::check_same_space(mu, nu, Space::Kind::UnitInterval);
    Rational total = 0;
    for (const auto& g : detail::cdf_difference(mu, nu))
        total += detail::abs_affine_integral(g.len, g.d0, g.d1);
    return total;
}

// The shift s* minimizing ∫ |F_mu - F_nu - s|: a median of D(t) for uniform t.
inline Rational circle_optimal_shift(const std::vector<detail::CdfSegment>& segs)
{
    std::vector<Rational> vals;
    vals.reserve(2 * segs.size());
    for (const auto& g : segs) {
        vals.push_back(g.d0);
        vals.push_back(g.d1);
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    const Rational half(1, 2);
    // Smallest value v with λ{D <= v} >= 1/2.
    std::size_t lo = 0, hi = vals.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (detail::level_measure(segs, vals[mid], false) >= half)
            hi = mid;
        else
            lo = mid + 1;
    }
    const Rational& v = vals[lo];
    Rational below = detail::level_measure(segs, v, true);
    if (below <= half || lo == 0)
        return v;
    // λ{D < s} is affine and continuous on (vals[lo-1], v); solve for 1/2.
    const Rational& u = vals[lo - 1];
    Rational gu = detail::level_measure(segs, u, false);
    return u + (half - gu) * (v - u) / (below - gu);
}

// W1 on the circle = min over s of ∫ |F_mu - F_nu - s|.
inline Rational w1_circle(const Measure& mu, const Measure& nu)
{
    detail::check_same_space(mu, nu, Space::Kind::Circle);
    auto segs = detail::cdf_difference(mu, nu);
    Rational s = circle_optimal_shift(segs);
    Rational total = 0;
    for (const auto& g : segs)
        total += detail::abs_affine_integral(g.len, g.d0 - s, g.d1 - s);
    return total;
}

inline Rational w1(const Measure& mu, const Measure& nu)
{
    if (space_of(mu).is_circle())
        return w1_circle(mu, nu);
    return w1_line(mu, nu);
}

}  // namespace invmeas
