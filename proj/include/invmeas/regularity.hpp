#pragma once

#include "map_model.hpp"
#include "measure.hpp"

#include <optional>

namespace invmeas {

// V_{alpha,K} = {mu : mu(B(x,r)) <= K r^alpha for all x, r > 0}, optionally
// with a weight f for the norm sup f(x) mu(B(x,r)) / r^alpha.
struct RegularityClass {
    Rational alpha = 1;
    Rational K = 1;
    IntervalFn weight;

    void validate() const
    {
        if (alpha <= 0 || alpha > 1)
            throw UsageError("regularity alpha must lie in (0, 1]");
        if (K <= 0)
            throw UsageError("regularity K must be positive");
    }
};

inline constexpr long kPowBits = 64;

// Enclosure of x^alpha for x >= 0 and rational alpha > 0.
inline RatInterval pow_alpha(const Rational& x, const Rational& alpha)
{
    if (alpha == 1)
        return RatInterval(x);
    if (x == 0)
        return RatInterval(Rational(0));
    return rpow_enclose(x, alpha.get_num().get_ui(), alpha.get_den().get_ui(), kPowBits);
}

// Upper bound of K r^alpha: the largest mass of a closed ball of radius r.
inline Rational ball_cap(const RegularityClass& reg, const Rational& r)
{
    return reg.K * pow_alpha(r, reg.alpha).hi;
}

// Per-cell cap K (2 w)^alpha used for cells meeting D and by regular_net.
inline Rational cell_cap(const RegularityClass& reg, unsigned level)
{
    return ball_cap(reg, pow2(1 - static_cast<long>(level)));
}

// Cap on s consecutive cells: they lie in a closed ball of radius s w / 2.
inline Rational window_cap(const RegularityClass& reg, unsigned level, std::size_t s)
{
    return ball_cap(reg, Rational(static_cast<unsigned long>(s)) * pow2(-static_cast<long>(level) - 1));
}

namespace detail {

// Range maximum/sum over cyclic or linear windows of cell masses.
class WindowStats {
public:
    WindowStats(const std::vector<Rational>& m, bool cyclic) : cyclic_(cyclic), n_(m.size())
    {
        pre_ = prefix_sums(m);
        std::size_t lg = 1;
        while ((std::size_t{1} << lg) <= n_)
            ++lg;
        table_.assign(lg, m);
        for (std::size_t t = 1; t < lg; ++t)
            for (std::size_t i = 0; i + (std::size_t{1} << t) <= n_; ++i)
                table_[t][i] = rmax(table_[t - 1][i], table_[t - 1][i + (std::size_t{1} << (t - 1))]);
    }

    // Cells c - j .. c + j (clipped on the line, wrapped on the circle).
    std::pair<Rational, Rational> around(std::size_t c, std::size_t j) const
    {
        if (2 * j + 1 >= n_)
            return {max_range(0, n_ - 1), pre_[n_]};
        long lo = static_cast<long>(c) - static_cast<long>(j);
        long hi = static_cast<long>(c + j);
        if (!cyclic_) {
            std::size_t a = static_cast<std::size_t>(std::max(0L, lo));
            std::size_t b = std::min(n_ - 1, static_cast<std::size_t>(hi));
            return {max_range(a, b), pre_[b + 1] - pre_[a]};
        }
        long n = static_cast<long>(n_);
        if (lo < 0) {
            std::size_t a = static_cast<std::size_t>(lo + n);
            return {rmax(max_range(a, n_ - 1), max_range(0, static_cast<std::size_t>(hi))),
                    pre_[n_] - pre_[a] + pre_[static_cast<std::size_t>(hi) + 1]};
        }
        if (hi >= n) {
            std::size_t b = static_cast<std::size_t>(hi - n);
            return {rmax(max_range(static_cast<std::size_t>(lo), n_ - 1), max_range(0, b)),
                    pre_[n_] - pre_[static_cast<std::size_t>(lo)] + pre_[b + 1]};
        }
        return {max_range(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)),
                pre_[static_cast<std::size_t>(hi) + 1] - pre_[static_cast<std::size_t>(lo)]};
    }

    Rational max_range(std::size_t a, std::size_t b) const
    {
        std::size_t len = b - a + 1, t = 0;
        while ((std::size_t{2} << t) <= len)
            ++t;
        return rmax(table_[t][a], table_[t][b + 1 - (std::size_t{1} << t)]);
    }

private:
    bool cyclic_;
    std::size_t n_;
    std::vector<Rational> pre_;
    std::vector<std::vector<Rational>> table_;
};

// sup over x in cell c and r > 0 of mu(B(x,r)) / r^alpha, bounded above.
// Radii are grouped as r <= w/2 and (2^(t-1) w/2, 2^t w/2]; a ball of radius
// <= 2^t w/2 around a point of c stays within cells c - 2^(t-1) .. c + 2^(t-1)
// (one neighbour for t = 0), where mass <= min(2 r rho_max, M_window).
inline Rational cell_ratio_bound(const WindowStats& ws, std::size_t c, unsigned level, const Rational& alpha)
{
    Rational w = pow2(-static_cast<long>(level));
    Rational best = 0;
    for (unsigned t = 0;; ++t) {
        std::size_t j = t == 0 ? 1 : (std::size_t{1} << (t - 1));
        auto [mx, mass] = ws.around(c, j);
        Rational rho = mx / w;
        Rational rhi = pow2(static_cast<long>(t) - 1) * w;  // 2^t w / 2
        Rational b = 2 * rho * (alpha == 1 ? Rational(1) : pow_alpha(rhi, 1 - alpha).hi);
        if (t >= 1) {
            Rational rlo = pow2(static_cast<long>(t) - 2) * w;
            b = rmin(b, mass / (alpha == 1 ? rlo : pow_alpha(rlo, alpha).lo));
        }
        best = rmax(best, b);
        if (rhi >= 1)
            break;
    }
    // Radii beyond the last group exceed 1, so the ratio is at most 1.
    return rmax(best, Rational(1));
}

}  // namespace detail

// sup_{x, r} mu(B(x,r)) / r^alpha. For alpha = 1 the value is exact: twice the
// largest density (approached by small balls inside the densest cell). For
// alpha < 1 a certified upper bound.
inline Rational alpha_norm_histogram(const HistogramMeasure& mu, const Rational& alpha)
{
    if (alpha <= 0 || alpha > 1)
        throw UsageError("alpha must lie in (0, 1]");
    Rational mx = 0;
    for (const auto& m : mu.mass)
        mx = rmax(mx, m);
    if (alpha == 1)
        return 2 * mx * pow2(mu.level);
    detail::WindowStats ws(mu.mass, mu.space.is_circle());
    Rational best = 0;
    for (std::size_t c = 0; c < mu.size(); ++c)
        best = rmax(best, detail::cell_ratio_bound(ws, c, mu.level, alpha));
    return best;
}

// Upper bound of sup_{x, r} f(x) mu(B(x,r)) / r^alpha with f >= 0 given by an
// outward-correct interval extension.
inline Rational weighted_norm_histogram(const HistogramMeasure& mu, const IntervalFn& f, const Rational& alpha)
{
    if (alpha <= 0 || alpha > 1)
        throw UsageError("alpha must lie in (0, 1]");
    detail::WindowStats ws(mu.mass, mu.space.is_circle());
    Rational w = mu.width();
    Rational best = 0;
    for (std::size_t c = 0; c < mu.size(); ++c) {
        Rational fc = f(RatInterval(Rational(c) * w, Rational(c + 1) * w)).hi;
        if (fc <= 0)
            continue;
        Rational b = fc * detail::cell_ratio_bound(ws, c, mu.level, alpha);
        best = rmax(best, b);
    }
    return best;
}

}  // namespace invmeas
