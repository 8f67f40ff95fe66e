#pragma once

#include "enclosure.hpp"
#include "maps.hpp"
#include "regularity.hpp"
#include "wasserstein.hpp"

#include <cstdint>

namespace invmeas {

struct CertifiedMeasure {
    HistogramMeasure measure;
    Rational err;
};

// Linear action of the certified pushforward at a fixed level: column c says
// where the mass of source cell c goes (fractions summing to 1) and how much
// W1 error per unit of that mass the placement costs.
struct TransferColumn {
    std::vector<std::pair<std::uint32_t, Rational>> targets;
    Rational err;
};

struct TransferPlan {
    Space space;
    unsigned level = 0;
    std::vector<TransferColumn> cols;
    std::vector<std::uint32_t> d_cells;  // cells whose interior meets D
    Rational uniform_error = 0;
};

inline constexpr unsigned kImageExtraBits = 24;
inline constexpr unsigned kNonlinearSplits = 16;

namespace detail {

// Pieces of the closed cell [a, b] left after cutting out the D enclosures
// meeting its interior; `dparts` collects the removed sub-intervals.
inline std::vector<RatInterval> split_at_D(const MapModel& T, const RatInterval& cell, std::vector<RatInterval>& dparts)
{
    std::vector<RatInterval> cuts;
    for (const auto& d : T.D) {
        if (d.is_point()) {
            if (cell.lo < d.lo && d.lo < cell.hi)
                cuts.push_back(d);
        } else if (cell.interior_meets(d)) {
            cuts.emplace_back(rmax(cell.lo, d.lo), rmin(cell.hi, d.hi));
        }
    }
    std::sort(cuts.begin(), cuts.end(), [](const RatInterval& x, const RatInterval& y) { return x.lo < y.lo; });
    std::vector<RatInterval> pieces;
    Rational cur = cell.lo;
    for (const auto& c : cuts) {
        if (c.lo > cur)
            pieces.emplace_back(cur, c.lo);
        if (c.hi > c.lo)
            dparts.push_back(c);
        cur = rmax(cur, c.hi);
    }
    if (cur < cell.hi)
        pieces.emplace_back(cur, cell.hi);
    return pieces;
}

// Target image interval: outward-rounded, clamped to [0,1] for interval maps.
inline RatInterval deposit_interval(const MapModel& T, const RatInterval& img, unsigned level)
{
    RatInterval H = round_out(img, static_cast<long>(level + kImageExtraBits));
    if (!T.space.is_circle())
        H = RatInterval(rmax(H.lo, Rational(0)), rmin(H.hi, Rational(1)));
    return H;
}

// sup over x in P of |T(x) - A(x)| where A maps P affinely onto H, for the
// better of the two orientations, bounded on kNonlinearSplits sub-intervals.
inline Rational nonlinear_deposit_error(const MapModel& T, const RatInterval& P, const RatInterval& H)
{
    Rational len = P.width();
    Rational up = 0, down = 0;
    for (unsigned i = 0; i < kNonlinearSplits; ++i) {
        Rational t0(i, kNonlinearSplits), t1(i + 1, kNonlinearSplits);
        t0.canonicalize();
        t1.canonicalize();
        RatInterval J(P.lo + t0 * len, P.lo + t1 * len);
        RatInterval E = T.eval_on_piece(J);
        if (!T.space.is_circle())
            E = RatInterval(rmax(E.lo, Rational(0)), rmin(E.hi, Rational(1)));
        Rational a0 = H.lo + t0 * H.width(), a1 = H.lo + t1 * H.width();
        up = rmax(up, rmax(Rational(E.hi - a0), Rational(a1 - E.lo)));
        Rational b0 = H.hi - t0 * H.width(), b1 = H.hi - t1 * H.width();
        down = rmax(down, rmax(Rational(E.hi - b1), Rational(b0 - E.lo)));
    }
    return rmin(up, down);
}

// Spread unit mass uniformly over H into level cells; returns the W1 cost of
// replacing the spread by its cell projection (per unit mass).
inline Rational deposit(const Space& s, const RatInterval& H, unsigned level,
                        std::vector<std::pair<std::uint32_t, Rational>>& out, const Rational& weight)
{
    const long n = 1L << level;
    const Rational w = pow2(-static_cast<long>(level));
    auto wrap = [&](const Integer& k) -> std::uint32_t {
        long kk = k.get_si();
        if (s.is_circle())
            kk = ((kk % n) + n) % n;
        else
            kk = std::clamp(kk, 0L, n - 1);
        return static_cast<std::uint32_t>(kk);
    };
    if (H.is_point()) {
        Integer k = floor_int(H.lo / w);
        if (!s.is_circle() && H.lo >= 1)
            k = n - 1;
        Rational a = Rational(k) * w, b = a + w;
        out.emplace_back(wrap(k), weight);
        Rational u = H.lo - a, v = b - H.lo;
        return weight * (u * u + v * v) / (2 * w);
    }
    Integer k0 = floor_int(H.lo / w);
    Integer k1 = ceil_int(H.hi / w);
    Rational cost = 0;
    Rational hw = H.width();
    for (Integer k = k0; k < k1; ++k) {
        Rational a = Rational(k) * w, b = a + w;
        Rational u = rmax(a, H.lo), v = rmin(b, H.hi);
        if (v <= u)
            continue;
        Rational f = weight * (v - u) / hw;
        out.emplace_back(wrap(k), f);
        if (u != a || v != b)
            cost += f * abs_affine_integral(Rational(1), u - a, v - b);
    }
    return cost;
}

inline void merge_targets(std::vector<std::pair<std::uint32_t, Rational>>& t)
{
    std::sort(t.begin(), t.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::pair<std::uint32_t, Rational>> m;
    for (auto& e : t) {
        if (!m.empty() && m.back().first == e.first)
            m.back().second += e.second;
        else
            m.push_back(std::move(e));
    }
    t.swap(m);
}

}  // namespace detail

// Certified transfer plan of T at `level`. Each continuity piece of a cell is
// spread uniformly over (an outward rounding of) its image; the error charged
// per unit mass is the distance of T to the affine spread (zero for affine
// pieces with dyadic images) plus the exact cost of reprojecting partially
// covered target cells. Mass on D enclosures of positive width is charged the
// space diameter.
inline TransferPlan build_transfer_plan(const MapModel& T, unsigned level)
{
    if (level > kMaxHistogramLevel)
        throw UsageError("pushforward level above " + std::to_string(kMaxHistogramLevel));
    TransferPlan plan;
    plan.space = T.space;
    plan.level = level;
    plan.uniform_error = T.uniform_error;
    const std::size_t n = std::size_t{1} << level;
    const Rational w = pow2(-static_cast<long>(level));
    const Rational diam = T.space.diameter();
    plan.cols.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        RatInterval cell(Rational(c) * w, Rational(c + 1) * w);
        if (T.interior_meets_D(cell))
            plan.d_cells.push_back(static_cast<std::uint32_t>(c));
        std::vector<RatInterval> dparts;
        auto pieces = detail::split_at_D(T, cell, dparts);
        TransferColumn col;
        col.err = 0;
        for (const auto& P : pieces) {
            Rational frac_p = P.width() / w;
            RatInterval img = T.eval_on_piece(P);
            RatInterval H = detail::deposit_interval(T, img, level);
            Rational e;
            if (auto aff = T.affine_piece ? T.affine_piece(P) : std::nullopt) {
                RatInterval exact = affine_image(*aff, P);
                e = rmax(rabs(exact.lo - H.lo), rabs(exact.hi - H.hi));
            } else {
                e = detail::nonlinear_deposit_error(T, P, H);
            }
            col.err += frac_p * e;
            col.err += detail::deposit(T.space, H, level, col.targets, frac_p);
        }
        for (const auto& Dp : dparts) {
            Rational frac_d = Dp.width() / w;
            RatInterval H = detail::deposit_interval(T, T.eval(Dp), level);
            detail::deposit(T.space, H, level, col.targets, frac_d);
            col.err += frac_d * diam;
        }
        detail::merge_targets(col.targets);
        plan.cols[c] = std::move(col);
    }
    return plan;
}

inline CertifiedMeasure apply_plan(const TransferPlan& plan, const HistogramMeasure& mu)
{
    if (mu.level != plan.level || !(mu.space == plan.space))
        throw UsageError("pushforward: measure level/space does not match the transfer plan");
    std::vector<Rational> out(mu.size(), Rational(0));
    Rational err = plan.uniform_error;
    for (std::size_t c = 0; c < mu.size(); ++c) {
        const Rational& m = mu.mass[c];
        if (m == 0)
            continue;
        for (const auto& [k, f] : plan.cols[c].targets)
            out[k] += m * f;
        err += m * plan.cols[c].err;
    }
    return {HistogramMeasure{mu.space, mu.level, std::move(out)}, err};
}

inline void check_pushforward_args(const MapModel& T, const HistogramMeasure& mu, const RegularityClass* reg)
{
    if (!(T.space == mu.space))
        throw UsageError("pushforward: map and measure live on different spaces");
    if (!T.D.empty() && !reg)
        throw UsageError("pushforward: map '" + T.name + "' has a discontinuity set; a regularity class is required");
    if (reg)
        reg->validate();
}

// Certified L_T(mu) at mu's level: W1(result.measure, L_T mu) <= result.err.
inline CertifiedMeasure pushforward(const MapModel& T, const HistogramMeasure& mu, const RegularityClass* reg)
{
    check_pushforward_args(T, mu, reg);
    return apply_plan(build_transfer_plan(T, mu.level), mu);
}

inline CertifiedMeasure pushforward(const MapModel& T, const HistogramMeasure& mu, const RegularityClass& reg)
{
    return pushforward(T, mu, &reg);
}

// Interval containing W1(mu, L_T mu).
inline RatInterval residual_from(const HistogramMeasure& mu, const CertifiedMeasure& pf)
{
    Rational c = w1(Measure(mu), Measure(pf.measure));
    return {rmax(Rational(0), c - pf.err), c + pf.err};
}

inline RatInterval residual(const MapModel& T, const HistogramMeasure& mu, const RegularityClass* reg)
{
    return residual_from(mu, pushforward(T, mu, reg));
}

inline RatInterval residual(const MapModel& T, const HistogramMeasure& mu, const RegularityClass& reg)
{
    return residual(T, mu, &reg);
}

// Rounds masses down to multiples of 2^-bits (the deficit goes to the largest
// cell) and returns the exact W1 cost of the change.
inline Rational round_masses(HistogramMeasure& mu, long bits)
{
    HistogramMeasure before = mu;
    Rational total = 0;
    std::size_t big = 0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        mu.mass[k] = floor_dyadic(mu.mass[k], bits);
        total += mu.mass[k];
        if (mu.mass[k] > mu.mass[big])
            big = k;
    }
    mu.mass[big] += 1 - total;
    if (mu.mass == before.mass)
        return 0;
    return w1(Measure(before), Measure(mu));
}

struct IterateResult {
    CertifiedMeasure result;
    bool contraction_unverified = false;  // no lip_away: errors summed with factor 1
    bool vacuous = false;                 // err >= diameter of the space
    std::vector<Rational> errs;           // accumulated err after each step
};

struct IterateOptions {
    long round_bits = 96;  // dyadic rounding of masses after each step; 0 disables
};

// n certified pushforwards. The accumulated radius follows
// err_{k+1} = lip * err_k + e_k + r_k + d_k with e_k the step error, r_k the
// rounding cost and d_k = (cap per D cell) * diam charged for every cell
// meeting D, the mass the true iterate can keep there under the declared
// regularity class.
inline IterateResult iterate_pushforward(const MapModel& T, const HistogramMeasure& mu0, unsigned n,
                                         const RegularityClass* reg, IterateOptions opt = {})
{
    check_pushforward_args(T, mu0, reg);
    TransferPlan plan = build_transfer_plan(T, mu0.level);
    IterateResult r;
    r.contraction_unverified = !T.lip_away.has_value();
    Rational lip = T.lip_away ? rmax(*T.lip_away, Rational(0)) : Rational(1);
    Rational dterm = 0;
    if (reg && !plan.d_cells.empty())
        dterm = Rational(static_cast<unsigned long>(plan.d_cells.size())) * rmin(Rational(1), cell_cap(*reg, mu0.level)) *
                T.space.diameter();
    HistogramMeasure cur = mu0;
    Rational err = 0;
    for (unsigned k = 0; k < n; ++k) {
        CertifiedMeasure step = apply_plan(plan, cur);
        Rational rc = opt.round_bits > 0 ? round_masses(step.measure, opt.round_bits) : Rational(0);
        err = lip * err + step.err + rc + dterm;
        cur = std::move(step.measure);
        r.errs.push_back(err);
    }
    r.result = {std::move(cur), err};
    r.vacuous = err >= T.space.diameter();
    return r;
}

struct BirkhoffResult {
    RatInterval average;
    unsigned steps = 0;     // orbit steps actually averaged
    bool complete = true;   // false when the orbit enclosure blew up first
};

// (1/n) Σ_{k<n} f(T^k x0) enclosed by propagating an interval orbit. Circle
// orbits are tracked as lift intervals shifted back near [0,1).
inline BirkhoffResult birkhoff_average(const MapModel& T, const CRealOracle& x0, const IntervalFn& f, unsigned n,
                                       unsigned precision = 0)
{
    if (n == 0)
        throw UsageError("birkhoff_average: n must be positive");
    unsigned prec = precision ? precision : n + 40;
    auto x = enclose_creal(x0, prec);
    if (!x)
        throw Error("birkhoff_average: initial point oracle exhausted");
    RatInterval cur = *x;
    if (!T.space.is_circle())
        cur = RatInterval(rmax(cur.lo, Rational(0)), rmin(cur.hi, Rational(1)));
    RatInterval sum(Rational(0));
    BirkhoffResult res;
    auto feval = [&](const RatInterval& I) {
        if (!T.space.is_circle())
            return f(I);
        std::optional<RatInterval> acc;
        for (const auto& p : reduce_circle(I)) {
            RatInterval v = f(p);
            acc = acc ? hull(*acc, v) : v;
        }
        return *acc;
    };
    for (unsigned k = 0; k < n; ++k) {
        if (T.space.is_circle() && cur.width() >= 1) {
            res.complete = false;
            break;
        }
        if (!T.space.is_circle() && cur.lo == 0 && cur.hi == 1 && k > 0) {
            res.complete = false;
            break;
        }
        sum = sum + feval(cur);
        res.steps = k + 1;
        if (k + 1 == n)
            break;
        cur = round_out(eval_anywhere(T, cur), static_cast<long>(prec) + 16);
        if (T.space.is_circle()) {
            Rational shift(floor_int(cur.lo));
            cur = cur - RatInterval(shift);
        } else {
            cur = RatInterval(rmax(cur.lo, Rational(0)), rmin(cur.hi, Rational(1)));
        }
    }
    res.average = sum / Rational(res.steps);
    return res;
}

}  // namespace invmeas
