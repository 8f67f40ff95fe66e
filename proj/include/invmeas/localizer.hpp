#pragma once

#include "detail/simplex.hpp"
#include "measure_net.hpp"
#include "pushforward.hpp"

#include <numeric>

namespace invmeas {

struct MeasureBall {
    Measure center;
    Rational radius;
};

enum class LocalizeStatus { Certified, Eliminated, BudgetExhausted };

inline const char* to_string(LocalizeStatus s)
{
    switch (s) {
    case LocalizeStatus::Certified:
        return "Certified";
    case LocalizeStatus::Eliminated:
        return "Eliminated";
    default:
        return "BudgetExhausted";
    }
}

struct TraceRow {
    unsigned level = 0;
    std::size_t count = 0;     // surviving candidates (regions for the LP engine)
    Rational min_residual;     // certified lower bound over all survivors
    Rational diameter;         // upper bound on the W1 diameter of the survivors
};

// Certified bounds lo[k] <= F(k w) <= hi[k] on the CDF of every measure not
// eliminated at `level`, F(x) = mu([0, x)).
struct CdfBox {
    unsigned level = 0;
    std::vector<Rational> lo, hi;  // size 2^level + 1
};

struct LocalizeReport {
    LocalizeStatus status = LocalizeStatus::BudgetExhausted;
    std::optional<CertifiedMeasure> result;
    std::vector<TraceRow> trace;
    std::optional<CdfBox> box;
    std::vector<CdfBox> boxes;  // one per completed level, box == boxes.back()
    std::string note;
};

struct LocalizeRequest {
    MapModel map;
    RegularityClass reg;
    MeasureBall isolating;
    Rational tol;
    unsigned max_level = 8;
    Budget budget{100000};
    unsigned min_level = 2;
    long center_bits = 40;  // dyadic rounding of the reported measure
};

inline constexpr unsigned kMaxLocalizeLevel = 9;

// Upper bound of W1(mu, histogram_project(mu, level)) for mu in the class.
// Mass moves inside its own cell; with density <= K/2 (alpha = 1) a cell of
// mass m costs at most (w/2)(m - m^2/(K w/2)). The sum is concave in the
// masses, so under sum m = 1 it peaks at m = w everywhere: (w/2)(1 - 2/K).
inline Rational projection_radius(const RegularityClass& reg, unsigned level)
{
    Rational w = pow2(-static_cast<long>(level));
    Rational r = w / 2;
    if (reg.alpha == 1)
        r = rmax(Rational(0), r * (1 - 2 / reg.K));
    return r;
}

// ---------------------------------------------------------------------------
// Explicit nets

// Histograms at `level` with masses on the grid 2^-(level + grid_bits) and
// mass(c) <= K (2 w)^alpha, in lexicographic order (largest first cell first).
// Floor-rounding the CDF of P_level(mu) puts every mu in the class within
// W1 <= 2^-level + grid step of the net; for alpha = 1 every element has
// alpha-norm <= 4K.
inline std::vector<HistogramMeasure> regular_net(const RegularityClass& reg, unsigned level, const Space& s,
                                                 unsigned grid_bits = 2, unsigned long cap = kDefaultNetCap)
{
    reg.validate();
    check_measure_space(s);
    if (level > 12)
        throw UsageError("regular_net: level above 12");
    const std::size_t n = std::size_t{1} << level;
    const unsigned bits = level + grid_bits;
    if (bits > 30)
        throw UsageError("regular_net: grid too fine");
    const long q = 1L << bits;  // grid units per unit mass
    Rational capq = cell_cap(reg, level) * q;
    long cap_units = std::min<long>(q, floor_int(capq).get_si());
    std::vector<HistogramMeasure> out;
    if (static_cast<long>(n) * cap_units < q)
        return out;
    std::vector<long> k(n, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i + 1 == n) {
            if (left > cap_units)
                return;
            k[i] = left;
            if (out.size() >= cap)
                throw UsageError("regular_net: more than " + std::to_string(cap) +
                                 " histograms; use a coarser level or grid");
            std::vector<Rational> mass(n);
            for (std::size_t t = 0; t < n; ++t)
                mass[t] = make_rational(k[t], q);
            out.push_back({s, level, std::move(mass)});
            return;
        }
        long rest = static_cast<long>(n - i - 1) * cap_units;
        for (long v = std::min(left, cap_units); v >= 0 && v + rest >= left; --v) {
            k[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, q);
    return out;
}

struct NetRound {
    std::vector<HistogramMeasure> candidates;
    Rational mesh;  // every point of the searched class is within mesh of a candidate
};

using NetSchedule = std::function<std::optional<NetRound>(unsigned round)>;
using ResidualFn = std::function<RatInterval(const HistogramMeasure&)>;

namespace detail {

inline bool lex_less(const HistogramMeasure& a, const HistogramMeasure& b) { return a.mass > b.mass; }

// Upper bound of the W1 diameter; exact for small sets.
inline Rational survivor_diameter(const std::vector<HistogramMeasure>& s)
{
    Rational d = 0;
    if (s.size() <= 64) {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                d = rmax(d, w1(Measure(s[i]), Measure(s[j])));
        return d;
    }
    for (std::size_t j = 1; j < s.size(); ++j)
        d = rmax(d, w1(Measure(s[0]), Measure(s[j])));
    return 2 * d;
}

}  // namespace detail

// Net elimination for a zero of g with |g(mu) - g(nu)| <= lip_g W1(mu, nu):
// a candidate within `mesh` of the zero lies within radius + mesh of the
// ball center and has g <= lip_g * mesh there. Every g evaluation costs one
// budget step.
inline LocalizeReport localize_zero(const ResidualFn& g, const Rational& lip_g, const NetSchedule& net,
                                    const MeasureBall& isolating, const Rational& tol, Budget budget)
{
    if (tol <= 0)
        throw UsageError("localize: tol must be positive");
    if (lip_g < 0)
        throw UsageError("localize: lip_g must be non-negative");
    LocalizeReport rep;
    unsigned long used = 0;
    for (unsigned round = 0;; ++round) {
        auto nr = net(round);
        if (!nr) {
            rep.note = "net schedule exhausted";
            return rep;
        }
        const Rational& r = nr->mesh;
        std::vector<HistogramMeasure> surv;
        std::vector<Rational> upper;
        Rational min_res;
        bool any = false;
        for (const auto& c : nr->candidates) {
            if (w1(Measure(c), isolating.center) > isolating.radius + r)
                continue;
            if (used++ >= budget.steps) {
                rep.note = "evaluation budget exhausted";
                return rep;
            }
            RatInterval gi = g(c);
            min_res = any ? rmin(min_res, gi.lo) : gi.lo;
            any = true;
            if (gi.lo > lip_g * r)
                continue;
            surv.push_back(c);
            upper.push_back(gi.hi);
        }
        TraceRow row;
        row.level = surv.empty() && nr->candidates.empty() ? 0 : nr->candidates.front().level;
        row.count = surv.size();
        row.min_residual = any ? min_res : Rational(0);
        if (surv.empty()) {
            rep.trace.push_back(row);
            rep.status = LocalizeStatus::Eliminated;
            rep.note = "all candidates eliminated: hypothesis violation (no isolated zero in the ball under the "
                       "stated modulus)";
            return rep;
        }
        row.diameter = detail::survivor_diameter(surv);
        rep.trace.push_back(row);
        if (row.diameter + r <= tol) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < surv.size(); ++i)
                if (upper[i] < upper[best] || (upper[i] == upper[best] && detail::lex_less(surv[i], surv[best])))
                    best = i;
            rep.status = LocalizeStatus::Certified;
            rep.result = CertifiedMeasure{surv[best], row.diameter + r};
            return rep;
        }
    }
}

// ---------------------------------------------------------------------------
// Continuum elimination over level-L histograms

namespace detail {

// Survivors at level L are the masses m of P_L(mu) for the invariant mu:
//   0 <= m_c <= K (w/2)^alpha, sum m = 1,
//   sum_s |(w/2)(D_s + D_{s+1}) - w tau| - err(m) <= theta   (residual),
//   sum_s |(w/2)(E_s + E_{s+1}) - w tau'| <= rho_L              (ball),
// with D = F - F_{Pm} and E = F - C the CDF gaps at grid points (tau, tau'
// only on the circle). Absolute values are split as u+ - u-, v+ - v-.
struct LevelModel {
    unsigned level = 0;
    std::size_t n = 0;
    bool circle = false;
    Rational w, theta, rho, rL;
    TransferPlan plan;
    std::vector<Rational> cap, C;
    std::vector<Rational> lo, hi;  // variable bounds
    std::size_t nvars = 0;

    std::size_t m(std::size_t c) const { return c; }
    std::size_t up(std::size_t s) const { return n + s; }
    std::size_t um(std::size_t s) const { return 2 * n + s; }
    std::size_t vp(std::size_t s) const { return 3 * n + s; }
    std::size_t vm(std::size_t s) const { return 4 * n + s; }
    std::size_t tau() const { return 5 * n; }
    std::size_t taup() const { return 5 * n + 1; }

    std::size_t rowE() const { return 0; }
    std::size_t rowR(std::size_t s) const { return 1 + s; }
    std::size_t rowRB() const { return 1 + n; }
    std::size_t rowB(std::size_t s) const { return 2 + n + s; }
    std::size_t rowBB() const { return 2 + 2 * n; }
    std::size_t rows() const { return 3 + 2 * n; }
};

// Cells that no invariant measure charges, for non-decreasing interval maps.
// If y < T(x) then T^-1[0,y] is contained in [0,x), so F(y) <= F(x-); chained
// along a lower orbit x = y_0 < y_1 < ... this gives mu[x, lim y_n) = 0. The
// mirrored argument along upper orbits clears (lim y_n, x].
inline std::vector<bool> wandering_cells(const MapModel& T, unsigned level, std::size_t max_steps = 1u << 14)
{
    const std::size_t n = std::size_t{1} << level;
    std::vector<bool> zero(n, false);
    if (!T.monotone || T.space.is_circle())
        return zero;
    const Rational w = pow2(-static_cast<long>(level));
    const long bits = static_cast<long>(level) + 12;
    const Rational nudge = pow2(-bits);
    auto orbit_limit = [&](Rational y, bool up) -> Rational {
        for (std::size_t it = 0; it < max_steps; ++it) {
            RatInterval t = T.eval(RatInterval(y));
            Rational z = up ? floor_dyadic(t.lo - T.uniform_error - nudge, bits)
                            : ceil_dyadic(t.hi + T.uniform_error + nudge, bits);
            if (up ? z <= y : z >= y)
                break;
            y = z;
            if (up ? y >= 1 : y <= 0)
                break;
        }
        return y;
    };
    for (std::size_t j = 0; j < n;) {
        Rational x = w * static_cast<unsigned long>(j);
        Rational X = orbit_limit(x, true);
        std::size_t k = j;
        for (; k < n && w * static_cast<unsigned long>(k + 1) < X; ++k)
            zero[k] = true;  // closed cell [kw, (k+1)w] inside [x, X)
        j = std::max(k, j + 1);
    }
    for (std::size_t j = n; j > 0;) {
        Rational x = w * static_cast<unsigned long>(j);
        Rational X = orbit_limit(x, false);
        std::size_t k = j;
        for (; k > 0 && w * static_cast<unsigned long>(k - 1) > X; --k)
            zero[k - 1] = true;  // closed cell inside (X, x]
        j = std::min(k, j - 1);
    }
    return zero;
}

inline LevelModel build_level(const LocalizeRequest& req, unsigned level)
{
    LevelModel M;
    const MapModel& T = req.map;
    M.level = level;
    M.n = std::size_t{1} << level;
    M.circle = T.space.is_circle();
    M.w = pow2(-static_cast<long>(level));
    M.rL = projection_radius(req.reg, level);
    M.plan = build_transfer_plan(T, level);
    Rational cell = rmin(Rational(1), window_cap(req.reg, level, 1));
    M.cap.assign(M.n, cell);
    Rational lip = *T.lip_away;
    M.theta = (1 + lip) * M.rL + Rational(static_cast<unsigned long>(M.plan.d_cells.size())) * cell * T.space.diameter() +
              M.plan.uniform_error;
    HistogramMeasure pc = histogram_project(req.isolating.center, level);
    M.rho = req.isolating.radius + M.rL + w1(req.isolating.center, Measure(pc));
    M.C = prefix_sums(pc.mass);
    std::size_t n = M.n;
    M.nvars = 5 * n + (M.circle ? 2 : 0);
    M.lo.assign(M.nvars, Rational(0));
    M.hi.assign(M.nvars, Rational(0));
    Rational ub = M.circle ? 2 * M.w : M.w;
    std::vector<bool> wander = wandering_cells(T, level);
    for (std::size_t c = 0; c < n; ++c) {
        if (wander[c])
            M.cap[c] = 0;
        M.hi[M.m(c)] = M.cap[c];
        M.hi[M.up(c)] = M.hi[M.um(c)] = M.hi[M.vp(c)] = M.hi[M.vm(c)] = ub;
    }
    if (M.circle) {
        M.lo[M.tau()] = M.lo[M.taup()] = -1;
        M.hi[M.tau()] = M.hi[M.taup()] = 1;
    }
    return M;
}

inline DenseLp to_dense(const LevelModel& M)
{
    const std::size_t n = M.n;
    DenseLp lp;
    lp.rows = M.rows();
    lp.cols = M.nvars;
    lp.a.assign(lp.rows * lp.cols, 0.0);
    lp.type.assign(lp.rows, RowType::Eq);
    lp.b.assign(lp.rows, 0.0);
    for (std::size_t j = 0; j < M.nvars; ++j) {
        lp.lo.push_back(M.lo[j].get_d());
        lp.hi.push_back(M.hi[j].get_d());
    }
    const double w = M.w.get_d();
    for (std::size_t c = 0; c < n; ++c)
        lp.at(M.rowE(), M.m(c)) = 1.0;
    lp.b[M.rowE()] = 1.0;
    // dD_s/dm_c = [c < s] - sum_{j<s} P_jc
    std::vector<double> col(n, 0.0), dD(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        for (const auto& [k, f] : M.plan.cols[c].targets)
            col[k] += f.get_d();
        double cum = 0;
        for (std::size_t s = 0; s <= n; ++s) {
            dD[s] = (c < s ? 1.0 : 0.0) - cum;
            if (s < n)
                cum += col[s];
        }
        for (std::size_t s = 0; s < n; ++s) {
            lp.at(M.rowR(s), M.m(c)) = -(w / 2) * (dD[s] + dD[s + 1]);
            double dF = (c < s ? 1.0 : 0.0) + (c < s + 1 ? 1.0 : 0.0);
            lp.at(M.rowB(s), M.m(c)) = -(w / 2) * dF;
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        lp.at(M.rowR(s), M.up(s)) = 1.0;
        lp.at(M.rowR(s), M.um(s)) = -1.0;
        lp.at(M.rowB(s), M.vp(s)) = 1.0;
        lp.at(M.rowB(s), M.vm(s)) = -1.0;
        if (M.circle) {
            lp.at(M.rowR(s), M.tau()) = w;
            lp.at(M.rowB(s), M.taup()) = w;
        }
        lp.b[M.rowB(s)] = Rational(-(M.w / 2) * (M.C[s] + M.C[s + 1])).get_d();
        lp.at(M.rowRB(), M.up(s)) = lp.at(M.rowRB(), M.um(s)) = 1.0;
        lp.at(M.rowBB(), M.vp(s)) = lp.at(M.rowBB(), M.vm(s)) = 1.0;
    }
    for (std::size_t c = 0; c < n; ++c)
        lp.at(M.rowRB(), M.m(c)) = -M.plan.cols[c].err.get_d();
    lp.type[M.rowRB()] = lp.type[M.rowBB()] = RowType::Le;
    lp.b[M.rowRB()] = M.theta.get_d();
    lp.b[M.rowBB()] = M.rho.get_d();
    return lp;
}

// Objectives over the structural variables.
struct Objective {
    enum Kind { Zero, Cdf, NegCdf, Residual, Mass } kind = Zero;
    std::size_t k = 0;
    std::vector<Rational> coef;  // Mass: coefficients on the cell masses
};

inline std::vector<double> dense_objective(const LevelModel& M, const Objective& o)
{
    std::vector<double> c(M.nvars, 0.0);
    switch (o.kind) {
    case Objective::Cdf:
    case Objective::NegCdf:
        for (std::size_t j = 0; j < o.k; ++j)
            c[M.m(j)] = o.kind == Objective::Cdf ? 1.0 : -1.0;
        break;
    case Objective::Residual:
        for (std::size_t s = 0; s < M.n; ++s) {
            c[M.up(s)] = c[M.um(s)] = 1.0;
            c[M.m(s)] = -M.plan.cols[s].err.get_d();
        }
        break;
    case Objective::Mass:
        for (std::size_t s = 0; s < M.n; ++s)
            c[M.m(s)] = o.coef[s].get_d();
        break;
    default:
        break;
    }
    return c;
}

// Exact lower bound of the objective over the rational polytope from any
// multipliers lambda (lambda >= 0 on the two <= rows):
//   c.x >= sum_j min(r_j lo_j, r_j hi_j) - lambda.b,  r = c + A^T lambda.
inline Rational certified_lower_bound(const LevelModel& M, const Objective& o, const std::vector<double>& lamd)
{
    const std::size_t n = M.n;
    std::vector<Rational> lam(lamd.size());
    for (std::size_t i = 0; i < lamd.size(); ++i)
        lam[i] = from_double(lamd[i]);
    lam[M.rowRB()] = rmax(lam[M.rowRB()], Rational(0));
    lam[M.rowBB()] = rmax(lam[M.rowBB()], Rational(0));
    const Rational half_w = M.w / 2;
    // Suffix sums of the weights on D_s and F_s (s = 1..n).
    std::vector<Rational> Bs(n + 2, Rational(0)), Gs(n + 2, Rational(0));
    for (std::size_t s = n; s >= 1; --s) {
        Rational lr = s < n ? lam[M.rowR(s)] : Rational(0);
        Rational lb = s < n ? lam[M.rowB(s)] : Rational(0);
        Rational beta = half_w * (lr + lam[M.rowR(s - 1)]);
        Rational gamma = half_w * (lb + lam[M.rowB(s - 1)]);
        Bs[s] = Bs[s + 1] + beta;
        Gs[s] = Gs[s + 1] + gamma;
    }
    // Bs[j + 1] = sum_{s > j} beta_s.
    std::vector<Rational> r(M.nvars, Rational(0));
    switch (o.kind) {
    case Objective::Cdf:
    case Objective::NegCdf:
        for (std::size_t j = 0; j < o.k; ++j)
            r[M.m(j)] = o.kind == Objective::Cdf ? 1 : -1;
        break;
    case Objective::Residual:
        for (std::size_t s = 0; s < n; ++s) {
            r[M.up(s)] = r[M.um(s)] = 1;
            r[M.m(s)] = -M.plan.cols[s].err;
        }
        break;
    case Objective::Mass:
        for (std::size_t s = 0; s < n; ++s)
            r[M.m(s)] = o.coef[s];
        break;
    default:
        break;
    }
    Rational sumR = 0, sumB = 0;
    for (std::size_t s = 0; s < n; ++s) {
        sumR += lam[M.rowR(s)];
        sumB += lam[M.rowB(s)];
    }
    for (std::size_t c = 0; c < n; ++c) {
        Rational v = lam[M.rowE()] - lam[M.rowRB()] * M.plan.cols[c].err - Bs[c + 1] - Gs[c + 1];
        for (const auto& [k, f] : M.plan.cols[c].targets)
            v += f * Bs[k + 1];
        r[M.m(c)] += v;
        r[M.up(c)] += lam[M.rowR(c)] + lam[M.rowRB()];
        r[M.um(c)] += -lam[M.rowR(c)] + lam[M.rowRB()];
        r[M.vp(c)] += lam[M.rowB(c)] + lam[M.rowBB()];
        r[M.vm(c)] += -lam[M.rowB(c)] + lam[M.rowBB()];
    }
    if (M.circle) {
        r[M.tau()] += M.w * sumR;
        r[M.taup()] += M.w * sumB;
    }
    Rational lb = 0;
    for (std::size_t j = 0; j < M.nvars; ++j) {
        if (r[j] > 0)
            lb += r[j] * M.lo[j];
        else if (r[j] < 0)
            lb += r[j] * M.hi[j];
    }
    lb -= lam[M.rowE()] + lam[M.rowRB()] * M.theta + lam[M.rowBB()] * M.rho;
    for (std::size_t s = 0; s < n; ++s)
        lb += lam[M.rowB(s)] * half_w * (M.C[s] + M.C[s + 1]);
    return lb;
}

// Monotone clean-up and intersection with the coarser box (the CDF values at
// shared grid points are the same numbers).
inline void tighten_box(CdfBox& box, const std::optional<CdfBox>& prev)
{
    const std::size_t n = box.lo.size() - 1;
    if (prev && prev->level < box.level) {
        std::size_t f = std::size_t{1} << (box.level - prev->level);
        for (std::size_t k = 0; k < prev->lo.size(); ++k) {
            box.lo[k * f] = rmax(box.lo[k * f], prev->lo[k]);
            box.hi[k * f] = rmin(box.hi[k * f], prev->hi[k]);
        }
    }
    for (std::size_t k = 1; k <= n; ++k)
        box.lo[k] = rmax(box.lo[k], box.lo[k - 1]);
    for (std::size_t k = n; k-- > 0;)
        box.hi[k] = rmin(box.hi[k], box.hi[k + 1]);
}

inline bool box_empty(const CdfBox& box)
{
    for (std::size_t k = 0; k < box.lo.size(); ++k)
        if (box.lo[k] > box.hi[k])
            return true;
    return false;
}

inline HistogramMeasure histogram_from_cdf(const Space& s, unsigned level, const std::vector<Rational>& F)
{
    std::vector<Rational> mass(F.size() - 1);
    for (std::size_t k = 0; k + 1 < F.size(); ++k)
        mass[k] = F[k + 1] - F[k];
    return {s, level, std::move(mass)};
}

// Center with CDF at the rounded box midpoints; radius from the box alone:
// W1 <= sum_k w |F_k - c_k| over interior grid points (plus `extra`).
inline CertifiedMeasure box_center(const CdfBox& box, const Space& s, const Rational& extra, long bits)
{
    const std::size_t n = box.lo.size() - 1;
    const Rational w = pow2(-static_cast<long>(box.level));
    std::vector<Rational> F(n + 1);
    F[0] = 0;
    F[n] = 1;
    for (std::size_t k = 1; k < n; ++k) {
        Rational mid = (box.lo[k] + box.hi[k]) / 2;
        F[k] = rmin(rmax(floor_dyadic(mid, bits), F[k - 1]), Rational(1));
    }
    Rational err = extra;
    for (std::size_t k = 1; k < n; ++k)
        err += w * rmax(box.hi[k] - F[k], F[k] - box.lo[k]);
    return {histogram_from_cdf(s, box.level, F), err};
}

inline Rational box_diameter(const CdfBox& box, const Rational& extra)
{
    const std::size_t n = box.lo.size() - 1;
    const Rational w = pow2(-static_cast<long>(box.level));
    Rational d = 2 * extra;
    for (std::size_t k = 1; k < n; ++k)
        d += w * (box.hi[k] - box.lo[k]);
    return d;
}

struct LevelOutcome {
    enum Kind { Feasible, Eliminated, Unresolved, OutOfBudget } kind = Unresolved;
    CdfBox box;
    Rational min_residual;
    CertifiedMeasure center;
    Rational diameter;
};

// Split centers: CDF = lo (rounded down) at k <= j and hi (rounded up) at
// k > j. Every survivor then has F_k >= c_k left of the split and F_k <= c_k
// right of it, so sum_k w |F_k - c_k| is linear and its maximum over the
// survivor polytope is one LP.
inline std::vector<std::size_t> split_candidates(const CdfBox& box)
{
    const std::size_t n = box.lo.size() - 1;
    std::size_t j0 = 1;
    while (j0 < n - 1 && (box.lo[j0] + box.hi[j0]) < 1)
        ++j0;
    std::vector<std::size_t> out;
    for (long d : {0L, -1L, 1L, -2L, 2L, -4L, 4L, -8L, 8L}) {
        long j = static_cast<long>(j0) + d;
        if (j >= 0 && j < static_cast<long>(n))
            out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

inline LevelOutcome solve_level(const LevelModel& M, const std::optional<CdfBox>& prev, const Space& space,
                                long bits, unsigned long& budget_left)
{
    LevelOutcome out;
    DenseSimplex lp(to_dense(M));
    auto take = [&]() {
        if (budget_left == 0)
            return false;
        --budget_left;
        return true;
    };
    if (!take()) {
        out.kind = LevelOutcome::OutOfBudget;
        return out;
    }
    LpStatus st = lp.phase1();
    if (st == LpStatus::Infeasible) {
        Rational lb = certified_lower_bound(M, {Objective::Zero, 0, {}}, lp.row_duals());
        out.kind = lb > 0 ? LevelOutcome::Eliminated : LevelOutcome::Unresolved;
        return out;
    }
    if (st != LpStatus::Optimal)
        return out;
    auto bound = [&](const Objective& o) -> std::optional<Rational> {
        if (lp.solve(dense_objective(M, o)) != LpStatus::Optimal)
            return std::nullopt;
        return certified_lower_bound(M, o, lp.row_duals());
    };
    const std::size_t n = M.n;
    if (!take()) {
        out.kind = LevelOutcome::OutOfBudget;
        return out;
    }
    auto res = bound({Objective::Residual, 0, {}});
    out.min_residual = res ? rmax(*res, Rational(0)) : Rational(0);
    CdfBox& box = out.box;
    box.level = M.level;
    box.lo.assign(n + 1, Rational(0));
    box.hi.assign(n + 1, Rational(1));
    box.hi[0] = 0;
    box.lo[n] = 1;
    for (std::size_t k = 1; k < n; ++k) {
        if (!take()) {
            out.kind = LevelOutcome::OutOfBudget;
            return out;
        }
        if (auto b = bound({Objective::Cdf, k, {}}))
            box.lo[k] = rmax(*b, Rational(0));
    }
    for (std::size_t k = n - 1; k >= 1; --k) {
        if (!take()) {
            out.kind = LevelOutcome::OutOfBudget;
            return out;
        }
        if (auto b = bound({Objective::NegCdf, k, {}}))
            box.hi[k] = rmin(-*b, Rational(1));
    }
    tighten_box(box, prev);
    if (box_empty(box)) {
        out.kind = LevelOutcome::Eliminated;
        return out;
    }
    out.kind = LevelOutcome::Feasible;
    out.center = box_center(box, space, M.rL, bits);
    const Rational w = M.w;
    for (std::size_t j : split_candidates(box)) {
        if (!take())
            break;
        std::vector<Rational> F(n + 1);
        Objective o{Objective::Mass, 0, std::vector<Rational>(n, Rational(0))};
        Rational shift = 0;  // -sum_k w s_k c_k
        for (std::size_t k = 0; k <= n; ++k) {
            bool left = k <= j;
            F[k] = left ? floor_dyadic(box.lo[k], bits) : ceil_dyadic(box.hi[k], bits);
            if (k == 0 || k == n)
                continue;
            // maximise sum w s_k F_k = minimise sum -w s_k F_k, F_k = sum_{c<k} m_c
            Rational sk = left ? Rational(1) : Rational(-1);
            for (std::size_t c = 0; c < k; ++c)
                o.coef[c] -= w * sk;
            shift -= w * sk * F[k];
        }
        auto lb = bound(o);
        if (!lb)
            continue;
        Rational err = -*lb + shift + M.rL;
        if (err < out.center.err)
            out.center = {histogram_from_cdf(space, M.level, F), err};
    }
    out.diameter = rmin(box_diameter(box, M.rL), 2 * out.center.err);
    return out;
}

}  // namespace detail

inline void validate(const LocalizeRequest& req)
{
    req.reg.validate();
    if (req.tol <= 0)
        throw UsageError("localize: tol must be positive");
    if (req.isolating.radius <= req.tol)
        throw UsageError("localize: isolating radius must exceed tol");
    if (!req.map.lip_away)
        throw UsageError("localize: map '" + req.map.name +
                         "' declares no lip_away; an effective modulus is required for elimination");
    if (!(space_of(req.isolating.center) == req.map.space))
        throw UsageError("localize: isolating ball and map live on different spaces");
    if (req.max_level > kMaxLocalizeLevel)
        throw UsageError("localize: max_level above " + std::to_string(kMaxLocalizeLevel));
    if (req.min_level > req.max_level)
        throw UsageError("localize: min_level above max_level");
}

// Invariant measure in V_{alpha,K} inside the isolating ball. Level by level,
// every histogram that could be the projection of such a measure is kept;
// the rest is eliminated by exact LP duality. Each LP costs one budget step.
inline LocalizeReport localize_invariant(const LocalizeRequest& req)
{
    validate(req);
    LocalizeReport rep;
    unsigned long left = req.budget.steps;
    std::optional<CdfBox> prev;
    for (unsigned L = req.min_level; L <= req.max_level; ++L) {
        detail::LevelModel M = detail::build_level(req, L);
        detail::LevelOutcome lv = detail::solve_level(M, prev, req.map.space, req.center_bits, left);
        TraceRow row;
        row.level = L;
        if (lv.kind == detail::LevelOutcome::Eliminated) {
            row.count = 0;
            rep.trace.push_back(row);
            rep.status = LocalizeStatus::Eliminated;
            rep.result.reset();
            rep.note = "all candidates eliminated: hypothesis violation (no invariant measure of the class in the "
                       "ball, or the declared lip_away / regularity is wrong)";
            return rep;
        }
        if (lv.kind != detail::LevelOutcome::Feasible) {
            rep.note = lv.kind == detail::LevelOutcome::OutOfBudget ? "LP budget exhausted"
                                                                    : "LP could not be certified numerically";
            return rep;
        }
        row.count = 1;
        row.min_residual = lv.min_residual;
        row.diameter = lv.diameter;
        rep.trace.push_back(row);
        rep.result = lv.center;
        rep.box = lv.box;
        rep.boxes.push_back(lv.box);
        prev = lv.box;
        if (rep.result->err <= req.tol) {
            rep.status = LocalizeStatus::Certified;
            return rep;
        }
    }
    rep.note = "max_level reached before the certified radius fell below tol";
    return rep;
}

// Advisory ball: center = n certified pushforwards of Lebesgue, radius =
// max(4 * residual width, floor). Nothing here is certified.
inline MeasureBall suggest_isolating_ball(const MapModel& T, const RegularityClass& reg, unsigned n, unsigned level,
                                          const Rational& floor = Rational(1, 16))
{
    HistogramMeasure u = uniform_histogram(T.space, level);
    const RegularityClass* rp = &reg;
    IterateResult it = iterate_pushforward(T, u, n, rp);
    RatInterval res = residual(T, it.result.measure, rp);
    return {Measure(it.result.measure), rmax(4 * res.width(), floor)};
}

}  // namespace invmeas
