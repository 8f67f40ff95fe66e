#pragma once

#include "localizer.hpp"
#include "support.hpp"

#include <variant>

namespace invmeas {

// Non-decreasing rational sequence tau_1 <= tau_2 <= ... in (0,1), i >= 1.
struct MonotoneEnum {
    std::function<Rational(unsigned long)> next;
};

// Open intervals (a_i, b_i) with 0 < a_i < b_i < 1, i >= 1.
struct IntervalEnum {
    std::function<std::pair<Rational, Rational>(unsigned long)> next;
};

// ---------------------------------------------------------------------------
// Toy register machines run side by side

struct Instr {
    enum Op { Inc, DecJz, Halt } op = Halt;
    unsigned reg = 0;
    std::size_t target = 0;  // DecJz: jump here when the register is zero
};

using Program = std::vector<Instr>;

// Runs program i (1-based) on input i in register 1, one instruction per
// program per round. A program that runs off its end or hits Halt halts with
// output register 0.
class Dovetailer {
public:
    explicit Dovetailer(std::vector<Program> programs) : programs_(std::move(programs))
    {
        state_.resize(programs_.size());
        for (std::size_t i = 0; i < programs_.size(); ++i) {
            state_[i].regs.assign(2, 0);
            state_[i].regs[1] = i + 1;
        }
    }

    std::size_t size() const { return programs_.size(); }
    unsigned long rounds() const { return rounds_; }

    void step()
    {
        ++rounds_;
        for (std::size_t i = 0; i < programs_.size(); ++i) {
            auto& s = state_[i];
            if (s.halted)
                continue;
            const Program& p = programs_[i];
            if (s.pc >= p.size() || p[s.pc].op == Instr::Halt) {
                s.halted = true;
                s.halt_round = rounds_;
                continue;
            }
            const Instr& in = p[s.pc];
            if (in.reg >= s.regs.size())
                s.regs.resize(in.reg + 1, 0);
            if (in.op == Instr::Inc) {
                ++s.regs[in.reg];
                ++s.pc;
            } else if (s.regs[in.reg] == 0) {
                s.pc = in.target;
            } else {
                --s.regs[in.reg];
                ++s.pc;
            }
        }
    }

    void run(unsigned long rounds)
    {
        for (unsigned long r = 0; r < rounds; ++r)
            step();
    }

    bool halted(std::size_t i) const { return state_[i].halted; }
    unsigned long halt_round(std::size_t i) const { return state_[i].halt_round; }
    unsigned long output(std::size_t i) const { return state_[i].regs[0]; }

private:
    struct State {
        std::size_t pc = 0;
        std::vector<unsigned long> regs;
        bool halted = false;
        unsigned long halt_round = 0;
    };
    std::vector<Program> programs_;
    std::vector<State> state_;
    unsigned long rounds_ = 0;
};

// Program that spends `work` Inc steps, leaves `out` in register 0 and halts.
inline Program program_halting(unsigned long work, unsigned long out)
{
    Program p;
    for (unsigned long k = 0; k < out; ++k)
        p.push_back({Instr::Inc, 0, 0});
    for (unsigned long k = out; k < work; ++k)
        p.push_back({Instr::Inc, 2, 0});
    p.push_back({Instr::Halt, 0, 0});
    return p;
}

// Program that never halts (register 2 is always zero, so DecJz loops).
inline Program program_looping() { return {{Instr::DecJz, 2, 0}}; }

// Interval number v = 2^j - 1 + k (0 <= k < 2^j) names the open dyadic
// interval (k 2^-j, (k+1) 2^-j).
inline std::pair<unsigned, unsigned long> dyadic_index(unsigned long v)
{
    unsigned j = 0;
    while (v + 1 >= (2UL << j))
        ++j;
    return {j, v + 1 - (1UL << j)};
}

inline std::pair<Rational, Rational> numbered_interval(unsigned long v)
{
    auto [j, k] = dyadic_index(v);
    Rational w = pow2(-static_cast<long>(j));
    return {Rational(k) * w, Rational(k + 1) * w};
}

struct RemovedInterval {
    std::size_t program = 0;  // 1-based
    Rational a, b;
};

// Intervals removed after b.steps rounds: program i halted with output v and
// the numbered interval I_v is shorter than eps 2^-i.
inline std::vector<RemovedInterval> removed_intervals(Dovetailer d, const Rational& eps, Budget b)
{
    if (eps <= 0 || eps > 1)
        throw UsageError("noncomputable_compact: eps must lie in (0, 1]");
    d.run(b.steps);
    std::vector<RemovedInterval> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.halted(i))
            continue;
        auto [a, c] = numbered_interval(d.output(i));
        if (c - a < eps * pow2(-static_cast<long>(i + 1)))
            out.push_back({i + 1, a, c});
    }
    return out;
}

// [0,1] minus the removed open intervals. The removed length stays below
// eps at every budget, so the set is never empty for eps < 1.
inline CompactEnclosure noncomputable_compact(const Dovetailer& d, const Rational& eps, Budget b,
                                              unsigned level = 0)
{
    auto removed = removed_intervals(d, eps, b);
    unsigned L = level;
    if (L == 0) {
        L = 4;
        for (const auto& r : removed) {
            unsigned j = 0;
            while (pow2(-static_cast<long>(j)) > r.b - r.a)
                ++j;
            L = std::max(L, j + 2);
        }
        L = std::min(L, kMaxEnclosureLevel);
    }
    std::vector<IdealBall> balls;
    for (const auto& r : removed)
        balls.push_back(ReOpenSet::interval_ball(r.a, r.b));
    std::size_t count = balls.size();
    return set_minus_open(full_enclosure(Space::unit_interval(), L), ReOpenSet::from_balls(std::move(balls)),
                          Budget{count});
}

// ---------------------------------------------------------------------------
// Maps

namespace detail {

// Monotone model from an exact point evaluator: eval uses the end points and
// the map is affine between consecutive breakpoints.
inline MapModel monotone_from_points(std::string name, Space space, std::function<Rational(const Rational&)> f,
                                     std::vector<Rational> breaks)
{
    std::sort(breaks.begin(), breaks.end());
    MapModel T;
    T.name = std::move(name);
    T.space = space;
    T.monotone = true;
    T.eval = [f](const RatInterval& I) { return RatInterval(f(I.lo), f(I.hi)); };
    T.affine_piece = [f, breaks](const RatInterval& I) -> std::optional<Affine> {
        if (!(I.lo < I.hi))
            return std::nullopt;
        auto it = std::upper_bound(breaks.begin(), breaks.end(), I.lo);
        if (it != breaks.end() && *it < I.hi)
            return std::nullopt;
        Rational a = f(I.lo), b = f(I.hi);
        Rational s = (b - a) / (I.hi - I.lo);
        return Affine{s, a - s * I.lo};
    };
    return T;
}

}  // namespace detail

// T_N(x) = sum_{i<=N} 2^-i max(x, tau_i) + 2^-N x, within 2^-N of the full
// staircase sum_i 2^-i max(x, tau_i).
inline MapModel staircase_map(const MonotoneEnum& taus, unsigned N)
{
    if (N < 1)
        throw UsageError("staircase_map: N must be at least 1");
    std::vector<Rational> tau(N);
    for (unsigned i = 0; i < N; ++i) {
        tau[i] = taus.next(i + 1);
        if (tau[i] <= 0 || tau[i] >= 1)
            throw UsageError("staircase_map: tau_i must lie in (0,1)");
        if (i > 0 && tau[i] < tau[i - 1])
            throw UsageError("staircase_map: tau_i must be non-decreasing");
    }
    auto f = [tau, N](const Rational& x) -> Rational {
        Rational s = pow2(-static_cast<long>(N)) * x;
        for (unsigned i = 0; i < N; ++i)
            s += pow2(-static_cast<long>(i + 1)) * rmax(x, tau[i]);
        return s;
    };
    MapModel T = detail::monotone_from_points("staircase", Space::unit_interval(), f, tau);
    T.lip_away = 1;
    T.modulus = [](const Rational& e) -> Rational { return e; };
    T.uniform_error = pow2(-static_cast<long>(N));
    return T;
}

// Degree-one circle map, lift T_N = f/2 + sum_{i<=N} 2^-(i+1) f_i + 2^-(N+1) x
// on [0,1] with T_N(1) = 1 + eps/2 = T_N(0) + 1. Enumerated interval i gets
// weight 2^-(i+1) so that the weights of f and all f_i sum to one.
inline MapModel circle_gap_map(const IntervalEnum& U, const Rational& eps, unsigned N)
{
    if (N < 2)
        throw UsageError("circle_gap_map: N must be at least 2");
    if (eps <= 0 || eps >= Rational(1, 2))
        throw UsageError("circle_gap_map: eps must lie in (0, 1/2)");
    std::vector<std::pair<Rational, Rational>> iv(N);
    std::vector<Rational> breaks{eps, 1 - eps};
    for (unsigned i = 0; i < N; ++i) {
        iv[i] = U.next(i + 1);
        const auto& [a, b] = iv[i];
        if (!(0 < a && a < b && b < 1))
            throw UsageError("circle_gap_map: interval " + std::to_string(i + 1) + " must satisfy 0 < a < b < 1");
        breaks.push_back(a);
        breaks.push_back((a + b) / 2);
        breaks.push_back(b);
    }
    auto f = [iv, eps, N](const Rational& x) -> Rational {
        Rational base = x <= eps ? eps : (x >= 1 - eps ? Rational(2 * x - (1 - eps)) : x);
        Rational s = base / 2 + pow2(-static_cast<long>(N) - 1) * x;
        for (unsigned i = 0; i < N; ++i) {
            const auto& [a, b] = iv[i];
            Rational m = (a + b) / 2;
            Rational fi = x <= a || x >= b ? x : (x <= m ? Rational(2 * x - a) : b);
            s += pow2(-static_cast<long>(i) - 2) * fi;
        }
        return s;
    };
    MapModel T = detail::monotone_from_points("circle_gap", Space::circle(), f, breaks);
    T.lip_away = 2;
    T.modulus = [](const Rational& e) -> Rational { return e / 2; };
    T.uniform_error = pow2(-static_cast<long>(N));
    return T;
}

// ---------------------------------------------------------------------------
// Enumerators used by the demos

// tau_i = 1/2 - 2^-(i+1): computable supremum 1/2.
inline MonotoneEnum converging_to_half()
{
    return {[](unsigned long i) -> Rational { return Rational(1, 2) - pow2(-static_cast<long>(i) - 1); }};
}

// tau_i = base + sum of 2^-(p+1) over programs p (1-based) halted within i
// rounds. The supremum is known only to lie below base + sum_p 2^-(p+1).
inline MonotoneEnum dovetail_enumerator(std::vector<Program> programs, Rational base)
{
    return {[programs = std::move(programs), base](unsigned long i) -> Rational {
        Dovetailer d(programs);
        d.run(i);
        Rational t = base;
        for (std::size_t p = 0; p < d.size(); ++p)
            if (d.halted(p))
                t += pow2(-static_cast<long>(p) - 2);
        return t;
    }};
}

inline Rational dovetail_enumerator_cap(std::size_t programs, const Rational& base)
{
    return base + Rational(1, 2) - pow2(-static_cast<long>(programs) - 1);
}

// Programs used by the demos: two quick halts, one loop, one slow halt.
inline std::vector<Program> toy_programs()
{
    return {program_halting(3, 0), program_halting(20, 1), program_looping(), program_halting(50, 2)};
}

// Intervals alternately shrinking towards 0 and 1 inside (0, eps) and
// (1 - eps, 1), interleaved with the removed intervals of a dovetailer.
inline IntervalEnum dovetail_intervals(std::vector<Program> programs, Rational eps)
{
    return {[programs = std::move(programs), eps](unsigned long i) -> std::pair<Rational, Rational> {
        unsigned long k = (i + 1) / 2;
        Rational t = pow2(-static_cast<long>(k));
        if (i % 4 == 1)
            return {eps * t, eps};
        if (i % 4 == 3)
            return {1 - eps, 1 - eps * t};
        auto removed = removed_intervals(Dovetailer(programs), eps, Budget{i});
        if (removed.empty())
            return {eps * t, eps};
        const auto& r = removed[(i / 2) % removed.size()];
        Rational a = rmax(r.a, eps / 2), b = rmin(r.b, 1 - eps / 2);
        if (!(a < b))
            return {eps * t, eps};
        return {a, b};
    }};
}

// ---------------------------------------------------------------------------
// Non-convergence demo

struct StaircaseSystem {
    MonotoneEnum taus;
    Rational tau_upper;  // known upper bound of sup tau_i
};

struct CircleSystem {
    IntervalEnum U;
    Rational eps;
};

using DemoSystem = std::variant<StaircaseSystem, CircleSystem>;

struct DemoRow {
    unsigned long N = 0;
    Rational diameter;  // certified surviving diameter at the last level
    Rational gap;       // enumeration uncertainty at budget N
    std::size_t count = 0;
    LocalizeStatus status = LocalizeStatus::BudgetExhausted;
    std::optional<CertifiedMeasure> result;
    std::optional<CdfBox> box;
};

struct DemoReport {
    std::vector<DemoRow> rows;
    Rational c = 1;           // documented constant: diameter >= c * gap
    bool bound_holds = true;  // every row satisfies it
};

struct DemoOptions {
    unsigned min_level = 2;
    unsigned max_level = 7;
    Budget lp_budget{100000};
};

namespace detail {

// Cells of the fixed-point enclosure of the truncated circle map: the part
// of [eps, 1-eps] not covered by the first N intervals, as [lo, hi] hull.
inline RatInterval circle_fixed_hull(const CircleSystem& sys, unsigned long N)
{
    std::vector<std::pair<Rational, Rational>> iv;
    for (unsigned long i = 1; i <= N; ++i)
        iv.push_back(sys.U.next(i));
    Rational lo = sys.eps, hi = 1 - sys.eps;
    bool moved = true;
    while (moved && lo < hi) {
        moved = false;
        for (const auto& [a, b] : iv) {
            if (a < lo && lo < b) {
                lo = b;
                moved = true;
            }
            if (a < hi && hi < b) {
                hi = a;
                moved = true;
            }
        }
    }
    return {lo, rmax(lo, hi)};
}

}  // namespace detail

// localize_invariant on the budget-N truncation for each N. The staircase
// ball is centred between tau_N and the known cap and has radius gap/2 +
// 5 tol / 4, so it contains every Dirac on [tau_N, cap]; all of them are
// invariant for T_N, which forces the surviving diameter above the gap.
inline DemoReport demo_nonconvergence(const DemoSystem& system, const Rational& tol,
                                      const std::vector<unsigned long>& budgets, DemoOptions opt = {})
{
    if (tol <= 0)
        throw UsageError("demo: tol must be positive");
    DemoReport rep;
    Rational K = pow2(static_cast<long>(opt.max_level) + 2);  // caps inactive: Diracs allowed
    for (unsigned long N : budgets) {
        DemoRow row;
        row.N = N;
        LocalizeRequest req;
        req.reg = RegularityClass{1, K, {}};
        req.tol = tol;
        req.min_level = opt.min_level;
        req.max_level = opt.max_level;
        req.budget = opt.lp_budget;
        if (auto* st = std::get_if<StaircaseSystem>(&system)) {
            Rational tN = st->taus.next(N);
            row.gap = rmax(Rational(0), st->tau_upper - tN);
            req.map = staircase_map(st->taus, static_cast<unsigned>(N));
            // Ball on the attracting side: it holds delta_x for x in [tau_N, cap + tol/4].
            req.isolating = {Measure(dirac(Space::unit_interval(), rmax(Rational(0), tN - tol))),
                             row.gap + 5 * tol / 4};
        } else {
            const auto& cs = std::get<CircleSystem>(system);
            RatInterval hull = detail::circle_fixed_hull(cs, N);
            row.gap = hull.width();
            req.map = circle_gap_map(cs.U, cs.eps, static_cast<unsigned>(N));
            req.isolating = {Measure(uniform_histogram(Space::circle(), 0)), Rational(1, 2)};
        }
        LocalizeReport lr = localize_invariant(req);
        row.status = lr.status;
        row.result = lr.result;
        row.box = lr.box;
        if (!lr.trace.empty()) {
            row.diameter = lr.trace.back().diameter;
            row.count = lr.trace.back().count;
        }
        if (row.diameter < rep.c * row.gap)
            rep.bound_holds = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// Lower bound of the mass every measure in the CDF box gives to the open
// ball B: cells strictly inside B carry at least lo_j - hi_i.
inline Rational box_ball_mass(const CdfBox& box, const Space& s, const IdealBall& B)
{
    const std::size_t n = box.lo.size() - 1;
    const Rational w = pow2(-static_cast<long>(box.level));
    const Rational c = B.center.x(), r = B.radius;
    Rational best = 0;
    auto run_mass = [&](long i, long j) -> Rational {  // cells [i, j), i <= j, may wrap on the circle
        long nn = static_cast<long>(n);
        if (j - i >= nn)
            return Rational(1);
        if (i >= 0 && j <= nn)
            return rmax(Rational(0), box.lo[j] - box.hi[i]);
        if (!s.is_circle())
            return Rational(0);
        // wrap: [i + n, n) and [0, j) or [i, n) and [0, j - n)
        if (i < 0)
            return rmax(Rational(0), (1 - box.hi[i + nn]) + box.lo[j]);
        return rmax(Rational(0), (1 - box.hi[i]) + box.lo[j - nn]);
    };
    // Cells [k w, (k+1) w) inside (c - r, c + r): k from first to last - 1.
    Integer first = floor_int((c - r) / w) + 1, last = floor_int((c + r) / w);
    if (!s.is_circle()) {
        if (first < 0)
            first = 0;
        if (last > Integer(static_cast<unsigned long>(n)))
            last = Integer(static_cast<unsigned long>(n));
    }
    if (last > first)
        best = run_mass(first.get_si(), last.get_si());
    return best;
}

// Support point common to every measure of a CDF box; Unresolved once no
// ball of the next radius is certified to carry mass for all of them.
inline CRealOracle box_support_point(const CdfBox& box, const Space& s, Budget b)
{
    BallMassOracle mass = [box, s](const IdealBall& B) { return box_ball_mass(box, s, B); };
    return support_point(std::move(mass), s, b);
}

}  // namespace invmeas
