#pragma once

#include "map_model.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>

namespace invmeas {

// A compact subset of [0,1] or the circle covered by closed dyadic cells
// [k 2^-level, (k+1) 2^-level]. `refine`, when present, returns a tighter
// enclosure at a finer level whose cells lie inside these.
struct CompactEnclosure {
    Space space = Space::unit_interval();
    unsigned level = 0;
    std::vector<std::uint64_t> cells;  // sorted, unique
    std::function<CompactEnclosure(unsigned)> refine;
    std::size_t fallback_cells = 0;    // cells whose image fell back to the whole space

    std::uint64_t cell_count() const { return std::uint64_t{1} << level; }
    Rational width() const { return pow2(-static_cast<long>(level)); }
    RatInterval cell(std::uint64_t k) const
    {
        Rational w = width();
        return {Rational(k) * w, Rational(k + 1) * w};
    }
    bool empty() const { return cells.empty(); }
};

inline constexpr unsigned kMaxEnclosureLevel = 30;

inline void check_enclosure_space(const Space& s)
{
    if (s.kind == Space::Kind::Product)
        throw UsageError("compact enclosures are one-dimensional");
}

inline CompactEnclosure full_enclosure(const Space& s, unsigned level)
{
    check_enclosure_space(s);
    if (level > kMaxEnclosureLevel)
        throw UsageError("enclosure level too fine");
    CompactEnclosure K;
    K.space = s;
    K.level = level;
    K.cells.resize(K.cell_count());
    for (std::uint64_t k = 0; k < K.cells.size(); ++k)
        K.cells[k] = k;
    return K;
}

// Cells at `level` meeting the closed interval [a, b] (a <= b, inside [0,1]).
// A nondegenerate interval selects the cells whose interior meets (a, b); a
// point selects the cell containing it plus its left neighbour when it sits on
// a boundary.
inline std::vector<std::uint64_t> cells_meeting(const RatInterval& I, unsigned level)
{
    std::uint64_t n = std::uint64_t{1} << level;
    Rational scale = pow2(level);
    auto clampk = [n](const Integer& k) -> std::uint64_t {
        if (k < 0)
            return 0;
        if (k >= Integer(static_cast<unsigned long>(n)))
            return n - 1;
        return k.get_ui();
    };
    std::vector<std::uint64_t> out;
    if (I.is_point()) {
        Rational t = I.lo * scale;
        Integer k = floor_int(t);
        if (Rational(k) == t && k > 0)
            out.push_back(clampk(k - 1));
        std::uint64_t kk = clampk(k);
        if (out.empty() || out.back() != kk)
            out.push_back(kk);
        return out;
    }
    std::uint64_t first = clampk(floor_int(I.lo * scale));
    std::uint64_t last = clampk(ceil_int(I.hi * scale) - 1);
    for (std::uint64_t k = first; k <= last; ++k)
        out.push_back(k);
    return out;
}

// Arcs of a circle lift interval reduced to [0,1].
inline std::vector<RatInterval> reduce_circle(const RatInterval& lift)
{
    if (lift.width() >= 1)
        return {RatInterval(0, 1)};
    Integer k = floor_int(lift.lo);
    Rational lo = lift.lo - Rational(k), hi = lift.hi - Rational(k);
    if (hi <= 1)
        return {RatInterval(lo, hi)};
    return {RatInterval(lo, Rational(1)), RatInterval(Rational(0), hi - 1)};
}

// Image enclosure pieces in [0,1] of an evaluator output.
inline std::vector<RatInterval> to_carrier(const Space& s, const RatInterval& img)
{
    if (s.is_circle())
        return reduce_circle(img);
    Rational lo = rmax(img.lo, Rational(0)), hi = rmin(img.hi, Rational(1));
    if (hi < lo)
        return {};
    return {RatInterval(lo, hi)};
}

namespace detail {

// Largest distance from c to a point of the closed cell, in the space metric.
inline Rational max_distance_to_cell(const Space& s, const Rational& c, const RatInterval& cell)
{
    if (s.is_circle()) {
        Rational anti = frac(c + Rational(1, 2));
        for (int shift = -1; shift <= 1; ++shift)
            if (cell.contains(anti + shift))
                return Rational(1, 2);
    }
    return rmax(factor_distance(s, c, cell.lo), factor_distance(s, c, cell.hi));
}

inline bool cell_in_open_ball(const Space& s, const RatInterval& cell, const IdealBall& b)
{
    return max_distance_to_cell(s, b.center.x(), cell) < b.radius;
}

// Merged open arcs/intervals of a finite ball list, as [lo, hi] pairs of
// their closures, on the line picture [0,1] (circle arcs split at 0).
inline std::vector<RatInterval> open_union(const Space& s, const std::vector<IdealBall>& balls)
{
    std::vector<RatInterval> parts;
    for (const auto& b : balls) {
        if (b.radius <= 0)
            continue;
        RatInterval span(b.center.x() - b.radius, b.center.x() + b.radius);
        if (s.is_circle()) {
            if (b.radius > Rational(1, 2)) {
                parts.emplace_back(Rational(-1), Rational(2));
                continue;
            }
            // Represent arcs as intervals on [-1, 2] so that wrap-around stays open.
            for (int shift = -1; shift <= 1; ++shift)
                parts.push_back(span + RatInterval(Rational(shift)));
        } else {
            parts.push_back(span);
        }
    }
    std::sort(parts.begin(), parts.end(), [](const RatInterval& a, const RatInterval& b) { return a.lo < b.lo; });
    std::vector<RatInterval> merged;
    for (const auto& p : parts) {
        // Open intervals (a,b) and (c,d) with c < b overlap; c == b leaves b uncovered.
        if (!merged.empty() && p.lo < merged.back().hi)
            merged.back().hi = rmax(merged.back().hi, p.hi);
        else
            merged.push_back(p);
    }
    return merged;
}

inline bool cell_in_union(const Space& s, const RatInterval& cell, const std::vector<RatInterval>& merged)
{
    for (const auto& m : merged) {
        bool inside = m.lo < cell.lo && cell.hi < m.hi;
        if (!s.is_circle()) {
            // On [0,1] the ends 0 and 1 only need to be covered from inside.
            inside = (m.lo < cell.lo || (cell.lo == 0 && m.lo < 0)) && (cell.hi < m.hi || (cell.hi == 1 && m.hi > 1));
        }
        if (inside)
            return true;
    }
    return false;
}

inline CompactEnclosure refine_to(const CompactEnclosure& K, unsigned level)
{
    if (level <= K.level)
        return K;
    if (K.refine)
        return K.refine(level);
    CompactEnclosure R;
    R.space = K.space;
    R.level = level;
    std::uint64_t f = std::uint64_t{1} << (level - K.level);
    R.cells.reserve(K.cells.size() * f);
    for (auto c : K.cells)
        for (std::uint64_t j = 0; j < f; ++j)
            R.cells.push_back(c * f + j);
    return R;
}

}  // namespace detail

// Semi-decides union(balls) ⊇ K: cells are refined (one level per budget
// step) and each closed cell must lie inside a single open ball, the exact
// form of the Lebesgue-number test.
inline Semi covers(const CompactEnclosure& K, const std::vector<IdealBall>& balls, Budget b)
{
    check_enclosure_space(K.space);
    std::vector<std::uint64_t> pending = K.cells;
    CompactEnclosure cur = K;
    for (unsigned long step = 0;; ++step) {
        std::vector<std::uint64_t> left;
        for (auto c : pending) {
            RatInterval cell = cur.cell(c);
            bool ok = std::any_of(balls.begin(), balls.end(),
                                  [&](const IdealBall& ball) { return detail::cell_in_open_ball(K.space, cell, ball); });
            if (!ok)
                left.push_back(c);
        }
        if (left.empty())
            return Semi::Yes;
        if (step >= b.steps || cur.level >= kMaxEnclosureLevel)
            return Semi::Unresolved;
        CompactEnclosure next = detail::refine_to(cur, cur.level + 1);
        std::set<std::uint64_t> parents(left.begin(), left.end());
        pending.clear();
        for (auto c : next.cells)
            if (parents.count(c >> 1))
                pending.push_back(c);
        cur = std::move(next);
    }
}

// K minus the union of the first b.steps enumerated balls of U. Only cells
// fully inside the (merged) open union are removed, so the result contains K∖U.
inline CompactEnclosure set_minus_open(const CompactEnclosure& K, const ReOpenSet& U, Budget b)
{
    check_enclosure_space(K.space);
    std::vector<IdealBall> balls;
    for (unsigned long i = 0; i < b.steps; ++i) {
        auto ball = U.ball_enum(i);
        if (!ball)
            break;
        balls.push_back(*ball);
    }
    auto merged = detail::open_union(K.space, balls);
    CompactEnclosure R;
    R.space = K.space;
    R.level = K.level;
    for (auto c : K.cells)
        if (!detail::cell_in_union(K.space, K.cell(c), merged))
            R.cells.push_back(c);
    if (K.refine) {
        auto parent = K.refine;
        R.refine = [parent, U, b](unsigned level) { return set_minus_open(parent(level), U, b); };
    }
    return R;
}

struct InfResult {
    Rational lower;     // certified lower bound of inf over union(cells)
    Rational upper;     // a value attained (within enclosure) at some point of K's cells
    bool tight = true;  // upper - lower <= 2^-n reached
};

// Branch and bound on cells: lower = min of interval lower ends over the
// current frontier, upper = min of f at cell midpoints.
inline InfResult inf_on_compact(const IntervalFn& f, const CompactEnclosure& K, unsigned n,
                                unsigned max_extra_levels = 24, std::size_t max_cells = 1u << 16)
{
    check_enclosure_space(K.space);
    if (K.cells.empty())
        throw UsageError("inf_on_compact: empty enclosure");
    Rational target = pow2(-static_cast<long>(n));
    struct Node {
        RatInterval cell;
        Rational lo;
    };
    std::vector<Node> frontier;
    Rational upper;
    bool have_upper = false;
    auto consider = [&](const RatInterval& cell) {
        Rational lo = f(cell).lo;
        Rational at_mid = f(RatInterval(cell.mid())).hi;
        if (!have_upper || at_mid < upper) {
            upper = at_mid;
            have_upper = true;
        }
        frontier.push_back({cell, lo});
    };
    for (auto c : K.cells)
        consider(K.cell(c));
    for (unsigned depth = 0;; ++depth) {
        Rational lower = frontier.front().lo;
        for (const auto& nd : frontier)
            lower = rmin(lower, nd.lo);
        if (upper - lower <= target)
            return {lower, upper, true};
        if (depth >= max_extra_levels || frontier.size() * 2 > max_cells)
            return {lower, upper, false};
        std::vector<Node> old;
        old.swap(frontier);
        for (const auto& nd : old) {
            if (nd.lo > upper)  // cannot hold the minimum
                continue;
            Rational m = nd.cell.mid();
            consider(RatInterval(nd.cell.lo, m));
            consider(RatInterval(m, nd.cell.hi));
        }
        if (frontier.empty())
            return {upper, upper, true};
    }
}

// Enclosure at K's level of T(K); cells are evaluated one by one so that
// evaluators only see cells, never long runs across D.
inline CompactEnclosure image_compact(const MapModel& T, const CompactEnclosure& K)
{
    check_enclosure_space(K.space);
    CompactEnclosure R;
    R.space = T.space;
    R.level = K.level;
    std::set<std::uint64_t> out;
    std::uint64_t n = K.cell_count();
    for (auto c : K.cells) {
        std::vector<RatInterval> parts;
        try {
            parts = to_carrier(T.space, T.eval(K.cell(c)));
        } catch (const std::exception&) {
            parts = {RatInterval(0, 1)};
            ++R.fallback_cells;
        }
        for (const auto& p : parts)
            for (auto k : cells_meeting(p, K.level))
                out.insert(k);
        if (out.size() == n)
            break;
    }
    R.cells.assign(out.begin(), out.end());
    return R;
}

inline CompactEnclosure intersect(const CompactEnclosure& A, const CompactEnclosure& B)
{
    if (A.level != B.level)
        throw Error("intersect: enclosures at different levels");
    CompactEnclosure R;
    R.space = A.space;
    R.level = A.level;
    std::set_intersection(A.cells.begin(), A.cells.end(), B.cells.begin(), B.cells.end(), std::back_inserter(R.cells));
    return R;
}

// Intersection of the first n_iter forward images of the whole space.
inline CompactEnclosure attractor_enclosure(const MapModel& T, const Space& s, unsigned n_iter, unsigned level)
{
    CompactEnclosure K = full_enclosure(s, level);
    for (unsigned i = 0; i < n_iter; ++i)
        K = intersect(K, image_compact(T, K));
    return K;
}

// Diameter of the cell union (line: hull length; circle: complement of the
// largest empty gap, capped at 1/2).
inline Rational enclosure_diameter(const CompactEnclosure& K)
{
    if (K.cells.empty())
        return 0;
    Rational w = K.width();
    if (!K.space.is_circle())
        return Rational(K.cells.back() - K.cells.front() + 1) * w;
    std::uint64_t n = K.cell_count();
    std::uint64_t gap = n - 1 - K.cells.back() + K.cells.front();  // wrap gap in cells
    for (std::size_t i = 1; i < K.cells.size(); ++i)
        gap = std::max<std::uint64_t>(gap, K.cells[i] - K.cells[i - 1] - 1);
    Rational span = 1 - Rational(gap) * w;
    return rmin(span, Rational(1, 2));
}

inline bool enclosure_contains(const CompactEnclosure& K, const Rational& x)
{
    for (auto k : cells_meeting(RatInterval(x), K.level))
        if (std::binary_search(K.cells.begin(), K.cells.end(), k) && K.cell(k).contains(x))
            return true;
    return false;
}

// A δ = 2^-j such that x, y in K with d(x,y) < δ have enclosure-verified
// d(T x, T y) < ε. Pairs closer than one cell lie in one cell or two adjacent
// cells, so it suffices to bound the image width of every such union.
inline Rational modulus_of_continuity(const MapModel& T, const CompactEnclosure& K, const Rational& eps,
                                      unsigned max_level = 24)
{
    check_enclosure_space(K.space);
    if (eps <= 0)
        throw UsageError("modulus_of_continuity: eps must be positive");
    if (K.cells.empty())
        return T.space.diameter();
    auto image_width = [&](const RatInterval& I) {
        RatInterval img = T.space.is_circle() ? eval_anywhere(T, I) : T.eval(I);
        return img.width();
    };
    {
        RatInterval all(K.cell(K.cells.front()).lo, K.cell(K.cells.back()).hi);
        if (image_width(all) < eps)
            return T.space.diameter();
    }
    for (unsigned j = std::max(1u, K.level); j <= max_level; ++j) {
        CompactEnclosure R = detail::refine_to(K, j);
        std::uint64_t n = R.cell_count();
        std::set<std::uint64_t> present(R.cells.begin(), R.cells.end());
        bool ok = true;
        Rational w = R.width();
        for (auto c : R.cells) {
            RatInterval cell = R.cell(c);
            if (image_width(cell) >= eps) {
                ok = false;
                break;
            }
            // The circle neighbour of the last cell is cell 0, reached by the lift.
            std::uint64_t nb = c + 1;
            if (nb == n) {
                if (!T.space.is_circle())
                    continue;
                nb = 0;
            }
            if (!present.count(nb))
                continue;
            RatInterval pair(cell.lo, cell.hi + w);
            if (image_width(pair) >= eps) {
                ok = false;
                break;
            }
        }
        if (ok)
            return pow2(-static_cast<long>(j));
    }
    throw Error("modulus_of_continuity: no positive delta certified (K may touch a discontinuity)");
}

// Nested-ball search for a point of a closed set F described by an
// enumerator of ideal balls meeting F (`meets(ball, budget_left)` returns Yes
// once a witness is found). Round k looks for a ball of radius 2^-k nested in
// the previous one; approx(n) returns the centre of round n + 1.
struct NestedBallSearch {
    std::function<Semi(const IdealBall&)> meets;
    Space space = Space::unit_interval();
    Budget budget;
};

inline std::vector<Rational> nested_centers(const NestedBallSearch& s, unsigned rounds, bool* exhausted)
{
    std::vector<Rational> centers;
    Rational c(1, 2);
    unsigned long used = 0;
    *exhausted = false;
    for (unsigned k = 1; k <= rounds; ++k) {
        Rational h = pow2(-static_cast<long>(k));
        bool found = false;
        for (int j : {0, -1, 1, -2, 2}) {
            Rational cand = c + Rational(j) * h / 2;
            // Clamping keeps the child nested: |clamped - c| <= |cand - c|.
            if (s.space.is_circle())
                cand = frac(cand);
            else
                cand = rmin(rmax(cand, Rational(0)), Rational(1));
            if (used >= s.budget.steps) {
                *exhausted = true;
                return centers;
            }
            ++used;
            if (s.meets({IdealPoint(cand), h}) == Semi::Yes) {
                c = cand;
                found = true;
                break;
            }
        }
        if (!found) {
            *exhausted = true;
            return centers;
        }
        centers.push_back(c);
    }
    return centers;
}

// Point of a closed set F. Every returned approximation q_n satisfies
// |q_n - x| <= 2^-(n+1) and B(q_n, 2^-(n+1)) meets F.
inline CRealOracle point_in_closed(NestedBallSearch s)
{
    return {[s = std::move(s)](unsigned n) -> std::optional<Rational> {
        bool exhausted = false;
        auto cs = nested_centers(s, n + 1, &exhausted);
        if (cs.size() < n + 1)
            return std::nullopt;
        return cs.back();
    }};
}

}  // namespace invmeas
