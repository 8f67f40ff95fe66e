#pragma once

#include "wasserstein.hpp"

#include <deque>
#include <limits>

namespace invmeas {

// Exact transportation problem: min Σ c_ij x_ij with row sums a, column sums
// b, x >= 0. Solved by the transportation simplex over rationals (north-west
// corner start, MODI potentials, stepping-stone pivots) and certified by
// checking primal feasibility, dual feasibility and equal objective values.
struct TransportSolution {
    Rational cost;
    std::vector<std::vector<Rational>> flow;
    std::vector<Rational> u;  // row potentials
    std::vector<Rational> v;  // column potentials
    std::size_t pivots = 0;
};

namespace detail {

struct BasisCell {
    std::size_t i, j;
};

class TransportSimplex {
public:
    TransportSimplex(std::vector<Rational> a, std::vector<Rational> b, std::vector<std::vector<Rational>> c)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), m_(a_.size()), n_(b_.size())
    {
        x_.assign(m_, std::vector<Rational>(n_, Rational(0)));
        basic_.assign(m_, std::vector<char>(n_, 0));
    }

    TransportSolution solve()
    {
        north_west();
        std::size_t pivots = 0;
        const std::size_t bland_after = 50 * (m_ + n_);
        for (;;) {
            potentials();
            // Entering cell: most negative reduced cost, or the first negative
            // one (Bland) once many pivots suggest degenerate cycling.
            bool found = false;
            std::size_t ei = 0, ej = 0;
            Rational best = 0;
            for (std::size_t i = 0; i < m_ && !(found && pivots > bland_after); ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    if (basic_[i][j])
                        continue;
                    Rational r = c_[i][j] - u_[i] - v_[j];
                    if (r < best) {
                        best = r;
                        ei = i;
                        ej = j;
                        found = true;
                        if (pivots > bland_after)
                            break;
                    }
                }
            if (!found)
                break;
            pivot(ei, ej);
            ++pivots;
        }
        TransportSolution s;
        s.flow = x_;
        s.u = u_;
        s.v = v_;
        s.pivots = pivots;
        s.cost = 0;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (x_[i][j] != 0)
                    s.cost += c_[i][j] * x_[i][j];
        certify(s);
        return s;
    }

private:
    void north_west()
    {
        std::vector<Rational> ra = a_, rb = b_;
        std::size_t i = 0, j = 0;
        while (i < m_ && j < n_) {
            Rational q = rmin(ra[i], rb[j]);
            x_[i][j] = q;
            basic_[i][j] = 1;
            cells_.push_back({i, j});
            ra[i] -= q;
            rb[j] -= q;
            // Exactly one index advances per step (except at the very end),
            // which yields a spanning tree of m + n - 1 cells.
            if (i + 1 == m_ && j + 1 == n_)
                break;
            if (ra[i] == 0 && i + 1 < m_)
                ++i;
            else
                ++j;
        }
    }

    void potentials()
    {
        u_.assign(m_, Rational(0));
        v_.assign(n_, Rational(0));
        std::vector<char> su(m_, 0), sv(n_, 0);
        std::vector<std::vector<std::size_t>> row_cells(m_), col_cells(n_);
        for (const auto& c : cells_) {
            row_cells[c.i].push_back(c.j);
            col_cells[c.j].push_back(c.i);
        }
        std::deque<std::pair<bool, std::size_t>> q;  // (is_row, index)
        su[0] = 1;
        q.push_back({true, 0});
        while (!q.empty()) {
            auto [is_row, k] = q.front();
            q.pop_front();
            if (is_row) {
                for (auto j : row_cells[k])
                    if (!sv[j]) {
                        v_[j] = c_[k][j] - u_[k];
                        sv[j] = 1;
                        q.push_back({false, j});
                    }
            } else {
                for (auto i : col_cells[k])
                    if (!su[i]) {
                        u_[i] = c_[i][k] - v_[k];
                        su[i] = 1;
                        q.push_back({true, i});
                    }
            }
        }
    }

    // Path in the basis tree from row ei to column ej, closed by the entering cell.
    std::vector<BasisCell> cycle(std::size_t ei, std::size_t ej) const
    {
        // Nodes: rows 0..m-1, columns m..m+n-1.
        std::size_t N = m_ + n_;
        std::vector<std::vector<std::size_t>> adj(N);
        for (const auto& c : cells_) {
            adj[c.i].push_back(m_ + c.j);
            adj[m_ + c.j].push_back(c.i);
        }
        std::vector<std::size_t> parent(N, std::numeric_limits<std::size_t>::max());
        std::deque<std::size_t> q{ei};
        parent[ei] = ei;
        while (!q.empty()) {
            std::size_t k = q.front();
            q.pop_front();
            if (k == m_ + ej)
                break;
            for (auto nb : adj[k])
                if (parent[nb] == std::numeric_limits<std::size_t>::max()) {
                    parent[nb] = k;
                    q.push_back(nb);
                }
        }
        std::vector<BasisCell> path{{ei, ej}};
        std::size_t k = m_ + ej;
        while (k != ei) {
            std::size_t p = parent[k];
            if (k >= m_)
                path.push_back({p, k - m_});
            else
                path.push_back({k, p - m_});
            k = p;
        }
        return path;
    }

    void pivot(std::size_t ei, std::size_t ej)
    {
        auto path = cycle(ei, ej);
        // path[0] is the entering cell (+); signs alternate along the cycle.
        Rational theta;
        std::size_t leave = 0;
        bool have = false;
        for (std::size_t k = 1; k < path.size(); k += 2) {
            const Rational& f = x_[path[k].i][path[k].j];
            if (!have || f < theta) {
                theta = f;
                leave = k;
                have = true;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            auto& f = x_[path[k].i][path[k].j];
            if (k % 2 == 0)
                f += theta;
            else
                f -= theta;
        }
        basic_[ei][ej] = 1;
        basic_[path[leave].i][path[leave].j] = 0;
        x_[path[leave].i][path[leave].j] = 0;
        for (auto& c : cells_)
            if (c.i == path[leave].i && c.j == path[leave].j) {
                c = {ei, ej};
                break;
            }
    }

    void certify(const TransportSolution& s) const
    {
        Rational dual = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            Rational row = 0;
            for (std::size_t j = 0; j < n_; ++j) {
                const Rational& f = s.flow[i][j];
                if (f < 0)
                    throw Error("transport certificate: negative flow");
                Rational r = c_[i][j] - s.u[i] - s.v[j];
                if (r < 0)
                    throw Error("transport certificate: dual infeasible");
                if (f > 0 && r != 0)
                    throw Error("transport certificate: complementary slackness violated");
                row += f;
            }
            if (row != a_[i])
                throw Error("transport certificate: row sum mismatch");
            dual += s.u[i] * a_[i];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            Rational col = 0;
            for (std::size_t i = 0; i < m_; ++i)
                col += s.flow[i][j];
            if (col != b_[j])
                throw Error("transport certificate: column sum mismatch");
            dual += s.v[j] * b_[j];
        }
        if (dual != s.cost)
            throw Error("transport certificate: primal and dual objectives differ");
    }

    std::vector<Rational> a_, b_;
    std::vector<std::vector<Rational>> c_;
    std::size_t m_, n_;
    std::vector<std::vector<Rational>> x_;
    std::vector<std::vector<char>> basic_;
    std::vector<BasisCell> cells_;
    std::vector<Rational> u_, v_;
};

}  // namespace detail

inline TransportSolution solve_transport(std::vector<Rational> a, std::vector<Rational> b,
                                         std::vector<std::vector<Rational>> cost)
{
    if (a.empty() || b.empty())
        throw UsageError("transport problem needs nonempty supplies and demands");
    Rational sa = 0, sb = 0;
    for (const auto& x : a)
        sa += x;
    for (const auto& x : b)
        sb += x;
    if (sa != sb)
        throw UsageError("transport problem is unbalanced");
    return detail::TransportSimplex(std::move(a), std::move(b), std::move(cost)).solve();
}

// Exact optimal transport cost between finitely supported measures with the
// ground metric of their space.
inline TransportSolution w1_lp_solution(const FinSupportMeasure& mu, const FinSupportMeasure& nu)
{
    if (!(mu.space == nu.space))
        throw UsageError("w1_lp_oracle: measures on different spaces");
    std::vector<Rational> a, b;
    for (const auto& at : mu.atoms)
        a.push_back(at.mass);
    for (const auto& at : nu.atoms)
        b.push_back(at.mass);
    std::vector<std::vector<Rational>> c(a.size(), std::vector<Rational>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i][j] = factor_distance(mu.space, mu.atoms[i].pos, nu.atoms[j].pos);
    return solve_transport(std::move(a), std::move(b), std::move(c));
}

inline Rational w1_lp_oracle(const FinSupportMeasure& mu, const FinSupportMeasure& nu)
{
    return w1_lp_solution(mu, nu).cost;
}

namespace detail {

// Uniform mass on [lo, hi] (a point when lo == hi).
struct Piece {
    Rational lo, hi, mass;
};

// Pieces of a line measure cut at the given cumulative-mass levels, so that
// the k-th pieces of two measures carry equal mass.
inline std::vector<Piece> quantile_pieces(const Measure& m, const std::vector<Rational>& levels)
{
    std::vector<Piece> raw;
    if (auto* a = std::get_if<FinSupportMeasure>(&m)) {
        for (const auto& at : a->atoms)
            raw.push_back({at.pos, at.pos, at.mass});
    } else {
        const auto& h = std::get<HistogramMeasure>(m);
        Rational w = h.width();
        for (std::size_t k = 0; k < h.size(); ++k)
            if (h.mass[k] > 0)
                raw.push_back({Rational(k) * w, Rational(k + 1) * w, h.mass[k]});
    }
    std::vector<Piece> out;
    Rational acc = 0;
    std::size_t li = 0;
    for (const auto& p : raw) {
        Rational start = acc, end = acc + p.mass;
        Rational cur = start;
        while (li < levels.size() && levels[li] <= start)
            ++li;
        std::size_t lj = li;
        while (cur < end) {
            Rational next = (lj < levels.size() && levels[lj] < end) ? levels[lj] : end;
            if (lj < levels.size() && levels[lj] < end)
                ++lj;
            Rational f0 = (cur - start) / p.mass, f1 = (next - start) / p.mass;
            Rational len = p.hi - p.lo;
            out.push_back({p.lo + f0 * len, p.lo + f1 * len, next - cur});
            cur = next;
        }
        acc = end;
    }
    return out;
}

// Cost per unit mass of the affine (order-preserving) coupling of the
// uniform laws on two intervals.
inline Rational affine_coupling_cost(const Piece& p, const Piece& q)
{
    return abs_affine_integral(Rational(1), p.lo - q.lo, p.hi - q.hi);
}

}  // namespace detail

// Transport LP between two line measures (atoms or histograms). Each measure
// is cut into pieces at the union of both cumulative-mass level sets; any
// feasible plan of the piece LP (priced with affine couplings) is a coupling
// of the two measures, and the order-preserving plan is feasible, so the LP
// optimum is exactly W1. Certified as in solve_transport.
inline Rational w1_lp_oracle_line(const Measure& mu, const Measure& nu)
{
    if (space_of(mu).kind != Space::Kind::UnitInterval || space_of(nu).kind != Space::Kind::UnitInterval)
        throw UsageError("w1_lp_oracle_line: interval measures only");
    if (auto* a = std::get_if<FinSupportMeasure>(&mu))
        if (auto* b = std::get_if<FinSupportMeasure>(&nu))
            return w1_lp_oracle(*a, *b);
    std::vector<Rational> levels;
    auto collect = [&levels](const Measure& m) {
        Rational acc = 0;
        if (auto* a = std::get_if<FinSupportMeasure>(&m)) {
            for (const auto& at : a->atoms)
                levels.push_back(acc += at.mass);
        } else {
            for (const auto& x : std::get<HistogramMeasure>(m).mass)
                if (x > 0)
                    levels.push_back(acc += x);
        }
    };
    collect(mu);
    collect(nu);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto P = detail::quantile_pieces(mu, levels);
    auto Q = detail::quantile_pieces(nu, levels);
    std::vector<Rational> a, b;
    for (const auto& p : P)
        a.push_back(p.mass);
    for (const auto& q : Q)
        b.push_back(q.mass);
    std::vector<std::vector<Rational>> c(P.size(), std::vector<Rational>(Q.size()));
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < Q.size(); ++j)
            c[i][j] = detail::affine_coupling_cost(P[i], Q[j]);
    return solve_transport(std::move(a), std::move(b), std::move(c)).cost;
}

}  // namespace invmeas
