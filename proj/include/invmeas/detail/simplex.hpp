#pragma once

// Dense bounded-variable primal simplex in double precision. Only used to
// find good dual multipliers; every bound the library reports is recomputed
// from those multipliers in exact arithmetic by the caller.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace invmeas::detail {

enum class RowType { Le, Eq };

// min c.x  s.t.  A x (<= | =) b,  lo <= x <= hi, all structural bounds finite.
struct DenseLp {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;  // row-major rows x cols
    std::vector<RowType> type;
    std::vector<double> b, lo, hi;

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

enum class LpStatus { Optimal, Infeasible, IterationLimit };

class DenseSimplex {
public:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    explicit DenseSimplex(DenseLp lp) : lp_(std::move(lp))
    {
        m_ = lp_.rows;
        n_ = lp_.cols;
        N_ = n_ + 2 * m_;
        lo_.assign(N_, 0.0);
        hi_.assign(N_, kInf);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lp_.lo[j];
            hi_[j] = lp_.hi[j];
        }
        for (std::size_t i = 0; i < m_; ++i)
            if (lp_.type[i] == RowType::Eq)
                hi_[n_ + i] = 0.0;
        sigma_.assign(m_, 1.0);
        x_.assign(N_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            x_[j] = lo_[j];
        basis_.assign(m_, 0);
        is_basic_.assign(N_, false);
        dead_.assign(N_, false);
        t_.assign(m_ * N_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double r = lp_.b[i];
            for (std::size_t j = 0; j < n_; ++j)
                r -= lp_.at(i, j) * x_[j];
            bool slack_ok = lp_.type[i] == RowType::Le ? r >= 0 : false;
            std::size_t col;
            double s = 1.0;
            if (slack_ok) {
                col = n_ + i;
            } else {
                col = n_ + m_ + i;
                sigma_[i] = r >= 0 ? 1.0 : -1.0;
                s = sigma_[i];
            }
            // Row i of B^-1 [A | I | diag(sigma)] with B = diag(1 or sigma_i).
            for (std::size_t j = 0; j < n_; ++j)
                T(i, j) = lp_.at(i, j) / s;
            T(i, n_ + i) = 1.0 / s;
            T(i, n_ + m_ + i) = sigma_[i] / s;
            basis_[i] = col;
            is_basic_[col] = true;
            x_[col] = r / s;
        }
    }

    // Phase I. Returns false when the artificial sum cannot be driven to zero;
    // row_duals() then holds Farkas-style multipliers of the phase I optimum.
    LpStatus phase1(std::size_t max_pivots = 200000)
    {
        std::vector<double> c(N_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            c[n_ + m_ + i] = 1.0;
        LpStatus st = run(c, max_pivots);
        if (st != LpStatus::Optimal)
            return st;
        double infeas = 0;
        for (std::size_t i = 0; i < m_; ++i)
            infeas += x_[n_ + m_ + i];
        if (infeas > 1e-9)
            return LpStatus::Infeasible;
        for (std::size_t i = 0; i < m_; ++i)
            hi_[n_ + m_ + i] = 0.0;
        drive_out_artificials();
        for (std::size_t i = 0; i < m_; ++i)
            dead_[n_ + m_ + i] = !is_basic_[n_ + m_ + i];
        return LpStatus::Optimal;
    }

    // Phase II from the current (feasible) basis; c has one entry per
    // structural column.
    LpStatus solve(const std::vector<double>& c, std::size_t max_pivots = 200000)
    {
        if (pivots_since_refactor_ > 4 * m_ + 500)
            refactor();
        std::vector<double> full(N_, 0.0);
        std::copy(c.begin(), c.end(), full.begin());
        return run(full, max_pivots);
    }

    double objective() const { return obj_; }
    const std::vector<double>& x() const { return x_; }
    std::size_t pivots() const { return total_pivots_; }

    // Multipliers lambda_i of the last solve in the convention
    // r = c + A^T lambda, lambda >= 0 on <= rows.
    std::vector<double> row_duals() const
    {
        std::vector<double> lam(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            lam[i] = d_[n_ + i];
            if (lp_.type[i] == RowType::Le)
                lam[i] = std::max(0.0, lam[i]);
        }
        return lam;
    }

private:
    double& T(std::size_t i, std::size_t j) { return t_[i * N_ + j]; }
    double T(std::size_t i, std::size_t j) const { return t_[i * N_ + j]; }

    // Original column j of [A | I | diag(sigma)].
    double orig(std::size_t i, std::size_t j) const
    {
        if (j < n_)
            return lp_.at(i, j);
        if (j < n_ + m_)
            return j - n_ == i ? 1.0 : 0.0;
        return j - n_ - m_ == i ? sigma_[i] : 0.0;
    }

    void compute_reduced_costs(const std::vector<double>& c)
    {
        d_ = c;
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = c[basis_[i]];
            if (cb == 0.0)
                continue;
            const double* row = &t_[i * N_];
            for (std::size_t j = 0; j < N_; ++j)
                d_[j] -= cb * row[j];
        }
        obj_ = 0;
        for (std::size_t j = 0; j < N_; ++j)
            obj_ += c[j] * x_[j];
    }

    LpStatus run(const std::vector<double>& c, std::size_t max_pivots)
    {
        compute_reduced_costs(c);
        const double dtol = 1e-10;
        std::size_t degenerate = 0;
        for (std::size_t it = 0; it < max_pivots; ++it) {
            bool bland = degenerate > 50;
            std::size_t q = N_;
            double best = 0;
            int dir = 0;
            for (std::size_t j = 0; j < N_; ++j) {
                if (is_basic_[j] || hi_[j] <= lo_[j])
                    continue;
                double dj = d_[j];
                int dj_dir = 0;
                if (x_[j] <= lo_[j] && dj < -dtol)
                    dj_dir = 1;
                else if (x_[j] >= hi_[j] && dj > dtol)
                    dj_dir = -1;
                if (!dj_dir)
                    continue;
                if (bland) {
                    q = j;
                    dir = dj_dir;
                    break;
                }
                if (std::abs(dj) > best) {
                    best = std::abs(dj);
                    q = j;
                    dir = dj_dir;
                }
            }
            if (q == N_) {
                obj_ = 0;
                for (std::size_t j = 0; j < N_; ++j)
                    obj_ += c[j] * x_[j];
                return LpStatus::Optimal;
            }
            // Ratio test (two-pass Harris with a small tolerance).
            const double ptol = 1e-9, ftol = 1e-9;
            double theta_max = hi_[q] - lo_[q];
            for (std::size_t i = 0; i < m_; ++i) {
                double alpha = dir * T(i, q);
                std::size_t bv = basis_[i];
                if (alpha > ptol)
                    theta_max = std::min(theta_max, (x_[bv] - lo_[bv] + ftol) / alpha);
                else if (alpha < -ptol && hi_[bv] < kInf)
                    theta_max = std::min(theta_max, (hi_[bv] - x_[bv] + ftol) / -alpha);
            }
            std::size_t r = m_;
            double big = 0, theta = hi_[q] - lo_[q];
            bool flip = theta <= theta_max;
            if (!flip) {
                for (std::size_t i = 0; i < m_; ++i) {
                    double alpha = dir * T(i, q);
                    std::size_t bv = basis_[i];
                    double lim;
                    if (alpha > ptol)
                        lim = (x_[bv] - lo_[bv]) / alpha;
                    else if (alpha < -ptol && hi_[bv] < kInf)
                        lim = (hi_[bv] - x_[bv]) / -alpha;
                    else
                        continue;
                    if (lim <= theta_max && std::abs(alpha) > big) {
                        big = std::abs(alpha);
                        r = i;
                        theta = std::max(0.0, lim);
                    }
                }
                if (r == m_)
                    return LpStatus::IterationLimit;  // numerically unbounded; cannot happen with finite bounds
            }
            degenerate = theta <= 1e-12 ? degenerate + 1 : 0;
            double step = dir * theta;
            for (std::size_t i = 0; i < m_; ++i)
                x_[basis_[i]] -= step * T(i, q);
            x_[q] += step;
            obj_ += d_[q] * step;
            if (flip) {
                x_[q] = dir > 0 ? hi_[q] : lo_[q];
                continue;
            }
            std::size_t leave = basis_[r];
            x_[leave] = dir * T(r, q) > 0 ? lo_[leave] : hi_[leave];
            pivot(r, q);
        }
        return LpStatus::IterationLimit;
    }

    void pivot(std::size_t r, std::size_t q)
    {
        double* prow = &t_[r * N_];
        double pv = prow[q];
        nz_.clear();
        for (std::size_t j = 0; j < N_; ++j) {
            if (prow[j] == 0.0 || dead_[j])
                continue;
            prow[j] /= pv;
            if (std::abs(prow[j]) < 1e-14)
                prow[j] = 0.0;
            else
                nz_.push_back(j);
        }
        prow[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r)
                continue;
            double f = T(i, q);
            if (f == 0.0)
                continue;
            double* row = &t_[i * N_];
            for (std::size_t j : nz_)
                row[j] -= f * prow[j];
            row[q] = 0.0;
        }
        double dq = d_[q];
        if (dq != 0.0) {
            for (std::size_t j : nz_)
                d_[j] -= dq * prow[j];
            d_[q] = 0.0;
        }
        is_basic_[basis_[r]] = false;
        is_basic_[q] = true;
        basis_[r] = q;
        ++total_pivots_;
        ++pivots_since_refactor_;
    }

    void drive_out_artificials()
    {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_ + m_)
                continue;
            std::size_t q = N_;
            double best = 1e-7;
            for (std::size_t j = 0; j < n_ + m_; ++j)
                if (!is_basic_[j] && hi_[j] > lo_[j] && std::abs(T(i, j)) > best) {
                    best = std::abs(T(i, j));
                    q = j;
                }
            if (q == N_)
                continue;  // redundant row: the artificial stays basic, fixed at 0
            x_[basis_[i]] = 0.0;
            pivot(i, q);
        }
    }

    // Recompute the tableau and basic values from the original data.
    void refactor()
    {
        Eigen::MatrixXd B(m_, m_);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t k = 0; k < m_; ++k)
                B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = orig(i, basis_[k]);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Eigen::MatrixXd full(m_, N_);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < N_; ++j)
                full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = orig(i, j);
        Eigen::MatrixXd tab = lu.solve(full);
        Eigen::VectorXd rhs(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            double r = lp_.b[i];
            for (std::size_t j = 0; j < N_; ++j)
                if (!is_basic_[j] && x_[j] != 0.0)
                    r -= orig(i, j) * x_[j];
            rhs(static_cast<Eigen::Index>(i)) = r;
        }
        Eigen::VectorXd xb = lu.solve(rhs);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < N_; ++j)
                T(i, j) = tab(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            x_[basis_[i]] = std::clamp(xb(static_cast<Eigen::Index>(i)), lo_[basis_[i]], hi_[basis_[i]]);
        }
        pivots_since_refactor_ = 0;
    }

    DenseLp lp_;
    std::size_t m_ = 0, n_ = 0, N_ = 0;
    std::vector<double> lo_, hi_, sigma_, x_, d_, t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> is_basic_;
    std::vector<bool> dead_;  // nonbasic artificials after phase I; never updated again
    std::vector<std::size_t> nz_;
    double obj_ = 0;
    std::size_t total_pivots_ = 0, pivots_since_refactor_ = 0;
};

}  // namespace invmeas::detail
