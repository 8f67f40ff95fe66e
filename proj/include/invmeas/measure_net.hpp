#pragma once

#include "measure.hpp"

#include <functional>

namespace invmeas {

inline constexpr unsigned long kDefaultNetCap = 1000000;

// Support grid N_r = {j/n} with n = ceil(1/r).
inline std::vector<Rational> net_support(const Space& s, const Rational& r)
{
    if (r <= 0)
        throw UsageError("measure_net: r must be positive");
    check_measure_space(s);
    unsigned long n = ceil_int(Rational(1) / r).get_ui();
    std::vector<Rational> pts;
    unsigned long count = s.is_circle() ? n : n + 1;
    for (unsigned long j = 0; j < count; ++j)
        pts.push_back(make_rational(static_cast<long>(j), static_cast<long>(n)));
    return pts;
}

inline Integer measure_net_size(const Space& s, const Rational& r)
{
    auto pts = net_support(s, r);
    unsigned long n = ceil_int(Rational(1) / r).get_ui();
    Integer c;
    mpz_bin_uiui(c.get_mpz_t(), n + pts.size() - 1, pts.size() - 1);
    return c;
}

// All measures Σ k_i δ_{x_i} with x_i in N_r and k_i in {0, 1/n, ..., 1}
// summing to 1, in lexicographic order of the weight vectors (largest weight
// on the first point first).
inline std::vector<FinSupportMeasure> measure_net(const Space& s, const Rational& r,
                                                  unsigned long cap = kDefaultNetCap)
{
    auto pts = net_support(s, r);
    Integer size = measure_net_size(s, r);
    if (size > Integer(cap))
        throw UsageError("measure_net: " + size.get_str() + " measures exceed the cap of " + std::to_string(cap) +
                         "; use a larger r");
    long n = ceil_int(Rational(1) / r).get_si();
    std::vector<FinSupportMeasure> out;
    out.reserve(size.get_ui());
    std::vector<long> k(pts.size(), 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i + 1 == pts.size()) {
            k[i] = left;
            FinSupportMeasure m;
            m.space = s;
            for (std::size_t t = 0; t < pts.size(); ++t)
                if (k[t] > 0)
                    m.atoms.push_back({pts[t], make_rational(k[t], n)});
            out.push_back(std::move(m));
            return;
        }
        for (long v = left; v >= 0; --v) {
            k[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, n);
    return out;
}

}  // namespace invmeas
