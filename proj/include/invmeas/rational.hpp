#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace invmeas {

using Integer = mpz_class;
using Rational = mpq_class;  // canonical (lowest terms, den > 0) after every op

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: unknown names, malformed rationals, inconsistent parameters.
class UsageError : public Error {
public:
    using Error::Error;
};

inline Rational make_rational(long num, long den = 1)
{
    if (den == 0)
        throw UsageError("zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational pow2(long e)
{
    Rational q(1);
    if (e >= 0)
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    else
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    return q;
}

inline Rational rabs(const Rational& q) { return q < 0 ? Rational(-q) : q; }
inline const Rational& rmin(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

inline Integer floor_int(const Rational& q)
{
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_int(const Rational& q)
{
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Rational floor_dyadic(const Rational& q, long bits)
{
    return Rational(floor_int(q * pow2(bits))) * pow2(-bits);
}

inline Rational ceil_dyadic(const Rational& q, long bits)
{
    return Rational(ceil_int(q * pow2(bits))) * pow2(-bits);
}

// Fractional part in [0,1).
inline Rational frac(const Rational& q) { return q - Rational(floor_int(q)); }

inline std::string to_string(const Rational& q)
{
    if (q.get_den() == 1)
        return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

// Always "p/q", also for integers; used by the serialized formats.
inline std::string to_pq(const Rational& q)
{
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace detail {

inline Integer parse_integer(std::string_view s, std::string_view whole)
{
    if (s.empty())
        throw UsageError("malformed rational: '" + std::string(whole) + "'");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size())
        throw UsageError("malformed rational: '" + std::string(whole) + "'");
    for (std::size_t k = i; k < s.size(); ++k)
        if (s[k] < '0' || s[k] > '9')
            throw UsageError("malformed rational: '" + std::string(whole) + "'");
    std::string t(s.substr(s[0] == '+' ? 1 : 0));
    return Integer(t, 10);
}

}  // namespace detail

// Parses "p", "p/q" exactly. Decimals are refused unless prefixed by '~';
// "~d.ddd" is converted to the exact rational value of the decimal literal and
// the returned `approximate` flag lets callers widen the value outward.
inline Rational parse_rational(std::string_view s, bool* approximate = nullptr)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    if (approximate)
        *approximate = false;
    if (!s.empty() && s.front() == '~') {
        std::string_view d = s.substr(1);
        bool neg = !d.empty() && d.front() == '-';
        if (neg || (!d.empty() && d.front() == '+'))
            d.remove_prefix(1);
        auto dot = d.find('.');
        std::string digits(d.substr(0, dot));
        std::string fracpart = dot == std::string_view::npos ? "" : std::string(d.substr(dot + 1));
        if (digits.empty())
            digits = "0";
        Integer ip = detail::parse_integer(digits, s);
        Rational q(ip);
        if (!fracpart.empty()) {
            Integer fp = detail::parse_integer(fracpart, s);
            Integer scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, fracpart.size());
            Rational f(fp, scale);
            f.canonicalize();
            q += f;
        }
        q.canonicalize();
        if (neg)
            q = -q;
        if (approximate)
            *approximate = true;
        return q;
    }
    if (s.find('.') != std::string_view::npos || s.find('e') != std::string_view::npos)
        throw UsageError("decimal literal '" + std::string(s) +
                         "' needs an explicit '~' prefix; use p/q for exact values");
    auto slash = s.find('/');
    if (slash == std::string_view::npos)
        return Rational(detail::parse_integer(s, s));
    Integer num = detail::parse_integer(s.substr(0, slash), s);
    Integer den = detail::parse_integer(s.substr(slash + 1), s);
    if (den == 0)
        throw UsageError("zero denominator in '" + std::string(s) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

// Exact rational value of a finite double.
inline Rational from_double(double d)
{
    if (!std::isfinite(d))
        throw Error("non-finite double");
    Rational q(d);
    q.canonicalize();
    return q;
}

}  // namespace invmeas
