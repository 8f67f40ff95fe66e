#pragma once

#include "interval.hpp"
#include "oracle.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invmeas {

struct Space {
    enum class Kind { UnitInterval, Circle, Product };

    Kind kind = Kind::UnitInterval;
    std::vector<Space> factors;  // only for Product

    static Space unit_interval() { return {Kind::UnitInterval, {}}; }
    static Space circle() { return {Kind::Circle, {}}; }
    static Space product(std::vector<Space> fs)
    {
        if (fs.size() < 2 || fs.size() > 2)
            throw UsageError("products are limited to two factors");
        for (const auto& f : fs)
            if (f.kind == Kind::Product)
                throw UsageError("nested products are not supported");
        return {Kind::Product, std::move(fs)};
    }

    bool is_circle() const { return kind == Kind::Circle; }
    bool is_line() const { return kind == Kind::UnitInterval; }
    std::size_t dim() const { return kind == Kind::Product ? factors.size() : 1; }

    Rational diameter() const
    {
        switch (kind) {
        case Kind::UnitInterval: return 1;
        case Kind::Circle: return Rational(1, 2);
        default: {
            Rational d = 0;
            for (const auto& f : factors)
                d = rmax(d, f.diameter());
            return d;
        }
        }
    }
};

inline bool operator==(const Space& a, const Space& b)
{
    return a.kind == b.kind && a.factors == b.factors;
}

inline std::string to_string(const Space& s)
{
    switch (s.kind) {
    case Space::Kind::UnitInterval: return "interval";
    case Space::Kind::Circle: return "circle";
    default: {
        std::string r = "product(";
        for (std::size_t i = 0; i < s.factors.size(); ++i)
            r += (i ? "," : "") + to_string(s.factors[i]);
        return r + ")";
    }
    }
}

inline Space parse_space(const std::string& s)
{
    if (s == "interval" || s == "unit_interval")
        return Space::unit_interval();
    if (s == "circle")
        return Space::circle();
    throw UsageError("unknown space '" + s + "' (expected interval or circle)");
}

struct IdealPoint {
    std::vector<Rational> coords;

    IdealPoint() = default;
    IdealPoint(Rational x) : coords{std::move(x)} {}  // NOLINT: 1-D points convert implicitly
    explicit IdealPoint(std::vector<Rational> c) : coords(std::move(c)) {}

    const Rational& x() const { return coords.at(0); }
};

inline bool operator==(const IdealPoint& a, const IdealPoint& b) { return a.coords == b.coords; }

struct IdealBall {
    IdealPoint center;
    Rational radius;
};

// Distance on one factor; circle points are taken modulo 1.
inline Rational factor_distance(const Space& s, const Rational& a, const Rational& b)
{
    Rational d = rabs(a - b);
    if (s.kind == Space::Kind::Circle) {
        d = frac(d);
        d = rmin(d, Rational(1 - d));
    }
    return d;
}

inline Rational distance(const Space& s, const IdealPoint& p, const IdealPoint& q)
{
    if (s.kind != Space::Kind::Product) {
        if (p.coords.size() != 1 || q.coords.size() != 1)
            throw Error("distance: expected 1-D points");
        return factor_distance(s, p.x(), q.x());
    }
    if (p.coords.size() != s.factors.size() || q.coords.size() != s.factors.size())
        throw Error("distance: point dimension does not match product space");
    Rational d = 0;
    for (std::size_t i = 0; i < s.factors.size(); ++i)
        d = rmax(d, factor_distance(s.factors[i], p.coords[i], q.coords[i]));
    return d;
}

inline bool in_carrier(const Space& s, const IdealPoint& p)
{
    auto ok = [](const Space& f, const Rational& x) {
        return f.kind == Space::Kind::Circle ? (x >= 0 && x < 1) : (x >= 0 && x <= 1);
    };
    if (s.kind != Space::Kind::Product)
        return p.coords.size() == 1 && ok(s, p.x());
    if (p.coords.size() != s.factors.size())
        return false;
    for (std::size_t i = 0; i < s.factors.size(); ++i)
        if (!ok(s.factors[i], p.coords[i]))
            return false;
    return true;
}

// Dyadic grid with spacing 2^-n: every point is within 2^-n (in fact 2^-(n+1))
// of the returned set. Products take the cartesian grid, which is a net for
// the max metric.
inline std::vector<IdealPoint> eps_net(const Space& s, unsigned n)
{
    auto axis = [n](const Space& f) {
        std::vector<Rational> g;
        Rational h = pow2(-static_cast<long>(n));
        unsigned long count = 1ul << n;
        for (unsigned long j = 0; j < count; ++j)
            g.push_back(Rational(j) * h);
        if (f.kind == Space::Kind::UnitInterval)
            g.push_back(1);
        return g;
    };
    std::vector<IdealPoint> out;
    if (s.kind != Space::Kind::Product) {
        for (auto& x : axis(s))
            out.emplace_back(std::move(x));
        return out;
    }
    out.emplace_back(std::vector<Rational>{});
    for (const auto& f : s.factors) {
        std::vector<IdealPoint> next;
        for (const auto& p : out)
            for (const auto& x : axis(f)) {
                IdealPoint q = p;
                q.coords.push_back(x);
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

// An open set as the union of an enumeration of ideal balls. The enumeration
// returns nullopt past its end when it is finite.
struct ReOpenSet {
    std::function<std::optional<IdealBall>(unsigned long)> ball_enum;

    static ReOpenSet empty()
    {
        return {[](unsigned long) -> std::optional<IdealBall> { return std::nullopt; }};
    }

    static ReOpenSet from_balls(std::vector<IdealBall> balls)
    {
        return {[balls = std::move(balls)](unsigned long i) -> std::optional<IdealBall> {
            if (i >= balls.size())
                return std::nullopt;
            return balls[i];
        }};
    }

    // Open interval (a, b) as a single ball.
    static IdealBall interval_ball(const Rational& a, const Rational& b)
    {
        return {IdealPoint((a + b) / 2), (b - a) / 2};
    }
};

}  // namespace invmeas
