#include <invmeas/invmeas.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace invmeas;

namespace {

Rational random_rational(std::mt19937_64& rng, long range = 8, long den = 16)
{
    std::uniform_int_distribution<long> n(-range * den, range * den), d(1, den);
    return make_rational(n(rng), d(rng));
}

RatInterval random_interval(std::mt19937_64& rng)
{
    Rational a = random_rational(rng), b = random_rational(rng);
    return a <= b ? RatInterval(a, b) : RatInterval(b, a);
}

Rational sample(std::mt19937_64& rng, const RatInterval& x)
{
    std::uniform_int_distribution<long> t(0, 64);
    return x.lo + (x.hi - x.lo) * make_rational(t(rng), 64);
}

}  // namespace

TEST(Rational, LowestTermsAndPositiveDenominator)
{
    Rational q = make_rational(6, -4);
    EXPECT_EQ(q.get_num(), -3);
    EXPECT_EQ(q.get_den(), 2);
    EXPECT_EQ(to_pq(Rational(3)), "3/1");
    EXPECT_EQ(to_string(Rational(3)), "3");
}

TEST(Rational, ParseIsExact)
{
    EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
    EXPECT_EQ(parse_rational(" -7 "), Rational(-7));
    EXPECT_THROW(parse_rational("0.5"), UsageError);
    EXPECT_THROW(parse_rational("1/0"), UsageError);
    EXPECT_THROW(parse_rational("1/x"), UsageError);
    bool approx = false;
    EXPECT_EQ(parse_rational("~0.125", &approx), Rational(1, 8));
    EXPECT_TRUE(approx);
    EXPECT_EQ(parse_rational("~-1.5"), Rational(-3, 2));
}

TEST(Rational, DyadicRoundingIsOutward)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        Rational q = random_rational(rng, 2, 997);
        for (long bits : {0L, 3L, 10L}) {
            Rational lo = floor_dyadic(q, bits), hi = ceil_dyadic(q, bits);
            EXPECT_LE(lo, q);
            EXPECT_GE(hi, q);
            EXPECT_LE(hi - lo, pow2(-bits));
        }
    }
}

TEST(Interval, ArithmeticIsOutwardCorrect)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        RatInterval x = random_interval(rng), y = random_interval(rng);
        Rational a = sample(rng, x), b = sample(rng, y);
        EXPECT_TRUE((x + y).contains(a + b));
        EXPECT_TRUE((x - y).contains(a - b));
        EXPECT_TRUE((x * y).contains(a * b));
        EXPECT_TRUE(imin(x, y).contains(rmin(a, b)));
        EXPECT_TRUE(imax(x, y).contains(rmax(a, b)));
        EXPECT_TRUE(iabs(x).contains(rabs(a)));
        EXPECT_TRUE(isqr(x).contains(a * a));
    }
}

TEST(Interval, CompareWithGapNeverOrdersIntersectingIntervals)
{
    std::vector<Rational> grid;
    for (int k = 0; k <= 6; ++k)
        grid.push_back(make_rational(k, 4));
    for (auto& a : grid)
        for (auto& b : grid)
            for (auto& c : grid)
                for (auto& d : grid) {
                    if (b < a || d < c)
                        continue;
                    RatInterval x(a, b), y(c, d);
                    Order o = compare_with_gap(x, y);
                    if (intersect(x, y))
                        EXPECT_EQ(o, Order::Overlap);
                    else
                        EXPECT_NE(o, Order::Overlap);
                }
}

TEST(Interval, CompareExamples)
{
    EXPECT_EQ(compare_with_gap(RatInterval(Rational(0)), RatInterval(Rational(1))), Order::Less);
    EXPECT_EQ(compare_with_gap(RatInterval(0, 1), RatInterval(Rational(1, 2), 2)), Order::Overlap);
    auto third = *enclose_creal(creal_const(Rational(1, 3)), 8);
    EXPECT_EQ(compare_with_gap(third, RatInterval(Rational(1, 3) + Rational(1, 16))), Order::Less);
}

TEST(Interval, PowerEnclosureContainsExactPowers)
{
    // (9/16)^(3/2) = 27/64 exactly; (2)^(1/2) checked by squaring the bounds.
    RatInterval e = rpow_enclose(Rational(9, 16), 3, 2, 30);
    EXPECT_TRUE(e.contains(Rational(27, 64)));
    RatInterval r = rpow_enclose(Rational(2), 1, 2, 30);
    EXPECT_LE(r.lo * r.lo, 2);
    EXPECT_GE(r.hi * r.hi, 2);
    EXPECT_LE(r.width(), pow2(-30));
}

TEST(Oracle, ConstantAndThird)
{
    EXPECT_EQ(*eval_creal(creal_const(Rational(0)), 17), 0);
    auto q = *eval_creal(creal_const(Rational(1, 3)), 4);
    EXPECT_LT(rabs(q - Rational(1, 3)), Rational(1, 16));
}

TEST(Oracle, BisectionSqrt2MinusOneAgreesWithFineRun)
{
    CRealOracle x = creal_bisection(Rational(0), Rational(1), [](const Rational& y) {
        Rational z = y + 1;
        return z * z < 2;
    });
    Rational fine = *eval_creal(x, 20), coarse = *eval_creal(x, 10);
    EXPECT_LT(rabs(coarse - fine), pow2(-10) + pow2(-20));
    EXPECT_NEAR(coarse.get_d(), 0.41421356, 1.0 / 1024);
}

TEST(Oracle, EnclosuresPairwiseIntersect)
{
    CRealOracle x = creal_bisection(Rational(1), Rational(2), [](const Rational& y) { return y * y * y < 3; });
    std::vector<RatInterval> encl;
    for (unsigned n = 0; n <= 20; ++n)
        encl.push_back(*enclose_creal(x, n));
    for (auto& a : encl)
        for (auto& b : encl)
            EXPECT_TRUE(intersect(a, b).has_value());
}

TEST(Oracle, LowerSemicomputableSup)
{
    LscRealOracle x{[](unsigned long i) -> Rational { return 1 - pow2(-static_cast<long>(i)); }};
    EXPECT_EQ(lsc_sup_at(x, Budget{3}), Rational(7, 8));
    LscRealOracle h{[](unsigned long) -> Rational { return Rational(1, 2); }};
    EXPECT_EQ(lsc_sup_at(h, Budget{100}), Rational(1, 2));
    Rational prev = -1;
    for (unsigned long s = 1; s < 30; ++s) {
        Rational v = lsc_sup_at(x, Budget{s});
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_THROW(lsc_sup_at(x, Budget{0}), UsageError);
}
