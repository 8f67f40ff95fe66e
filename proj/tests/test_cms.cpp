#include <invmeas/invmeas.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace invmeas;

namespace {

MapModel interval_map(std::string name, IntervalFn eval)
{
    MapModel T;
    T.name = std::move(name);
    T.eval = std::move(eval);
    return T;
}

MapModel identity_map()
{
    return interval_map("identity", [](const RatInterval& x) { return x; });
}

MapModel square_map()
{
    return interval_map("square", [](const RatInterval& x) { return isqr(x); });
}

CompactEnclosure interval_enclosure(const Rational& a, const Rational& b, unsigned level)
{
    CompactEnclosure K = full_enclosure(Space::unit_interval(), level);
    K.cells = cells_meeting(RatInterval(a, b), level);
    return K;
}

Rational random_unit(std::mt19937_64& rng, long den = 1 << 20)
{
    return make_rational(std::uniform_int_distribution<long>(0, den)(rng), den);
}

}  // namespace

TEST(Space, CircleAndProductMetrics)
{
    Space c = Space::circle();
    EXPECT_EQ(distance(c, Rational(1, 10), Rational(9, 10)), Rational(1, 5));
    EXPECT_EQ(distance(c, Rational(0), Rational(1, 2)), Rational(1, 2));
    Space p = Space::product({Space::unit_interval(), Space::circle()});
    IdealPoint a(std::vector<Rational>{Rational(0), Rational(1, 8)});
    IdealPoint b(std::vector<Rational>{Rational(1, 4), Rational(7, 8)});
    EXPECT_EQ(distance(p, a, b), Rational(1, 4));
    EXPECT_THROW(Space::product({Space::circle()}), UsageError);
}

TEST(EpsNet, Examples)
{
    auto net = eps_net(Space::unit_interval(), 1);
    ASSERT_EQ(net.size(), 3u);
    EXPECT_EQ(net[0].x(), 0);
    EXPECT_EQ(net[1].x(), Rational(1, 2));
    EXPECT_EQ(net[2].x(), 1);
    auto cn = eps_net(Space::circle(), 2);
    ASSERT_EQ(cn.size(), 4u);
    EXPECT_EQ(cn[3].x(), Rational(3, 4));
    Space sq = Space::product({Space::unit_interval(), Space::unit_interval()});
    auto grid = eps_net(sq, 1);
    EXPECT_EQ(grid.size(), 9u);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            IdealPoint q(std::vector<Rational>{make_rational(i, 4), make_rational(j, 4)});
            Rational best = 2;
            for (const auto& g : grid)
                best = rmin(best, distance(sq, q, g));
            EXPECT_LE(best, Rational(1, 2));
        }
}

TEST(EpsNet, CoversRandomPoints)
{
    std::mt19937_64 rng(3);
    for (Space s : {Space::unit_interval(), Space::circle()})
        for (unsigned n : {1u, 3u, 6u}) {
            auto net = eps_net(s, n);
            for (int i = 0; i < 1000; ++i) {
                Rational x = random_unit(rng);
                if (s.is_circle() && x == 1)
                    x = 0;
                Rational best = 2;
                for (const auto& g : net)
                    best = rmin(best, distance(s, IdealPoint(x), g));
                EXPECT_LE(best, pow2(-static_cast<long>(n)));
            }
        }
}

TEST(Covers, Examples)
{
    CompactEnclosure K = full_enclosure(Space::unit_interval(), 2);
    EXPECT_EQ(covers(K, {{IdealPoint(Rational(1, 2)), Rational(3, 4)}}, Budget{4}), Semi::Yes);
    std::vector<IdealBall> ends{{IdealPoint(Rational(0)), Rational(1, 4)}, {IdealPoint(Rational(1)), Rational(1, 4)}};
    for (unsigned long b : {0ul, 5ul, 12ul})
        EXPECT_EQ(covers(K, ends, Budget{b}), Semi::Unresolved);
}

TEST(Covers, CantorLikeEnclosureAfterRefinement)
{
    // K = [0,1] minus the open middle third, covered by two balls that do not
    // contain the outer thirds' cells at coarse levels but do after refining.
    CompactEnclosure K = set_minus_open(full_enclosure(Space::unit_interval(), 6),
                                        ReOpenSet::from_balls({ReOpenSet::interval_ball(Rational(1, 3), Rational(2, 3))}),
                                        Budget{1});
    std::vector<IdealBall> balls{ReOpenSet::interval_ball(Rational(-1, 8), Rational(3, 8) + Rational(1, 64)),
                                 ReOpenSet::interval_ball(Rational(5, 8) - Rational(1, 64), Rational(9, 8))};
    Semi s = covers(K, balls, Budget{8});
    ASSERT_EQ(s, Semi::Yes);
    // Exhaustive check at width 2^-10: every point of every kept cell is in a ball.
    for (auto c : K.cells) {
        RatInterval cell = K.cell(c);
        for (int t = 0; t <= 16; ++t) {
            Rational x = cell.lo + cell.width() * make_rational(t, 16);
            bool in = false;
            for (const auto& b : balls)
                in = in || rabs(x - b.center.x()) < b.radius;
            EXPECT_TRUE(in) << to_string(x);
        }
    }
}

TEST(SetMinusOpen, Examples)
{
    CompactEnclosure K = full_enclosure(Space::unit_interval(), 3);
    CompactEnclosure R = set_minus_open(
        K, ReOpenSet::from_balls({ReOpenSet::interval_ball(Rational(1, 4), Rational(3, 4))}), Budget{4});
    // closed cells touching 1/4 or 3/4 are not inside the open interval
    EXPECT_EQ(R.cells, (std::vector<std::uint64_t>{0, 1, 2, 5, 6, 7}));
    CompactEnclosure same = set_minus_open(K, ReOpenSet::empty(), Budget{10});
    EXPECT_EQ(same.cells, K.cells);
}

TEST(SetMinusOpen, AgreesWithIntervalListDifference)
{
    auto U = dovetail_intervals(toy_programs(), Rational(1, 8));
    std::vector<IdealBall> balls;
    std::vector<std::pair<Rational, Rational>> ivs;
    for (unsigned long i = 1; i <= 32; ++i) {
        auto [a, b] = U.next(i);
        ivs.push_back({a, b});
        balls.push_back(ReOpenSet::interval_ball(a, b));
    }
    const unsigned level = 7;
    CompactEnclosure R =
        set_minus_open(full_enclosure(Space::unit_interval(), level), ReOpenSet::from_balls(balls), Budget{32});
    // Independent oracle: a cell is removable iff it lies inside the union of
    // the open intervals, checked by sweeping sorted intervals.
    std::sort(ivs.begin(), ivs.end());
    const Rational w = pow2(-static_cast<long>(level));
    std::vector<std::uint64_t> expect;
    for (std::uint64_t k = 0; k < (1u << level); ++k) {
        Rational lo = w * static_cast<unsigned long>(k), hi = lo + w;
        Rational reach = -1;  // covered up to (but excluding) reach, starting strictly left of lo
        bool started = false;
        for (const auto& [a, b] : ivs) {
            if (!started) {
                if (a < lo && b > lo) {
                    started = true;
                    reach = b;
                }
                continue;
            }
            if (a < reach)
                reach = rmax(reach, b);
        }
        bool inside = started && reach > hi;
        if (!inside)
            expect.push_back(k);
    }
    EXPECT_EQ(R.cells, expect);
}

TEST(InfOnCompact, Examples)
{
    unsigned n = 10;
    auto id = [](const RatInterval& x) { return x; };
    InfResult a = inf_on_compact(id, interval_enclosure(Rational(1, 4), 1, 4), n);
    EXPECT_LE(a.lower, Rational(1, 4));
    EXPECT_GE(a.lower, Rational(1, 4) - pow2(-10));
    auto sq = [](const RatInterval& x) { return isqr(x - RatInterval(Rational(1, 2))); };
    InfResult b = inf_on_compact(sq, full_enclosure(Space::unit_interval(), 3), n);
    EXPECT_LE(b.lower, 0);
    EXPECT_GE(b.lower, -pow2(-10));
    auto dist = [](const RatInterval& x) { return iabs(x - RatInterval(Rational(1, 3))); };
    InfResult c = inf_on_compact(dist, interval_enclosure(Rational(1, 2), 1, 4), 8);
    EXPECT_TRUE(c.tight);
    EXPECT_LE(c.lower, Rational(1, 6));
    EXPECT_GE(c.lower, Rational(1, 6) - pow2(-8));
}

TEST(ImageCompact, Examples)
{
    MapModel half = contraction_map(Rational(1, 2), Rational(1, 4));
    CompactEnclosure img = image_compact(half, full_enclosure(Space::unit_interval(), 4));
    EXPECT_EQ(img.cells.front(), 4u);
    EXPECT_EQ(img.cells.back(), 11u);
    CompactEnclosure K = interval_enclosure(Rational(3, 16), Rational(9, 16), 4);
    CompactEnclosure same = image_compact(identity_map(), K);
    for (auto c : K.cells)
        EXPECT_TRUE(std::binary_search(same.cells.begin(), same.cells.end(), c));
    EXPECT_LE(same.cells.size(), K.cells.size() + 2);
    CompactEnclosure half_circle = full_enclosure(Space::circle(), 4);
    half_circle.cells.resize(8);
    EXPECT_EQ(image_compact(doubling_map(), half_circle).cells.size(), 16u);
}

TEST(ImageCompact, ContainsImagesOfRandomPoints)
{
    std::mt19937_64 rng(4);
    std::vector<MapModel> maps{tent_map(), logistic4_map(), markov_pw_linear(markov_preset("two_state")),
                               contraction_map(Rational(1, 3), Rational(1, 2))};
    for (const auto& T : maps) {
        CompactEnclosure K = interval_enclosure(Rational(1, 8), Rational(5, 8), 6);
        CompactEnclosure img = image_compact(T, K);
        for (int i = 0; i < 1000; ++i) {
            Rational x = Rational(1, 8) + random_unit(rng) / 2;
            RatInterval y = T.eval(RatInterval(x));
            bool hit = false;
            for (auto k : cells_meeting(y, img.level))
                hit = hit || std::binary_search(img.cells.begin(), img.cells.end(), k);
            EXPECT_TRUE(hit) << T.name << " at " << to_string(x);
        }
    }
}

TEST(Attractor, ContractionIdentityDoubling)
{
    CompactEnclosure A = attractor_enclosure(contraction_map(Rational(1, 2), Rational(1, 4)), Space::unit_interval(), 10, 10);
    EXPECT_TRUE(enclosure_contains(A, Rational(1, 2)));
    EXPECT_LE(enclosure_diameter(A), pow2(-8) + pow2(-9));
    EXPECT_EQ(attractor_enclosure(identity_map(), Space::unit_interval(), 5, 6).cells.size(), 64u);
    EXPECT_EQ(attractor_enclosure(doubling_map(), Space::circle(), 5, 6).cells.size(), 64u);
}

TEST(Attractor, AntitoneInIterations)
{
    MapModel T = markov_pw_linear(markov_preset("two_state"));
    CompactEnclosure prev = attractor_enclosure(T, T.space, 0, 7);
    for (unsigned n = 1; n <= 6; ++n) {
        CompactEnclosure cur = attractor_enclosure(T, T.space, n, 7);
        EXPECT_TRUE(std::includes(prev.cells.begin(), prev.cells.end(), cur.cells.begin(), cur.cells.end()));
        prev = std::move(cur);
    }
}

TEST(Modulus, Examples)
{
    MapModel sq = square_map();
    Rational eps(1, 4);
    Rational d = modulus_of_continuity(sq, full_enclosure(Space::unit_interval(), 0), eps);
    EXPECT_GT(d, 0);
    EXPECT_LE(d, Rational(1, 8));
    MapModel constant = interval_map("const", [](const RatInterval&) { return RatInterval(Rational(1, 3)); });
    EXPECT_EQ(modulus_of_continuity(constant, full_enclosure(Space::unit_interval(), 2), eps), 1);
    CompactEnclosure quarter = full_enclosure(Space::circle(), 2);
    quarter.cells = {0};
    EXPECT_LE(modulus_of_continuity(doubling_map(), quarter, Rational(1, 8)), Rational(1, 16));
}

TEST(Modulus, ValidOnRandomPairs)
{
    std::mt19937_64 rng(5);
    MapModel sq = square_map();
    Rational eps(1, 16);
    Rational d = modulus_of_continuity(sq, full_enclosure(Space::unit_interval(), 0), eps);
    for (int i = 0; i < 1000; ++i) {
        Rational x = random_unit(rng);
        Rational y = rmin(Rational(1), x + d * make_rational(std::uniform_int_distribution<int>(0, 999)(rng), 1000));
        RatInterval fx = sq.eval(RatInterval(x)), fy = sq.eval(RatInterval(y));
        EXPECT_LT(rabs(fx.hi - fy.lo), eps);
    }
}

TEST(PointInClosed, Examples)
{
    auto meets_interval = [](Rational a, Rational b) {
        return [a, b](const IdealBall& B) {
            Rational c = B.center.x(), r = B.radius;
            return (c + r > a && c - r < b) ? Semi::Yes : Semi::Unresolved;
        };
    };
    CRealOracle third = point_in_closed({meets_interval(Rational(1, 3), Rational(1, 3)), Space::unit_interval(), {400}});
    for (unsigned n : {4u, 10u, 20u}) {
        auto q = eval_creal(third, n);
        ASSERT_TRUE(q);
        EXPECT_LE(rabs(*q - Rational(1, 3)), pow2(-static_cast<long>(n)));
    }
    CRealOracle seg = point_in_closed({meets_interval(Rational(1, 4), Rational(1, 2)), Space::unit_interval(), {400}});
    auto q = eval_creal(seg, 12);
    ASSERT_TRUE(q);
    EXPECT_GE(*q, Rational(1, 4) - pow2(-12));
    EXPECT_LE(*q, Rational(1, 2) + pow2(-12));
    CRealOracle starved = point_in_closed({meets_interval(Rational(1, 3), Rational(1, 3)), Space::unit_interval(), {3}});
    EXPECT_FALSE(eval_creal(starved, 10));
}
