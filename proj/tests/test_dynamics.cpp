#include <invmeas/invmeas.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace invmeas;

namespace {

const RegularityClass kLoose{1, 1 << 20, {}};

HistogramMeasure random_histogram(std::mt19937_64& rng, const Space& s, unsigned level)
{
    std::uniform_int_distribution<long> w(0, 5);
    std::vector<long> raw(std::size_t{1} << level);
    long total = 0;
    for (auto& r : raw)
        total += (r = w(rng));
    if (total == 0)
        total = raw[0] = 1;
    std::vector<Rational> mass;
    for (auto r : raw)
        mass.push_back(make_rational(r, total));
    return make_histogram(s, level, std::move(mass));
}

Rational point_image(const MapModel& T, const Rational& x)
{
    RatInterval v = T.eval(RatInterval(x));
    Rational y = (v.lo + v.hi) / 2;
    return T.space.is_circle() ? frac(y) : y;
}

// Pushes m atoms per cell (at sub-cell centres) through T pointwise. The
// atoms are within w/(4m) of the histogram, so T_* of them is within
// lip * w/(4m) of the exact pushforward.
FinSupportMeasure fine_image(const MapModel& T, const HistogramMeasure& mu, long m)
{
    std::map<Rational, Rational> pts;
    const Rational w = mu.width();
    for (std::size_t c = 0; c < mu.size(); ++c) {
        if (mu.mass[c] == 0)
            continue;
        for (long j = 0; j < m; ++j) {
            Rational x = w * static_cast<unsigned long>(c) + w * make_rational(2 * j + 1, 2 * m);
            pts[point_image(T, x)] += mu.mass[c] / m;
        }
    }
    std::vector<Atom> atoms;
    for (auto& [x, a] : pts)
        atoms.push_back({x, a});
    return make_atoms(T.space, std::move(atoms));
}

struct Case {
    MapModel map;
    Rational lip;
};

std::vector<Case> sound_cases()
{
    return {{doubling_map(), 2},
            {tent_map(), 2},
            {logistic4_map(), 4},
            {contraction_map(Rational(1, 2), Rational(1, 4)), Rational(1, 2)},
            {rotation_map(Rational(1, 3)), 1},
            {markov_pw_linear(markov_preset("two_state")), 4}};
}

// Density of a full-branch-per-state Markov map with states [0,1/2], [1/2,1],
// from the Perron eigenvector of the state transfer matrix.
std::pair<double, double> markov_density_oracle(const std::vector<MarkovBranch>& br)
{
    Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
    for (const auto& b : br) {
        int from = b.x1 <= Rational(1, 2) ? 0 : 1;
        double slope = Rational(b.affine().slope).get_d();
        for (int to = 0; to < 2; ++to) {
            Rational lo = rmax(b.y0, make_rational(to, 2)), hi = rmin(b.y1, make_rational(to + 1, 2));
            if (lo < hi)
                P(to, from) += 1.0 / slope;
        }
    }
    Eigen::EigenSolver<Eigen::Matrix2d> es(P);
    int k = std::abs(es.eigenvalues()[0].real() - 1) < std::abs(es.eigenvalues()[1].real() - 1) ? 0 : 1;
    Eigen::Vector2d v = es.eigenvectors().col(k).real();
    v /= (v[0] + v[1]) / 2;
    return {v[0], v[1]};
}

}  // namespace

TEST(Maps, ExampleMapLookup)
{
    EXPECT_EQ(example_map("doubling").name, "doubling");
    EXPECT_EQ(example_map("rotation", {{"phi", "1/5"}}).space, Space::circle());
    EXPECT_EQ(example_map("markov_pw_linear", {{"preset", "two_state"}}).D.size(), 3u);
    EXPECT_EQ(example_map("markov_pw_linear", {{"branches", "0:1/2:0:1;1/2:1:0:1"}}).D.size(), 1u);
    EXPECT_THROW(example_map("nope"), UsageError);
    EXPECT_THROW(example_map("rotation"), UsageError);
    EXPECT_THROW(example_map("contraction", {{"a", "2"}}), UsageError);
    EXPECT_THROW(example_map("manneville_pomeau", {{"z", "3"}}), UsageError);
    EXPECT_THROW(markov_pw_linear({{0, Rational(1, 2), 0, 1}}), UsageError);
}

TEST(Maps, EvalEnclosesPointImages)
{
    std::mt19937_64 rng(21);
    std::vector<MapModel> maps = {doubling_map(), tent_map(), logistic4_map(), rotation_map(Rational(2, 7)),
                                  manneville_pomeau_map(Rational(3, 2)),
                                  markov_pw_linear(markov_preset("thirds"))};
    std::uniform_int_distribution<long> t(0, 1 << 10);
    for (const auto& T : maps)
        for (int i = 0; i < 100; ++i) {
            Rational a = make_rational(t(rng), 1 << 10), b = make_rational(t(rng), 1 << 10);
            RatInterval I(rmin(a, b), rmax(a, b));
            RatInterval img = T.eval(I);
            for (const Rational& x : {I.lo, I.hi, Rational((I.lo + I.hi) / 2)}) {
                RatInterval p = T.eval(RatInterval(x));
                EXPECT_LE(img.lo, p.lo) << T.name;
                EXPECT_GE(img.hi, p.hi) << T.name;
            }
        }
}

TEST(Pushforward, RequiresRegularityForDiscontinuousMaps)
{
    HistogramMeasure u = uniform_histogram(Space::unit_interval(), 3);
    EXPECT_THROW(pushforward(markov_pw_linear(markov_preset("thirds")), u, nullptr), UsageError);
    EXPECT_THROW(pushforward(doubling_map(), u, kLoose), UsageError);  // wrong space
    EXPECT_THROW(pushforward(tent_map(), u, RegularityClass{0, 1, {}}), UsageError);
}

TEST(Pushforward, ExactForDyadicAffinePieces)
{
    // Doubling and the tent map send dyadic cells onto unions of cells.
    HistogramMeasure u = uniform_histogram(Space::circle(), 4);
    CertifiedMeasure d = pushforward(doubling_map(), u, kLoose);
    EXPECT_EQ(d.err, 0);
    EXPECT_EQ(d.measure.mass, u.mass);
    CertifiedMeasure t = pushforward(tent_map(), uniform_histogram(Space::unit_interval(), 4), nullptr);
    EXPECT_EQ(t.err, 0);
    EXPECT_EQ(t.measure.mass, uniform_histogram(Space::unit_interval(), 4).mass);
}

TEST(Pushforward, ErrorBoundCoversFineSampleOracle)
{
    std::mt19937_64 rng(22);
    const long m = 32;
    for (const auto& [T, lip] : sound_cases())
        for (int i = 0; i < 5; ++i) {
            HistogramMeasure mu = random_histogram(rng, T.space, 4);
            CertifiedMeasure pf = pushforward(T, mu, kLoose);
            Rational total = 0;
            for (const auto& x : pf.measure.mass) {
                EXPECT_GE(x, 0);
                total += x;
            }
            EXPECT_EQ(total, 1) << T.name;
            Rational slack = lip * mu.width() / (4 * m);
            EXPECT_LE(w1(Measure(pf.measure), Measure(fine_image(T, mu, m))), pf.err + slack) << T.name;
        }
}

TEST(Pushforward, ResidualOfInvariantHistogramContainsZero)
{
    for (unsigned L : {2u, 5u}) {
        RatInterval r = residual(doubling_map(), uniform_histogram(Space::circle(), L), kLoose);
        EXPECT_EQ(r.lo, 0);
        RatInterval t = residual(markov_pw_linear(markov_preset("thirds")),
                                 uniform_histogram(Space::unit_interval(), L), kLoose);
        EXPECT_EQ(t.lo, 0);
    }
    // delta_0 is not invariant for the rotation by 1/2 at any resolution.
    HistogramMeasure d = histogram_project(dirac(Space::circle(), Rational(1, 64)), 5);
    RatInterval r = residual(rotation_map(Rational(1, 2)), d, nullptr);
    EXPECT_GT(r.lo, Rational(1, 4));
}

TEST(Pushforward, MarkovDensityMatchesEigenvectorOracle)
{
    auto br = markov_preset("two_state");
    auto [a, b] = markov_density_oracle(br);
    EXPECT_NEAR(a, 4.0 / 3, 1e-12);
    EXPECT_NEAR(b, 2.0 / 3, 1e-12);
    MapModel T = markov_pw_linear(br);
    const unsigned L = 6;
    const std::size_t n = std::size_t{1} << L;
    std::vector<Rational> mass;
    for (std::size_t k = 0; k < n; ++k)
        mass.push_back(k < n / 2 ? make_rational(4, 3 * n) : make_rational(2, 3 * n));
    HistogramMeasure inv = make_histogram(T.space, L, mass);
    CertifiedMeasure pf = pushforward(T, inv, kLoose);
    EXPECT_EQ(pf.err, 0);
    EXPECT_EQ(pf.measure.mass, inv.mass);

    IterateResult it = iterate_pushforward(T, uniform_histogram(T.space, L), 40, &kLoose, {0});
    double left = 0;
    for (std::size_t k = 0; k < n / 2; ++k)
        left += it.result.measure.mass[k].get_d();
    EXPECT_NEAR(left, a / 2, 1e-6);
}

TEST(Iterate, ContractionErrorsFollowRecursion)
{
    MapModel T = contraction_map(Rational(1, 3), Rational(1, 3));
    HistogramMeasure u = uniform_histogram(T.space, 6);
    IterateResult r = iterate_pushforward(T, u, 12, nullptr);
    ASSERT_EQ(r.errs.size(), 12u);
    EXPECT_FALSE(r.contraction_unverified);
    EXPECT_FALSE(r.vacuous);
    for (std::size_t k = 1; k < r.errs.size(); ++k)
        EXPECT_GE(r.errs[k], r.errs[k - 1] / 3);
    // Fixed point 1/2: the iterate is within err + one cell of delta_{1/2}.
    EXPECT_LE(w1(Measure(r.result.measure), Measure(dirac(T.space, Rational(1, 2)))),
              r.result.err + u.width() + pow2(-12) * 2);
}

TEST(Iterate, RoundingCostIsExact)
{
    std::mt19937_64 rng(23);
    HistogramMeasure mu = random_histogram(rng, Space::unit_interval(), 4);
    HistogramMeasure before = mu;
    Rational cost = round_masses(mu, 3);
    EXPECT_EQ(cost, w1(Measure(before), Measure(mu)));
    for (const auto& x : mu.mass)
        EXPECT_EQ(floor_dyadic(x, 3) == x || x == *std::max_element(mu.mass.begin(), mu.mass.end()), true);
}

TEST(Birkhoff, RotationAndFixedPoint)
{
    auto id = [](const RatInterval& I) { return I; };
    BirkhoffResult r = birkhoff_average(rotation_map(Rational(1, 4)), creal_const(Rational(1, 8)), id, 4);
    EXPECT_TRUE(r.complete);
    EXPECT_TRUE(r.average.contains(Rational(1, 2)));
    EXPECT_LE(r.average.width(), pow2(-30));
    BirkhoffResult f =
        birkhoff_average(contraction_map(Rational(1, 2), Rational(1, 4)), creal_const(Rational(1, 2)), id, 50);
    EXPECT_TRUE(f.average.contains(Rational(1, 2)));
    EXPECT_THROW(birkhoff_average(tent_map(), creal_const(Rational(0)), id, 0), UsageError);
}

TEST(Birkhoff, DoublingOrbitEventuallyLosesPrecision)
{
    auto id = [](const RatInterval& I) { return I; };
    CRealOracle third = creal_bisection(Rational(0), Rational(1), [](const Rational& y) { return 3 * y < 1; });
    BirkhoffResult r = birkhoff_average(doubling_map(), third, id, 200, 20);
    EXPECT_FALSE(r.complete);
    EXPECT_LT(r.steps, 200u);
    BirkhoffResult ok = birkhoff_average(doubling_map(), third, id, 20, 80);
    EXPECT_TRUE(ok.complete);
    EXPECT_TRUE(ok.average.contains(Rational(1, 2)));  // orbit 1/3, 2/3, 1/3, ...
}
