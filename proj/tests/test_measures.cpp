#include <invmeas/invmeas.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace invmeas;

namespace {

const Space kLine = Space::unit_interval();
const Space kCircle = Space::circle();

FinSupportMeasure random_atoms(std::mt19937_64& rng, const Space& s, int max_atoms = 8, long grid = 64)
{
    std::uniform_int_distribution<int> count(1, max_atoms);
    std::uniform_int_distribution<long> pos(0, s.is_circle() ? grid - 1 : grid), w(1, 9);
    int k = count(rng);
    std::map<Rational, long> pts;
    while (static_cast<int>(pts.size()) < k)
        pts[make_rational(pos(rng), grid)] = w(rng);
    long total = 0;
    for (auto& [x, m] : pts)
        total += m;
    std::vector<Atom> atoms;
    for (auto& [x, m] : pts)
        atoms.push_back({x, make_rational(m, total)});
    return make_atoms(s, std::move(atoms));
}

HistogramMeasure random_histogram(std::mt19937_64& rng, const Space& s, unsigned level)
{
    std::uniform_int_distribution<long> w(0, 7);
    std::vector<long> raw(std::size_t{1} << level);
    long total = 0;
    for (auto& r : raw)
        total += (r = w(rng));
    if (total == 0) {
        raw[0] = 1;
        total = 1;
    }
    std::vector<Rational> mass;
    for (auto r : raw)
        mass.push_back(make_rational(r, total));
    return make_histogram(s, level, std::move(mass));
}

// sup over 1-Lipschitz f of ∫f dμ - ∫f dν for atomic measures on the line,
// by enumerating the vertices of the Lipschitz polytope: slopes ±1 between
// consecutive support points (f is determined up to a constant).
Rational kantorovich_primal(const FinSupportMeasure& mu, const FinSupportMeasure& nu)
{
    std::map<Rational, Rational> diff;
    for (const auto& a : mu.atoms)
        diff[a.pos] += a.mass;
    for (const auto& a : nu.atoms)
        diff[a.pos] -= a.mass;
    std::vector<std::pair<Rational, Rational>> pts(diff.begin(), diff.end());
    std::size_t gaps = pts.size() - 1;
    Rational best = 0;
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << gaps); ++signs) {
        Rational f = 0, v = pts[0].second * f;
        for (std::size_t i = 0; i < gaps; ++i) {
            Rational g = pts[i + 1].first - pts[i].first;
            f += ((signs >> i) & 1) ? g : Rational(-g);
            v += pts[i + 1].second * f;
        }
        best = rmax(best, v);
    }
    return best;
}

// Grid search over centres and radii at spacing 2^-10, a lower estimate of
// sup mu(B(x,r))/r.
Rational grid_alpha1(const HistogramMeasure& h)
{
    Rational best = 0;
    const long n = 1 << 10;
    for (long i = 0; i <= n; i += 4)
        for (long j = 1; j <= n / 2; j = j < 16 ? j + 1 : j * 2) {
            Rational c = make_rational(i, n), r = make_rational(j, n);
            best = rmax(best, Rational(measure_ball_mass(Measure(h), {IdealPoint(c), r}).lower / r));
        }
    return best;
}

}  // namespace

TEST(W1Line, Examples)
{
    EXPECT_EQ(w1(dirac(kLine, 0), dirac(kLine, 1)), 1);
    Measure u = uniform_histogram(kLine, 0);
    EXPECT_EQ(w1(u, u), 0);
    EXPECT_EQ(w1(dirac(kLine, 0), u), Rational(1, 2));
    EXPECT_EQ(w1_lp_oracle_line(dirac(kLine, 0), u), Rational(1, 2));
}

TEST(W1Circle, Examples)
{
    EXPECT_EQ(w1(dirac(kCircle, 0), dirac(kCircle, Rational(1, 2))), Rational(1, 2));
    EXPECT_EQ(w1(dirac(kCircle, 0), dirac(kCircle, Rational(3, 4))), Rational(1, 4));
    EXPECT_EQ(w1(uniform_histogram(kCircle, 3), dirac(kCircle, 0)), Rational(1, 4));
    EXPECT_THROW(w1(dirac(kCircle, 0), dirac(kLine, 0)), UsageError);
}

TEST(W1Circle, UniformVersusDiracOnFineAtoms)
{
    // Level-8 uniform atoms at cell centres against δ_0: the transport LP and
    // the closed form agree and approach 1/4.
    std::vector<Atom> atoms;
    const long n = 256;
    for (long k = 0; k < n; ++k)
        atoms.push_back({make_rational(2 * k + 1, 2 * n), make_rational(1, n)});
    FinSupportMeasure u = make_atoms(kCircle, atoms);
    Rational lp = w1_lp_oracle(u, dirac(kCircle, 0));
    EXPECT_EQ(lp, w1(u, dirac(kCircle, 0)));
    EXPECT_EQ(lp, Rational(1, 4));
}

TEST(W1LpOracle, Examples)
{
    EXPECT_EQ(w1_lp_oracle(dirac(kLine, Rational(1, 3)), dirac(kLine, Rational(3, 4))), Rational(5, 12));
    FinSupportMeasure two = make_atoms(kLine, {{0, Rational(1, 2)}, {1, Rational(1, 2)}});
    EXPECT_EQ(w1_lp_oracle(two, dirac(kLine, Rational(1, 2))), Rational(1, 2));
}

TEST(W1, RandomPairsAgreeWithLpOracle)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        FinSupportMeasure a = random_atoms(rng, kLine, 5), b = random_atoms(rng, kLine, 5);
        EXPECT_EQ(w1(a, b), w1_lp_oracle(a, b));
        FinSupportMeasure c = random_atoms(rng, kCircle, 5), d = random_atoms(rng, kCircle, 5);
        EXPECT_EQ(w1(c, d), w1_lp_oracle(c, d));
    }
}

TEST(W1, MetricAxiomsOnRandomTriples)
{
    std::mt19937_64 rng(12);
    for (const Space& s : {kLine, kCircle})
        for (int i = 0; i < 200; ++i) {
            Measure a = random_atoms(rng, s), b = random_histogram(rng, s, 3), c = random_atoms(rng, s);
            EXPECT_EQ(w1(a, b), w1(b, a));
            EXPECT_LE(w1(a, c), w1(a, b) + w1(b, c));
            EXPECT_EQ(w1(b, b), 0);
            EXPECT_GE(w1(a, c), 0);
        }
}

TEST(W1, KantorovichPrimalMatchesTransportDual)
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 20; ++i) {
        FinSupportMeasure a = random_atoms(rng, kLine, 4), b = random_atoms(rng, kLine, 4);
        EXPECT_EQ(kantorovich_primal(a, b), w1_lp_oracle(a, b));
    }
}

TEST(MeasureNet, PaperExampleSize)
{
    auto net = measure_net(kLine, Rational(1, 2));
    EXPECT_EQ(net.size(), 6u);
    for (const auto& m : net) {
        Rational total = 0;
        for (const auto& a : m.atoms) {
            total += a.mass;
            EXPECT_TRUE(a.pos == 0 || a.pos == Rational(1, 2) || a.pos == 1);
            EXPECT_TRUE(a.mass == Rational(1, 2) || a.mass == 1);
        }
        EXPECT_EQ(total, 1);
    }
    EXPECT_GE(measure_net(kLine, Rational(2)).size(), 1u);
    EXPECT_THROW(measure_net(kLine, Rational(1, 64), 1000), UsageError);
}

TEST(MeasureNet, CoversRandomHistograms)
{
    std::mt19937_64 rng(14);
    auto net = measure_net(kLine, Rational(1, 4));
    for (int i = 0; i < 50; ++i) {
        Measure h = random_histogram(rng, kLine, 4);
        Rational best = 2;
        for (const auto& m : net)
            best = rmin(best, w1(h, m));
        EXPECT_LE(best, Rational(1, 2));
    }
}

TEST(HistogramProject, Examples)
{
    HistogramMeasure u = histogram_project(uniform_histogram(kLine, 2), 5);
    for (const auto& m : u.mass)
        EXPECT_EQ(m, Rational(1, 32));
    HistogramMeasure d = histogram_project(dirac(kLine, Rational(1, 3)), 2);
    EXPECT_EQ(d.mass, (std::vector<Rational>{0, 1, 0, 0}));
    std::mt19937_64 rng(15);
    HistogramMeasure fine = random_histogram(rng, kLine, 6);
    HistogramMeasure coarse = histogram_project(fine, 3);
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        Rational sum = 0;
        for (std::size_t j = 8 * k; j < 8 * k + 8; ++j)
            sum += fine.mass[j];
        EXPECT_EQ(coarse.mass[k], sum);
    }
}

TEST(HistogramProject, MovesAtMostOneCell)
{
    std::mt19937_64 rng(16);
    for (const Space& s : {kLine, kCircle})
        for (int i = 0; i < 100; ++i) {
            FinSupportMeasure a = random_atoms(rng, s, 8, 1 << 12);
            for (unsigned L : {0u, 2u, 5u})
                EXPECT_LE(w1(a, histogram_project(a, L)), pow2(-static_cast<long>(L)));
        }
}

TEST(AlphaNorm, Examples)
{
    HistogramMeasure u = uniform_histogram(kLine, 4);
    EXPECT_EQ(alpha_norm_histogram(u, 1), 2);
    EXPECT_GE(grid_alpha1(u), Rational(2) - Rational(1, 64));
    std::vector<Rational> spike(16, Rational(0));
    spike[5] = 1;
    HistogramMeasure sp = make_histogram(kLine, 4, spike);
    EXPECT_EQ(alpha_norm_histogram(sp, 1), 32);
    EXPECT_LE(grid_alpha1(sp), 32);
    EXPECT_GE(grid_alpha1(sp), 31);
    std::vector<Rational> half(2, Rational(0));
    half[0] = 1;
    HistogramMeasure hf = make_histogram(kLine, 1, half);
    EXPECT_EQ(alpha_norm_histogram(hf, 1), 4);
    EXPECT_LE(grid_alpha1(hf), 4);
    EXPECT_GE(grid_alpha1(hf), Rational(4) - Rational(1, 16));
}

TEST(AlphaNorm, SplittingCellsEvenlyDoesNotIncrease)
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        HistogramMeasure h = random_histogram(rng, kLine, 4);
        std::vector<Rational> fine;
        for (const auto& m : h.mass) {
            fine.push_back(m / 2);
            fine.push_back(m / 2);
        }
        HistogramMeasure f = make_histogram(kLine, 5, fine);
        EXPECT_LE(alpha_norm_histogram(f, 1), alpha_norm_histogram(h, 1));
    }
}

TEST(AlphaNorm, FractionalAlphaIsAnUpperBound)
{
    std::mt19937_64 rng(18);
    HistogramMeasure h = random_histogram(rng, kLine, 4);
    Rational alpha(1, 2);
    Rational bound = alpha_norm_histogram(h, alpha);
    for (long i = 0; i <= 64; ++i)
        for (long j = 1; j <= 32; ++j) {
            Rational c = make_rational(i, 64), r = make_rational(j, 64);
            Rational m = measure_ball_mass(Measure(h), {IdealPoint(c), r}).lower;
            RatInterval ra = pow_alpha(r, alpha);
            EXPECT_LE(m / ra.hi, bound);
        }
}

TEST(WeightedNorm, Examples)
{
    std::mt19937_64 rng(19);
    HistogramMeasure h = random_histogram(rng, kLine, 5);
    auto one = [](const RatInterval&) { return RatInterval(Rational(1)); };
    auto zero = [](const RatInterval&) { return RatInterval(Rational(0)); };
    Rational a = alpha_norm_histogram(h, 1);
    Rational wn = weighted_norm_histogram(h, one, 1);
    EXPECT_GE(wn, a);
    EXPECT_LE(wn, 2 * a);
    EXPECT_EQ(weighted_norm_histogram(h, zero, 1), 0);
    // Mass 1 in the first cell: the plain norm grows like 2^L, the x^2-weighted
    // one stays bounded.
    auto sq = [](const RatInterval& x) { return isqr(x); };
    for (unsigned L : {4u, 8u, 12u}) {
        std::vector<Rational> m(std::size_t{1} << L, Rational(0));
        m[0] = 1;
        HistogramMeasure s = make_histogram(kLine, L, m);
        EXPECT_EQ(alpha_norm_histogram(s, 1), 2 * pow2(L));
        EXPECT_LE(weighted_norm_histogram(s, sq, 1), 4);
    }
}

TEST(BallMass, Examples)
{
    Measure d = dirac(kLine, Rational(1, 2));
    MassBounds a = measure_ball_mass(d, {IdealPoint(Rational(1, 2)), Rational(1, 4)});
    EXPECT_EQ(a.lower, 1);
    EXPECT_EQ(a.upper, 1);
    MassBounds b = measure_ball_mass(d, {IdealPoint(Rational(3, 4)), Rational(1, 4)});
    EXPECT_EQ(b.lower, 0);  // the atom sits on the boundary: open ball misses it
    EXPECT_EQ(b.upper, 1);
    MassBounds c = measure_ball_mass(uniform_histogram(kLine, 3), {IdealPoint(Rational(1, 2)), Rational(1, 4)});
    EXPECT_EQ(c.lower, Rational(1, 2));
    EXPECT_EQ(c.upper, Rational(1, 2));
}

TEST(SupportPoint, Examples)
{
    CRealOracle x = support_point(Measure(dirac(kLine, Rational(1, 3))), Budget{1000});
    for (unsigned n : {3u, 8u, 14u}) {
        auto q = eval_creal(x, n);
        ASSERT_TRUE(q);
        EXPECT_LE(rabs(*q - Rational(1, 3)), pow2(-static_cast<long>(n)));
    }
    Measure u = uniform_histogram(kLine, 4);
    CRealOracle y = support_point(u, Budget{1000});
    auto q = eval_creal(y, 10);
    ASSERT_TRUE(q);
    for (unsigned k = 0; k <= 10; ++k)
        EXPECT_GT(measure_ball_mass(u, {IdealPoint(*q), pow2(-static_cast<long>(k))}).lower, 0);
}
