#pragma once

#include "map_model.hpp"

#include <map>
#include <sstream>

namespace invmeas {

using MapParams = std::map<std::string, std::string>;

inline RatInterval affine_image(const Affine& a, const RatInterval& I)
{
    Rational u = a(I.lo), v = a(I.hi);
    return u <= v ? RatInterval(u, v) : RatInterval(v, u);
}

inline MapModel doubling_map()
{
    MapModel T;
    T.name = "doubling";
    T.space = Space::circle();
    Affine a{2, 0};
    T.eval = [a](const RatInterval& I) { return affine_image(a, I); };
    T.affine_piece = [a](const RatInterval&) -> std::optional<Affine> { return a; };
    T.D = {RatInterval(Rational(1, 2))};  // wrap point of 2x mod 1
    T.lip_away = 2;
    T.modulus = [](const Rational& e) -> Rational { return e / 2; };
    T.monotone = true;
    T.degree = 2;
    return T;
}

inline MapModel tent_map()
{
    MapModel T;
    T.name = "tent";
    const Rational half(1, 2);
    const Affine up{2, 0}, down{-2, 2};
    T.eval = [=](const RatInterval& I) {
        if (I.hi <= half)
            return affine_image(up, I);
        if (I.lo >= half)
            return affine_image(down, I);
        return RatInterval(rmin(up(I.lo), down(I.hi)), Rational(1));
    };
    T.affine_piece = [=](const RatInterval& I) -> std::optional<Affine> {
        if (I.hi <= half)
            return up;
        if (I.lo >= half)
            return down;
        return std::nullopt;
    };
    T.lip_away = 2;
    T.modulus = [](const Rational& e) -> Rational { return e / 2; };
    return T;
}

inline MapModel rotation_map(const Rational& phi)
{
    MapModel T;
    T.name = "rotation";
    T.space = Space::circle();
    Affine a{1, frac(phi)};
    T.eval = [a](const RatInterval& I) { return affine_image(a, I); };
    T.affine_piece = [a](const RatInterval&) -> std::optional<Affine> { return a; };
    T.lip_away = 1;
    T.modulus = [](const Rational& e) -> Rational { return e; };
    T.monotone = true;
    return T;
}

inline MapModel contraction_map(const Rational& a, const Rational& b)
{
    if (a < 0 || a >= 1 || b < 0 || a + b > 1)
        throw UsageError("contraction(a,b) needs 0 <= a < 1, b >= 0, a + b <= 1");
    MapModel T;
    T.name = "contraction";
    Affine f{a, b};
    T.eval = [f](const RatInterval& I) { return affine_image(f, I); };
    T.affine_piece = [f](const RatInterval&) -> std::optional<Affine> { return f; };
    T.lip_away = a;
    T.modulus = [a](const Rational& e) -> Rational { return a == 0 ? Rational(1) : Rational(e / a); };
    T.monotone = true;
    return T;
}

inline MapModel logistic4_map()
{
    MapModel T;
    T.name = "logistic4";
    auto f = [](const Rational& x) -> Rational { return 4 * x * (1 - x); };
    T.eval = [f](const RatInterval& I) {
        const Rational half(1, 2);
        Rational a = f(I.lo), b = f(I.hi);
        Rational lo = rmin(a, b), hi = rmax(a, b);
        if (I.lo < half && half < I.hi)
            hi = 1;
        return RatInterval(lo, hi);
    };
    T.lip_away = 4;
    T.modulus = [](const Rational& e) -> Rational { return e / 4; };
    return T;
}

// Increasing affine branches [x0, x1] -> [y0, y1] covering [0,1] in order.
struct MarkovBranch {
    Rational x0, x1, y0, y1;
    Affine affine() const
    {
        Rational s = (y1 - y0) / (x1 - x0);
        return {s, y0 - s * x0};
    }
};

inline std::vector<MarkovBranch> markov_preset(const std::string& name)
{
    if (name == "thirds")  // slopes 3/2 and 3, two full branches
        return {{0, Rational(2, 3), 0, 1}, {Rational(2, 3), 1, 0, 1}};
    if (name == "two_state")
        return {{0, Rational(1, 4), 0, 1},
                {Rational(1, 4), Rational(1, 2), 0, 1},
                {Rational(1, 2), Rational(3, 4), 0, Rational(1, 2)},
                {Rational(3, 4), 1, 0, Rational(1, 2)}};
    throw UsageError("unknown markov preset '" + name + "' (expected thirds or two_state)");
}

// "x0:x1:y0:y1;x0:x1:y0:y1;..."
inline std::vector<MarkovBranch> parse_markov_branches(const std::string& spec)
{
    std::vector<MarkovBranch> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<Rational> v;
        std::stringstream is(item);
        std::string tok;
        while (std::getline(is, tok, ':'))
            v.push_back(parse_rational(tok));
        if (v.size() != 4)
            throw UsageError("markov branch '" + item + "' needs x0:x1:y0:y1");
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return out;
}

inline MapModel markov_pw_linear(std::vector<MarkovBranch> br)
{
    if (br.empty())
        throw UsageError("markov map needs at least one branch");
    Rational lip = 0;
    for (std::size_t i = 0; i < br.size(); ++i) {
        const auto& b = br[i];
        if (!(b.x0 < b.x1) || b.y0 < 0 || b.y1 > 1 || b.y0 > 1 || b.y1 < 0 || b.y0 == b.y1)
            throw UsageError("markov branch " + std::to_string(i) + " is degenerate or leaves [0,1]");
        if ((i == 0 && b.x0 != 0) || (i > 0 && br[i - 1].x1 != b.x0) || (i + 1 == br.size() && b.x1 != 1))
            throw UsageError("markov branches must tile [0,1] in order");
        lip = rmax(lip, rabs(b.affine().slope));
    }
    MapModel T;
    T.name = "markov_pw_linear";
    for (std::size_t i = 1; i < br.size(); ++i)
        T.D.push_back(RatInterval(br[i].x0));
    T.eval = [br](const RatInterval& I) {
        std::optional<RatInterval> acc;
        for (const auto& b : br) {
            auto J = intersect(I, RatInterval(b.x0, b.x1));
            if (!J)
                continue;
            RatInterval img = affine_image(b.affine(), *J);
            acc = acc ? hull(*acc, img) : img;
        }
        return *acc;
    };
    auto branch_of = [br](const RatInterval& I) -> const MarkovBranch* {
        for (const auto& b : br)
            if (b.x0 <= I.lo && I.hi <= b.x1)
                return &b;
        return nullptr;
    };
    T.eval_piece = [branch_of, eval = T.eval](const RatInterval& I) {
        if (auto* b = branch_of(I))
            return affine_image(b->affine(), I);
        return eval(I);
    };
    T.affine_piece = [branch_of](const RatInterval& I) -> std::optional<Affine> {
        if (auto* b = branch_of(I))
            return b->affine();
        return std::nullopt;
    };
    T.lip_away = lip;
    T.monotone = br.size() == 1;
    return T;
}

// x + x^z mod 1 for rational 1 < z < 2, as a degree-one circle lift.
inline MapModel manneville_pomeau_map(const Rational& z, long bits = 64)
{
    if (z <= 1 || z >= 2)
        throw UsageError("manneville_pomeau needs 1 < z < 2");
    unsigned long p = z.get_num().get_ui(), q = z.get_den().get_ui();
    MapModel T;
    T.name = "manneville_pomeau";
    T.space = Space::circle();
    T.eval = [p, q, bits](const RatInterval& I) {
        RatInterval J(rmax(I.lo, Rational(0)), rmax(I.hi, Rational(0)));
        RatInterval pw = ipow_enclose(J, p, q, bits);
        return RatInterval(J.lo + pw.lo, J.hi + pw.hi);
    };
    // Wrap point x_w with x_w + x_w^z = 1, enclosed by exact bisection.
    Rational a = 0, b = 1;
    while (b - a > pow2(-40)) {
        Rational m = (a + b) / 2;
        RatInterval v = m + rpow_enclose(m, p, q, 50);
        if (v.hi < 1)
            a = m;
        else if (v.lo > 1)
            b = m;
        else {
            a = m - pow2(-41);
            b = m + pow2(-41);
            break;
        }
    }
    T.D = {RatInterval(Rational(0)), RatInterval(a, b)};
    T.lip_away = 1 + z;
    T.modulus = [z](const Rational& e) -> Rational { return e / (1 + z); };
    T.monotone = true;
    return T;
}

inline Rational param_rational(const MapParams& p, const std::string& key, std::optional<Rational> dflt = {})
{
    auto it = p.find(key);
    if (it == p.end()) {
        if (dflt)
            return *dflt;
        throw UsageError("missing map parameter '" + key + "'");
    }
    return parse_rational(it->second);
}

inline MapModel example_map(const std::string& name, const MapParams& params = {})
{
    if (name == "doubling")
        return doubling_map();
    if (name == "tent")
        return tent_map();
    if (name == "rotation")
        return rotation_map(param_rational(params, "phi"));
    if (name == "contraction")
        return contraction_map(param_rational(params, "a", Rational(1, 2)), param_rational(params, "b", Rational(1, 4)));
    if (name == "logistic4")
        return logistic4_map();
    if (name == "manneville_pomeau")
        return manneville_pomeau_map(param_rational(params, "z", Rational(3, 2)));
    if (name == "markov_pw_linear") {
        auto it = params.find("branches");
        if (it != params.end())
            return markov_pw_linear(parse_markov_branches(it->second));
        auto pr = params.find("preset");
        return markov_pw_linear(markov_preset(pr == params.end() ? "thirds" : pr->second));
    }
    throw UsageError("unknown map '" + name +
                     "' (expected doubling, tent, rotation, markov_pw_linear, manneville_pomeau, contraction, "
                     "logistic4)");
}

}  // namespace invmeas
