#pragma once

#include "enclosure.hpp"
#include "measure.hpp"

namespace invmeas {

// Certified lower bound of mu(B) for open ideal balls.
using BallMassOracle = std::function<Rational(const IdealBall&)>;

inline BallMassOracle ball_mass_oracle(Measure mu)
{
    return [mu = std::move(mu)](const IdealBall& b) { return measure_ball_mass(mu, b).lower; };
}

// A point x of the support: nested balls B(c_k, 2^-k) of certified positive
// mass, so every B(x, 2^-k) has positive mass. Each mass query costs one
// budget step; approx(n) is nullopt (Unresolved) once the budget runs out.
inline CRealOracle support_point(BallMassOracle mass, const Space& s, Budget b)
{
    NestedBallSearch search;
    search.space = s;
    search.budget = b;
    search.meets = [mass = std::move(mass)](const IdealBall& ball) {
        return mass(ball) > 0 ? Semi::Yes : Semi::Unresolved;
    };
    return point_in_closed(std::move(search));
}

inline CRealOracle support_point(const Measure& mu, Budget b)
{
    return support_point(ball_mass_oracle(mu), space_of(mu), b);
}

}  // namespace invmeas
