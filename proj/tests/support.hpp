#pragma once

#include "topotraj/minco.hpp"

#include <random>

namespace topotraj::testing {

inline Vec2 randomPoint(std::mt19937_64& rng, double lo = 0.0, double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng)};
}

/// Random MINCO trajectory with moving start state and rest goal.
inline Trajectory randomTrajectory(std::mt19937_64& rng, int pieces) {
    std::uniform_real_distribution<double> dur(0.5, 2.0);
    BoundaryState start{randomPoint(rng), randomPoint(rng, -0.5, 0.5), randomPoint(rng, -0.5, 0.5)};
    BoundaryState goal{randomPoint(rng), Vec2::Zero(), Vec2::Zero()};
    std::vector<Vec2> wps;
    std::vector<double> durations{dur(rng)};
    for (int i = 1; i < pieces; ++i) {
        wps.push_back(randomPoint(rng));
        durations.push_back(dur(rng));
    }
    return mincoSolve(start, goal, wps, durations);
}

/// Straight line p(t) = origin + velocity * t as a single piece.
inline Trajectory linearTrajectory(const Vec2& origin, const Vec2& velocity, double duration) {
    PieceCoeffs c = PieceCoeffs::Zero();
    c.row(0) = origin.transpose();
    c.row(1) = velocity.transpose();
    return Trajectory({c}, {duration});
}

inline double relativeError(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

}  // namespace topotraj::testing
