#pragma once

#include <array>

namespace topotraj {

inline constexpr int kQuadratureNodes = 16;

/// Gauss-Legendre rule mapped onto the unit interval [0, 1].
struct UnitQuadrature {
    std::array<double, kQuadratureNodes> nodes;
    std::array<double, kQuadratureNodes> weights;
};

const UnitQuadrature& gaussLegendre16();

}  // namespace topotraj
