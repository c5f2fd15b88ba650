#include "topotraj/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace topotraj {

namespace {

UnitQuadrature buildRule() {
    // Newton iteration on the Legendre polynomial roots, then affine map [-1, 1] -> [0, 1].
    constexpr int n = kQuadratureNodes;
    UnitQuadrature rule{};
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

}  // namespace

const UnitQuadrature& gaussLegendre16() {
    static const UnitQuadrature rule = buildRule();
    return rule;
}

}  // namespace topotraj
