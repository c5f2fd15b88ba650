#pragma once

#include "topotraj/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace topotraj {

struct GradcheckOptions {
    int samples = 20;
    double step = 1e-6;
    /// Uniform perturbation of the initial decision vector (m for waypoints,
    /// the same amount in duration-parameter units).
    double perturbation = 0.3;
    std::uint64_t seed = 0;
    /// Shift added to eta*M so every labelled pair sits on the active branch of
    /// the topology hinge and its gradient is actually exercised.
    double topology_activation = 1e3;
};

struct FamilyCheck {
    std::string family;
    double worst_relative_error = 0.0;
};

struct GradcheckReport {
    std::vector<FamilyCheck> families;
    int samples = 0;
    int resampled = 0;  ///< samples rejected because a kink fell inside the difference stencil

    double worst() const;
    bool passed(double tolerance) const { return worst() < tolerance; }
};

/// Compares the analytic gradient of each cost family with central finite
/// differences over every decision coordinate at `samples` perturbed points.
/// Throws std::invalid_argument when samples < 1.
GradcheckReport gradcheck(const Scenario& scenario, const GradcheckOptions& options = {});

}  // namespace topotraj
