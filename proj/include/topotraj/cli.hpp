#pragma once

#include "topotraj/export.hpp"
#include "topotraj/topology.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace topotraj::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kOptimizationFailed = 3 };

/// Entry point for the `topotraj` binary; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct DiscreteClassification {
    Interaction label = Interaction::None;
    double metric = 0.0;
    double t_star = 0.0;
};

/// Key point from the nearest sample pair, refined by a parabola through the
/// neighbouring squared distances; states are interpolated linearly.
DiscreteClassification classifySampled(const std::vector<SampledState>& a, const std::vector<SampledState>& b,
                                       double threshold = kClassificationThreshold);

}  // namespace topotraj::cli
