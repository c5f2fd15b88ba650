#pragma once

#include "topotraj/trajectory.hpp"

#include <vector>

namespace topotraj {

struct Metrics {
    double computation_ms = 0.0;
    double total_travel_distance = 0.0;  ///< m, summed over vehicles
    double total_travel_duration = 0.0;  ///< s, summed over vehicles
    double max_duration = 0.0;           ///< s
    double min_pairwise_distance = 0.0;  ///< m, 1000 samples per pair window; inf for one vehicle
};

/// Minimum center distance over 1000 uniform samples of [0, longer duration].
double minPairwiseDistance(const std::vector<Trajectory>& trajectories);

Metrics computeMetrics(const std::vector<Trajectory>& trajectories, double computation_ms = 0.0);

}  // namespace topotraj
