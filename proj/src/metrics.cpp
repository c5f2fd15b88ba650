#include "topotraj/metrics.hpp"

#include <algorithm>
#include <limits>

namespace topotraj {

double minPairwiseDistance(const std::vector<Trajectory>& trajs) {
    constexpr int kSamples = 1000;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < trajs.size(); ++a) {
        for (std::size_t b = a + 1; b < trajs.size(); ++b) {
            const double w = std::max(trajs[a].totalDuration(), trajs[b].totalDuration());
            for (int j = 0; j <= kSamples; ++j) {
                const double t = w * j / kSamples;
                best = std::min(best, (trajs[a].eval(t).position - trajs[b].eval(t).position).norm());
            }
        }
    }
    return best;
}

Metrics computeMetrics(const std::vector<Trajectory>& trajs, double computation_ms) {
    Metrics m;
    m.computation_ms = computation_ms;
    for (const auto& t : trajs) {
        m.total_travel_distance += arcLength(t);
        m.total_travel_duration += t.totalDuration();
        m.max_duration = std::max(m.max_duration, t.totalDuration());
    }
    m.min_pairwise_distance = minPairwiseDistance(trajs);
    return m;
}

}  // namespace topotraj
