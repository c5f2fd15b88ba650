#pragma once

#include "topotraj/scenario.hpp"
#include "topotraj/trajectory.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace topotraj {

inline constexpr double kCsvRateHz = 100.0;
inline constexpr int kRenderSamples = 200;
inline constexpr double kSvgPixelsPerMeter = 50.0;

/// Rows per vehicle for a 100 Hz export spanning `max_duration` seconds.
int csvSampleCount(double max_duration);

/// Time-major CSV with header `t,vehicle_id,x,y,vx,vy,ax,ay`, sampled at 100 Hz up
/// to the longest duration; shorter trajectories are held at their goal.
void writeTrajectoriesCsv(std::ostream& out, const std::vector<std::string>& ids,
                          const std::vector<Trajectory>& trajectories);
/// Throws std::runtime_error on I/O failure.
void exportTrajectories(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<Trajectory>& trajectories);

struct SampledState {
    double t = 0.0;
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    Vec2 acceleration = Vec2::Zero();
};

/// Samples grouped by vehicle id, in file order. Throws std::runtime_error on malformed input.
std::map<std::string, std::vector<SampledState>> readTrajectoriesCsv(std::istream& in);
std::map<std::string, std::vector<SampledState>> loadTrajectoriesCsv(const std::string& path);

/// SVG at 50 px per meter with the origin at the bottom-left corner of the arena.
std::string renderSvg(const Scenario& scenario, const std::vector<std::vector<Vec2>>& polylines);
/// Each trajectory is drawn with 200 uniform samples over its duration.
std::string renderSvg(const Scenario& scenario, const std::vector<Trajectory>& trajectories);
void writeSvg(const std::string& path, const std::string& svg);

}  // namespace topotraj
