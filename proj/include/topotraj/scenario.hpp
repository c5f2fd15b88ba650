#pragma once

#include "topotraj/minco.hpp"
#include "topotraj/topology.hpp"
#include "topotraj/weights.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace topotraj {

/// Half-diagonal of a 0.85 m x 0.65 m footprint.
inline constexpr double kDefaultVehicleRadius = 0.535;

struct Arena {
    double width = 10.0;
    double height = 10.0;
    bool contains(const Vec2& p) const { return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= width && p.y() <= height; }
};

struct VehicleSpec {
    std::string id;
    BoundaryState start;
    BoundaryState goal;
    double radius = kDefaultVehicleRadius;
    int pieces = 0;               ///< 0 selects max(4, ceil(distance / 1.5 m))
    std::optional<Vec2> init_via;  ///< initial guess bends through this point
};

struct Obstacle {
    std::string id;
    Vec2 center = Vec2::Zero();
    double radius = 0.5;
};

struct Scenario {
    std::string name;
    Arena arena;
    std::vector<VehicleSpec> vehicles;
    std::vector<Obstacle> obstacles;
    InteractionPattern pattern;
    Weights weights;
    StageWeights stage_weights;

    int vehicleIndex(const std::string& id) const;  ///< -1 if absent
    int obstacleIndex(const std::string& id) const;  ///< -1 if absent
};

/// Parse/validation failure with the offending line (1-based, 0 if unknown) and field.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(int line, std::string field, const std::string& what);
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

Scenario parseScenario(const std::string& text);
Scenario loadScenario(const std::string& path);
std::string serializeScenario(const Scenario& scenario);

/// Throws ScenarioError when an invariant does not hold.
void validateScenario(const Scenario& scenario);

}  // namespace topotraj
