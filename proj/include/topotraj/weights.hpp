#pragma once

namespace topotraj {

/// Penalty weights and physical limits of the joint objective.
/// The kinodynamic, collision and safety-distance defaults are engineering
/// choices sized for a 0.85 m x 0.65 m vehicle footprint.
struct Weights {
    double time = 100.0;        ///< per second of total duration
    double topology = 500.0;    ///< set per stage by the solver
    double kinodynamic = 1e3;
    double collision = 1e6;
    double safe_distance = 1.2;  ///< m, vehicle center to vehicle center
    double max_velocity = 3.0;   ///< m/s
    double max_acceleration = 2.0;  ///< m/s^2
};

/// Topology weight used in each optimization stage.
struct StageWeights {
    double stage1 = 500.0;
    double stage2 = 5000.0;
};

}  // namespace topotraj
