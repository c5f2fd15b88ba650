#pragma once

#include "topotraj/minco.hpp"
#include "topotraj/scenario.hpp"
#include "topotraj/topology.hpp"
#include "topotraj/weights.hpp"

#include <vector>

namespace topotraj {

struct CostBreakdown {
    double effort = 0.0;
    double time = 0.0;
    double kinodynamic = 0.0;
    double collision = 0.0;
    double topology = 0.0;

    double total() const { return effort + time + kinodynamic + collision + topology; }
};

/// Which penalty families an optimization stage sees.
struct StageMask {
    bool include_collision = true;
    bool include_topology = true;
};

/// Per-family switches; used by the stage schedule and the gradient checker.
struct FamilyMask {
    bool effort = true;
    bool time = true;
    bool kinodynamic = true;
    bool collision = true;
    bool topology = true;

    static FamilyMask fromStage(const StageMask& stage) {
        return {true, true, true, stage.include_collision, stage.include_topology};
    }
};

enum class HingeShape { Linear, Cubic };

struct SingleCost {
    double value = 0.0;
    CoeffGradient grad;
};

struct PairCost {
    double value = 0.0;
    CoeffGradient grad_a;
    CoeffGradient grad_b;
};

/// Integral of squared jerk, closed form.
SingleCost effortCost(const Trajectory& traj);

/// w_T times the total duration; gradient is w_T for every piece.
double timeCost(const std::vector<double>& durations, double weight, Eigen::VectorXd* grad = nullptr);

/// Unweighted cubic-hinge penalty on squared speed and squared acceleration
/// over the per-piece Gauss-Legendre nodes.
SingleCost kinodynamicPenalty(const Trajectory& traj, double max_velocity, double max_acceleration);

/// Sample count used by the collision penalty for a window of `duration` seconds.
int collisionSampleCount(double duration);

/// Unweighted cubic-hinge penalty on d_safe^2 - |p_a - p_b|^2, trapezoidal in
/// time over [0, longer duration] with the shorter trajectory held at its goal.
PairCost collisionPenalty(const Trajectory& a, const Trajectory& b, double safe_distance);

/// Unweighted topology penalty for one pair: eta*M + margin on the active
/// branch (cubed for HingeShape::Cubic), zero otherwise. `margin` is 0 for the
/// plain constraint eta*M <= 0.
PairCost topologyPenalty(const KeyPointSolution& sol, const KeyPointSensitivity& sens, Interaction eta,
                         const Trajectory& a, const Trajectory& b, double margin = 0.0,
                         HingeShape shape = HingeShape::Linear);

struct ObjectiveOptions {
    double topology_margin = 0.0;
    HingeShape hinge = HingeShape::Linear;
};

struct ObjectiveResult {
    CostBreakdown costs;
    std::vector<MincoGradient> gradients;  ///< per vehicle, in waypoint/duration space
};

/// The joint objective over all vehicles. Pairs are visited in a fixed order
/// (vehicle pairs i < j, then each vehicle against each obstacle), each once.
/// Throws std::invalid_argument when the trajectory count differs from the vehicle count.
ObjectiveResult totalObjective(const Scenario& scenario, const std::vector<Trajectory>& trajectories,
                               const FamilyMask& families, const Weights& weights,
                               const ObjectiveOptions& options = {});

/// Zero-velocity stand-in used for static obstacles.
Trajectory obstacleTrajectory(const Obstacle& obstacle);

}  // namespace topotraj
