#pragma once

#include "topotraj/costs.hpp"
#include "topotraj/lbfgs.hpp"
#include "topotraj/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace topotraj {

/// Shortest piece duration the unconstrained parameterization can reach.
inline constexpr double kMinPieceDuration = 0.01;

/// T = kMinPieceDuration + log(1 + exp(tau)); smooth, strictly increasing, onto (0.01, inf).
double durationFromParam(double tau);
/// Inverse of durationFromParam; throws std::domain_error for T <= kMinPieceDuration.
double paramFromDuration(double duration);
/// dT/dtau = 1 / (1 + exp(-tau)).
double durationDerivative(double tau);

/// Piece count used when a vehicle does not fix one: max(4, ceil(path length / 1.5 m)).
int defaultPieceCount(const VehicleSpec& vehicle);

/// Layout of the stacked decision vector. Each vehicle contributes its
/// interior waypoints (x, y interleaved) followed by one duration parameter per piece.
class DecisionLayout {
public:
    DecisionLayout() = default;
    explicit DecisionLayout(std::vector<int> pieces);
    static DecisionLayout forScenario(const Scenario& scenario);

    int vehicles() const { return static_cast<int>(pieces_.size()); }
    int pieces(int vehicle) const { return pieces_[vehicle]; }
    int offset(int vehicle) const { return offsets_[vehicle]; }
    int size() const { return offsets_.back(); }

private:
    std::vector<int> pieces_;
    std::vector<int> offsets_{0};
};

struct VehicleVariables {
    std::vector<Vec2> waypoints;
    std::vector<double> durations;
};

std::vector<VehicleVariables> decodeVariables(const DecisionLayout& layout, const Eigen::VectorXd& x);
Eigen::VectorXd encodeVariables(const DecisionLayout& layout, const std::vector<VehicleVariables>& vars);
std::vector<Trajectory> decodeTrajectories(const Scenario& scenario, const DecisionLayout& layout,
                                           const Eigen::VectorXd& x);

struct InitOptions {
    double jitter = 0.0;     ///< m, uniform perturbation of interior waypoints
    std::uint64_t seed = 0;
};

/// Waypoints evenly spaced along start -> (init_via) -> goal, durations from a
/// trapezoidal speed profile at 0.8 v_max split evenly over the pieces.
Eigen::VectorXd initialize(const Scenario& scenario, const InitOptions& options = {});

struct SolverOptions {
    LbfgsOptions lbfgs;
    /// Stage 1 ends once every constrained pair has eta * M <= -topology_margin.
    double topology_margin = 0.5;
    bool stage_one_only = false;
    /// Both penalty families from the start with the stage-1 topology weight.
    bool single_stage = false;
    HingeShape hinge = HingeShape::Linear;
    double classification_threshold = kClassificationThreshold;
};

struct StageReport {
    bool ran = false;
    int iterations = 0;
    int evaluations = 0;
    std::string status = "skipped";
    bool topology_satisfied = false;
};

struct PairReport {
    std::string a;
    std::string b;
    Interaction requested = Interaction::None;
    Interaction observed = Interaction::None;
    double metric = 0.0;
    double t_star = 0.0;
    bool satisfied = true;
};

struct FeasibilityAudit {
    double max_speed = 0.0;
    double max_acceleration = 0.0;
    double min_vehicle_distance = 0.0;   ///< inf with fewer than two vehicles
    double min_obstacle_margin = 0.0;    ///< min over pairs of distance / (r_obs + r_vehicle); inf without obstacles
    bool speed_ok = false;
    bool acceleration_ok = false;
    bool distance_ok = false;
    bool ok() const { return speed_ok && acceleration_ok && distance_ok; }
};

struct OptimizationReport {
    StageReport stage1;
    StageReport stage2;
    CostBreakdown costs;
    std::vector<PairReport> pairs;
    bool all_satisfied = false;
    FeasibilityAudit audit;
    bool audit_checked = false;
    double wall_ms = 0.0;
    std::string convergence;
    bool success = false;
};

struct OptimizationResult {
    std::vector<Trajectory> trajectories;
    Eigen::VectorXd x;
    OptimizationReport report;
};

/// Stage 1 drops the collision family and uses the stage-1 topology weight
/// until every requested interaction holds with margin; stage 2 restores
/// collision with the stage-2 weight and runs to convergence.
OptimizationResult twoStageOptimize(const Scenario& scenario, const SolverOptions& options = {},
                                    const Eigen::VectorXd* initial = nullptr);

/// Dense resampling check: 1000 samples per trajectory and per pair window.
FeasibilityAudit auditFeasibility(const Scenario& scenario, const std::vector<Trajectory>& trajectories);

/// Final key-point metric and label of every vehicle pair and every labelled vehicle-obstacle pair.
std::vector<PairReport> reportPairs(const Scenario& scenario, const std::vector<Trajectory>& trajectories,
                                    double threshold = kClassificationThreshold);

}  // namespace topotraj
