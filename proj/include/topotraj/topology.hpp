#pragma once

#include "topotraj/trajectory.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace topotraj {

/// Requested or observed passing direction of one agent around another.
/// The numeric values are the interaction labels used by the topology penalty:
/// a clockwise pair is driven to a non-positive metric, a counterclockwise pair
/// to a non-negative one.
enum class Interaction : int { Counterclockwise = -1, None = 0, Clockwise = 1 };

inline int label(Interaction i) { return static_cast<int>(i); }
Interaction interactionFromLabel(int label);
const char* interactionName(Interaction i);
/// Accepts "clockwise"/"cw"/"1"/"+1", "counterclockwise"/"ccw"/"-1" and "none"/"0".
Interaction parseInteraction(const std::string& text);

/// The planar rotation form [[0, -1], [1, 0]].
const Eigen::Matrix2d& rotationForm();

/// Areal velocity of the relative position: rel_v^T B rel_p.
/// Positive when agent a moves counterclockwise around agent b.
double homotopyMetric(const Vec2& rel_p, const Vec2& rel_v);

/// Symmetric pairwise labels keyed by agent id. Unset pairs read as None.
class InteractionPattern {
public:
    /// Throws std::invalid_argument for a self pair.
    void set(const std::string& a, const std::string& b, Interaction value);
    Interaction get(const std::string& a, const std::string& b) const;
    bool contains(const std::string& a, const std::string& b) const;

    /// Pairs with an explicit label, each once with first < second.
    const std::map<std::pair<std::string, std::string>, Interaction>& entries() const { return labels_; }

private:
    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
    std::map<std::pair<std::string, std::string>, Interaction> labels_;
};

struct TimeWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// [0, longer total duration]; the shorter trajectory is held at its goal.
TimeWindow pairWindow(const Trajectory& a, const Trajectory& b);

/// Closest approach of two trajectories, the point where the local invariant is read.
struct KeyPointSolution {
    double t_star = 0.0;
    PieceLocation loc_a;
    PieceLocation loc_b;
    FlatState state_a;
    FlatState state_b;
    double f_value = 0.0;  ///< squared distance at t_star
    double f_t = 0.0;
    double f_tt = 0.0;
    bool on_boundary = false;

    Vec2 relPosition() const { return state_a.position - state_b.position; }
    Vec2 relVelocity() const { return state_a.velocity - state_b.velocity; }
    Vec2 relAcceleration() const { return state_a.acceleration - state_b.acceleration; }
};

struct ClosestApproachOptions {
    int coarse_samples = 64;
    int max_newton_iterations = 20;
};

/// Global minimum of the squared distance over coarse samples, refined with a
/// damped Newton iteration clamped to the window. Ties go to the earlier time.
/// Throws std::domain_error unless lo < hi.
KeyPointSolution closestApproach(const Trajectory& a, const Trajectory& b, TimeWindow window,
                                 const ClosestApproachOptions& options = {});

/// Derivatives of t_star with respect to both trajectories' coefficients and durations.
struct KeyPointSensitivity {
    CoeffGradient a;
    CoeffGradient b;
};

inline constexpr double kCurvatureFloor = 1e-8;

/// Implicit-function sensitivities of the key-point time. Zero on a window
/// edge or when the curvature of the squared distance is at or below the floor.
KeyPointSensitivity keypointSensitivities(const KeyPointSolution& sol, const Trajectory& a, const Trajectory& b,
                                          double curvature_floor = kCurvatureFloor);

double metricAtKeypoint(const KeyPointSolution& sol);

struct WindingRecord {
    double total_angle = 0.0;  ///< radians, counterclockwise positive
};

/// Sum of the signed angle increments of the relative position over `samples`
/// uniform samples. Throws std::domain_error when the agents coincide at a sample.
WindingRecord windingAngle(const Trajectory& a, const Trajectory& b, TimeWindow window, int samples);

inline constexpr double kClassificationThreshold = 1e-3;

Interaction interactionFromMetric(double metric, double threshold = kClassificationThreshold);

Interaction classifyInteraction(const Trajectory& a, const Trajectory& b, TimeWindow window,
                                double threshold = kClassificationThreshold);

}  // namespace topotraj
