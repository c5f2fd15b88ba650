#pragma once

#include "topotraj/trajectory.hpp"

#include <vector>

namespace topotraj {

struct BoundaryState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    Vec2 acceleration = Vec2::Zero();
};

/// Square banded matrix with in-place LU factorization (no pivoting).
class BandedSystem {
public:
    BandedSystem(int n, int lower, int upper);

    double& operator()(int row, int col);
    double operator()(int row, int col) const;

    void factorize();
    /// Solves A X = B in place.
    void solve(Eigen::MatrixXd& rhs) const;
    /// Solves A^T X = B in place.
    void solveTransposed(Eigen::MatrixXd& rhs) const;

private:
    int n_;
    int lower_;
    int upper_;
    bool factorized_ = false;
    std::vector<double> band_;
};

/// Minimum-jerk piecewise quintic through the interior waypoints with the given
/// piece durations, matching position/velocity/acceleration at both ends and
/// continuous up to the fourth derivative at every joint.
///
/// `waypoints` holds durations.size() - 1 points. Throws std::domain_error on a
/// non-positive duration or a size mismatch.
Trajectory mincoSolve(const BoundaryState& start, const BoundaryState& goal, const std::vector<Vec2>& waypoints,
                      const std::vector<double>& durations);

struct MincoGradient {
    std::vector<Vec2> waypoints;
    Eigen::VectorXd durations;
};

/// Maps dJ/dc (per piece) and explicit dJ/dT through the MINCO linear map to
/// gradients with respect to the interior waypoints and the piece durations.
/// `traj` must come from mincoSolve.
MincoGradient mincoBackprop(const Trajectory& traj, const CoeffGradient& grad);

}  // namespace topotraj
