#pragma once

#include <Eigen/Dense>

#include <vector>

namespace topotraj {

using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
/// Monomial coefficients of one piece: row r multiplies t^r, columns are x and y.
using PieceCoeffs = Eigen::Matrix<double, 6, 2>;

/// Derivative `order` (0..5) of the monomial basis [1, t, t^2, t^3, t^4, t^5] at t.
Vec6 evalBasis(double t, int order);

struct FlatState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    Vec2 acceleration = Vec2::Zero();
    Vec2 jerk = Vec2::Zero();
};

/// Where an absolute time falls on a trajectory. `parked` is set past the total
/// duration, in which case the state is frozen at the end of the last piece.
struct PieceLocation {
    int piece = 0;
    double local_time = 0.0;
    bool parked = false;
};

/// Piecewise quintic in the plane. Immutable after construction.
class Trajectory {
public:
    Trajectory() = default;
    /// Throws std::invalid_argument on size mismatch, empty input or non-positive durations.
    Trajectory(std::vector<PieceCoeffs> pieces, std::vector<double> durations);

    /// A zero-velocity trajectory holding `position` for `duration` seconds.
    static Trajectory stationary(const Vec2& position, double duration = 1.0);

    int pieceCount() const { return static_cast<int>(pieces_.size()); }
    const PieceCoeffs& coeffs(int piece) const { return pieces_[piece]; }
    const std::vector<PieceCoeffs>& pieces() const { return pieces_; }
    double duration(int piece) const { return durations_[piece]; }
    const std::vector<double>& durations() const { return durations_; }
    double totalDuration() const { return total_; }

    /// Ties at interior joints go to the later piece. Throws std::domain_error for t < 0.
    PieceLocation locate(double t) const;

    FlatState eval(double t) const;
    FlatState evalAt(const PieceLocation& loc) const;

    Vec2 startPosition() const;
    Vec2 endPosition() const;

private:
    std::vector<PieceCoeffs> pieces_;
    std::vector<double> durations_;
    double total_ = 0.0;
};

/// Gradient of a scalar with respect to the coefficient/duration parameters of one trajectory.
struct CoeffGradient {
    std::vector<PieceCoeffs> coeffs;
    Eigen::VectorXd durations;

    CoeffGradient() = default;
    explicit CoeffGradient(int pieces);
    static CoeffGradient zerosLike(const Trajectory& traj) { return CoeffGradient(traj.pieceCount()); }

    CoeffGradient& operator+=(const CoeffGradient& other);
    CoeffGradient& operator*=(double scale);
};

/// Accumulates the gradient of a scalar that depends on the state sampled at `loc`.
/// dp, dv and da are the partials with respect to position, velocity and
/// acceleration at that sample; the sample time itself is held fixed.
void backpropSample(const Trajectory& traj, const PieceLocation& loc, const Vec2& dp, const Vec2& dv,
                    const Vec2& da, CoeffGradient& grad);

/// Length of the path, integrated with a 16-node Gauss-Legendre rule on each piece.
double arcLength(const Trajectory& traj);

/// Closed-form integral of the squared jerk over the whole trajectory.
double jerkEnergy(const Trajectory& traj);

}  // namespace topotraj
