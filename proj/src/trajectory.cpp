#include "topotraj/trajectory.hpp"

#include "topotraj/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace topotraj {

Vec6 evalBasis(double t, int order) {
    Vec6 b = Vec6::Zero();
    if (order < 0 || order > 5) {
        throw std::invalid_argument("basis derivative order out of range: " + std::to_string(order));
    }
    // d^order/dt^order t^r = r!/(r-order)! t^(r-order)
    for (int r = order; r < 6; ++r) {
        double factor = 1.0;
        for (int m = 0; m < order; ++m) {
            factor *= r - m;
        }
        double power = 1.0;
        for (int m = 0; m < r - order; ++m) {
            power *= t;
        }
        b(r) = factor * power;
    }
    return b;
}

Trajectory::Trajectory(std::vector<PieceCoeffs> pieces, std::vector<double> durations)
    : pieces_(std::move(pieces)), durations_(std::move(durations)) {
    if (pieces_.empty() || pieces_.size() != durations_.size()) {
        throw std::invalid_argument("trajectory needs one duration per piece and at least one piece");
    }
    for (double d : durations_) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw std::invalid_argument("trajectory piece durations must be positive and finite");
        }
        total_ += d;
    }
}

Trajectory Trajectory::stationary(const Vec2& position, double duration) {
    PieceCoeffs c = PieceCoeffs::Zero();
    c.row(0) = position.transpose();
    return Trajectory({c}, {duration});
}

PieceLocation Trajectory::locate(double t) const {
    if (!(t >= 0.0)) {
        throw std::domain_error("trajectory time must be non-negative");
    }
    const int last = pieceCount() - 1;
    if (t > total_) {
        return {last, durations_[last], true};
    }
    double start = 0.0;
    for (int k = 0; k < last; ++k) {
        if (t < start + durations_[k]) {
            return {k, t - start, false};
        }
        start += durations_[k];
    }
    return {last, std::min(t - start, durations_[last]), false};
}

FlatState Trajectory::evalAt(const PieceLocation& loc) const {
    const PieceCoeffs& c = pieces_[loc.piece];
    FlatState s;
    s.position = c.transpose() * evalBasis(loc.local_time, 0);
    if (loc.parked) {
        return s;
    }
    s.velocity = c.transpose() * evalBasis(loc.local_time, 1);
    s.acceleration = c.transpose() * evalBasis(loc.local_time, 2);
    s.jerk = c.transpose() * evalBasis(loc.local_time, 3);
    return s;
}

FlatState Trajectory::eval(double t) const { return evalAt(locate(t)); }

Vec2 Trajectory::startPosition() const { return pieces_.front().row(0).transpose(); }

Vec2 Trajectory::endPosition() const {
    return pieces_.back().transpose() * evalBasis(durations_.back(), 0);
}

CoeffGradient::CoeffGradient(int pieces)
    : coeffs(static_cast<std::size_t>(pieces), PieceCoeffs::Zero()), durations(Eigen::VectorXd::Zero(pieces)) {}

CoeffGradient& CoeffGradient::operator+=(const CoeffGradient& other) {
    if (other.coeffs.size() != coeffs.size()) {
        throw std::invalid_argument("coefficient gradient shape mismatch");
    }
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        coeffs[k] += other.coeffs[k];
    }
    durations += other.durations;
    return *this;
}

CoeffGradient& CoeffGradient::operator*=(double scale) {
    for (auto& c : coeffs) {
        c *= scale;
    }
    durations *= scale;
    return *this;
}

void backpropSample(const Trajectory& traj, const PieceLocation& loc, const Vec2& dp, const Vec2& dv,
                    const Vec2& da, CoeffGradient& grad) {
    const PieceCoeffs& c = traj.coeffs(loc.piece);
    if (loc.parked) {
        // Frozen end state: position = c_last^T beta(T_last), derivatives identically zero.
        grad.coeffs[loc.piece] += evalBasis(loc.local_time, 0) * dp.transpose();
        grad.durations(loc.piece) += dp.dot(c.transpose() * evalBasis(loc.local_time, 1));
        return;
    }
    const Vec6 b0 = evalBasis(loc.local_time, 0);
    const Vec6 b1 = evalBasis(loc.local_time, 1);
    const Vec6 b2 = evalBasis(loc.local_time, 2);
    grad.coeffs[loc.piece] += b0 * dp.transpose() + b1 * dv.transpose() + b2 * da.transpose();
    if (loc.piece == 0) {
        return;
    }
    // local time = t - sum of earlier durations
    const Vec2 vel = c.transpose() * b1;
    const Vec2 acc = c.transpose() * b2;
    const Vec2 jerk = c.transpose() * evalBasis(loc.local_time, 3);
    const double shift = dp.dot(vel) + dv.dot(acc) + da.dot(jerk);
    for (int i = 0; i < loc.piece; ++i) {
        grad.durations(i) -= shift;
    }
}

double arcLength(const Trajectory& traj) {
    const auto& rule = gaussLegendre16();
    double length = 0.0;
    for (int k = 0; k < traj.pieceCount(); ++k) {
        const double T = traj.duration(k);
        double piece = 0.0;
        for (int n = 0; n < kQuadratureNodes; ++n) {
            const Vec2 v = traj.coeffs(k).transpose() * evalBasis(rule.nodes[n] * T, 1);
            piece += rule.weights[n] * v.norm();
        }
        length += piece * T;
    }
    return length;
}

double jerkEnergy(const Trajectory& traj) {
    double energy = 0.0;
    for (int k = 0; k < traj.pieceCount(); ++k) {
        const double T = traj.duration(k);
        const auto& c = traj.coeffs(k);
        const double T2 = T * T;
        const double T3 = T2 * T;
        const double T4 = T3 * T;
        const double T5 = T4 * T;
        for (int dim = 0; dim < 2; ++dim) {
            const double c3 = c(3, dim);
            const double c4 = c(4, dim);
            const double c5 = c(5, dim);
            energy += 36.0 * c3 * c3 * T + 144.0 * c3 * c4 * T2 + 240.0 * c3 * c5 * T3 +
                      192.0 * c4 * c4 * T3 + 720.0 * c4 * c5 * T4 + 720.0 * c5 * c5 * T5;
        }
    }
    return energy;
}

}  // namespace topotraj
