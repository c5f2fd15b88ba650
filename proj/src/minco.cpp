#include "topotraj/minco.hpp"

#include <cmath>
#include <stdexcept>

namespace topotraj {

BandedSystem::BandedSystem(int n, int lower, int upper)
    : n_(n), lower_(lower), upper_(upper), band_(static_cast<std::size_t>(n) * (lower + upper + 1), 0.0) {}

// Column-major band: entry (i, j) lives at row (i - j + upper) of column j.
double& BandedSystem::operator()(int row, int col) {
    return band_[static_cast<std::size_t>(row - col + upper_) * n_ + col];
}

double BandedSystem::operator()(int row, int col) const {
    return band_[static_cast<std::size_t>(row - col + upper_) * n_ + col];
}

void BandedSystem::factorize() {
    auto& a = *this;
    for (int k = 0; k < n_; ++k) {
        const double pivot = a(k, k);
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw std::runtime_error("banded system is singular");
        }
        const int row_end = std::min(k + lower_, n_ - 1);
        const int col_end = std::min(k + upper_, n_ - 1);
        for (int i = k + 1; i <= row_end; ++i) {
            a(i, k) /= pivot;
        }
        for (int j = k + 1; j <= col_end; ++j) {
            const double akj = a(k, j);
            if (akj == 0.0) {
                continue;
            }
            for (int i = k + 1; i <= row_end; ++i) {
                a(i, j) -= a(i, k) * akj;
            }
        }
    }
    factorized_ = true;
}

void BandedSystem::solve(Eigen::MatrixXd& rhs) const {
    if (!factorized_) {
        throw std::logic_error("banded system used before factorization");
    }
    const auto& a = *this;
    for (int i = 0; i < n_; ++i) {
        for (int k = std::max(0, i - lower_); k < i; ++k) {
            rhs.row(i) -= a(i, k) * rhs.row(k);
        }
    }
    for (int i = n_ - 1; i >= 0; --i) {
        for (int j = i + 1; j <= std::min(i + upper_, n_ - 1); ++j) {
            rhs.row(i) -= a(i, j) * rhs.row(j);
        }
        rhs.row(i) /= a(i, i);
    }
}

void BandedSystem::solveTransposed(Eigen::MatrixXd& rhs) const {
    if (!factorized_) {
        throw std::logic_error("banded system used before factorization");
    }
    const auto& a = *this;
    // U^T y = b
    for (int i = 0; i < n_; ++i) {
        for (int k = std::max(0, i - upper_); k < i; ++k) {
            rhs.row(i) -= a(k, i) * rhs.row(k);
        }
        rhs.row(i) /= a(i, i);
    }
    // L^T x = y
    for (int i = n_ - 1; i >= 0; --i) {
        for (int k = i + 1; k <= std::min(i + lower_, n_ - 1); ++k) {
            rhs.row(i) -= a(k, i) * rhs.row(k);
        }
    }
}

namespace {

// A row of the MINCO system that evaluates derivative `order` of piece `piece` at its end.
struct EndRow {
    int row;
    int order;
};

// Rows touching the end of piece i, in the order they are assembled below.
std::vector<EndRow> endRows(int piece, int pieces) {
    if (piece + 1 < pieces) {
        const int r = 6 * piece + 3;
        return {{r, 3}, {r + 1, 4}, {r + 2, 0}, {r + 3, 0}, {r + 4, 1}, {r + 5, 2}};
    }
    const int r = 6 * pieces - 3;
    return {{r, 0}, {r + 1, 1}, {r + 2, 2}};
}

void putEndRow(BandedSystem& a, const EndRow& er, int piece, double duration) {
    const Vec6 b = evalBasis(duration, er.order);
    for (int col = er.order; col < 6; ++col) {
        a(er.row, 6 * piece + col) = b(col);
    }
}

BandedSystem assemble(const std::vector<double>& durations) {
    const int m = static_cast<int>(durations.size());
    BandedSystem a(6 * m, 6, 6);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(2, 2) = 2.0;
    for (int i = 0; i < m; ++i) {
        for (const EndRow& er : endRows(i, m)) {
            putEndRow(a, er, i, durations[i]);
        }
        if (i + 1 < m) {
            // Continuity: subtract the next piece's derivatives at its start.
            const int r = 6 * i + 3;
            const int next = 6 * (i + 1);
            a(r, next + 3) = -6.0;
            a(r + 1, next + 4) = -24.0;
            a(r + 3, next + 0) = -1.0;
            a(r + 4, next + 1) = -1.0;
            a(r + 5, next + 2) = -2.0;
        }
    }
    a.factorize();
    return a;
}

void checkDurations(const std::vector<double>& durations) {
    if (durations.empty()) {
        throw std::domain_error("MINCO needs at least one piece");
    }
    for (double d : durations) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw std::domain_error("MINCO piece durations must be positive and finite");
        }
    }
}

}  // namespace

Trajectory mincoSolve(const BoundaryState& start, const BoundaryState& goal, const std::vector<Vec2>& waypoints,
                      const std::vector<double>& durations) {
    checkDurations(durations);
    const int m = static_cast<int>(durations.size());
    if (static_cast<int>(waypoints.size()) != m - 1) {
        throw std::domain_error("MINCO needs exactly one waypoint per interior joint");
    }
    const BandedSystem a = assemble(durations);

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6 * m, 2);
    b.row(0) = start.position.transpose();
    b.row(1) = start.velocity.transpose();
    b.row(2) = start.acceleration.transpose();
    for (int i = 0; i + 1 < m; ++i) {
        b.row(6 * i + 5) = waypoints[i].transpose();
    }
    b.row(6 * m - 3) = goal.position.transpose();
    b.row(6 * m - 2) = goal.velocity.transpose();
    b.row(6 * m - 1) = goal.acceleration.transpose();
    a.solve(b);

    std::vector<PieceCoeffs> pieces(m);
    for (int i = 0; i < m; ++i) {
        pieces[i] = b.middleRows<6>(6 * i);
    }
    return Trajectory(std::move(pieces), durations);
}

MincoGradient mincoBackprop(const Trajectory& traj, const CoeffGradient& grad) {
    const int m = traj.pieceCount();
    if (static_cast<int>(grad.coeffs.size()) != m || grad.durations.size() != m) {
        throw std::domain_error("gradient shape does not match trajectory");
    }
    const BandedSystem a = assemble(traj.durations());

    Eigen::MatrixXd adj(6 * m, 2);
    for (int i = 0; i < m; ++i) {
        adj.middleRows<6>(6 * i) = grad.coeffs[i];
    }
    a.solveTransposed(adj);

    MincoGradient out;
    out.waypoints.resize(m - 1);
    for (int i = 0; i + 1 < m; ++i) {
        out.waypoints[i] = adj.row(6 * i + 5).transpose();
    }
    // dJ/dT_i = explicit part - adj^T (dA/dT_i) c
    out.durations = grad.durations;
    for (int i = 0; i < m; ++i) {
        const PieceCoeffs& c = traj.coeffs(i);
        for (const EndRow& er : endRows(i, m)) {
            const Vec2 dRow = c.transpose() * evalBasis(traj.duration(i), er.order + 1);
            out.durations(i) -= adj.row(er.row).dot(dRow.transpose());
        }
    }
    return out;
}

}  // namespace topotraj
