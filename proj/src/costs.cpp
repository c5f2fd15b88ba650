#include "topotraj/costs.hpp"

#include "topotraj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace topotraj {

SingleCost effortCost(const Trajectory& traj) {
    SingleCost out{jerkEnergy(traj), CoeffGradient::zerosLike(traj)};
    for (int k = 0; k < traj.pieceCount(); ++k) {
        const double T = traj.duration(k);
        const double T2 = T * T;
        const double T3 = T2 * T;
        const double T4 = T3 * T;
        const double T5 = T4 * T;
        Eigen::Matrix3d q;
        q << 36.0 * T, 72.0 * T2, 120.0 * T3,
             72.0 * T2, 192.0 * T3, 360.0 * T4,
             120.0 * T3, 360.0 * T4, 720.0 * T5;
        const auto& c = traj.coeffs(k);
        out.grad.coeffs[k].bottomRows<3>() = 2.0 * q * c.bottomRows<3>();
        const Vec2 jerk = c.transpose() * evalBasis(T, 3);
        out.grad.durations(k) = jerk.squaredNorm();
    }
    return out;
}

double timeCost(const std::vector<double>& durations, double weight, Eigen::VectorXd* grad) {
    double total = 0.0;
    for (double d : durations) {
        total += d;
    }
    if (grad) {
        *grad = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(durations.size()), weight);
    }
    return weight * total;
}

SingleCost kinodynamicPenalty(const Trajectory& traj, double max_velocity, double max_acceleration) {
    const auto& rule = gaussLegendre16();
    const double v2max = max_velocity * max_velocity;
    const double a2max = max_acceleration * max_acceleration;
    SingleCost out{0.0, CoeffGradient::zerosLike(traj)};
    for (int k = 0; k < traj.pieceCount(); ++k) {
        const double T = traj.duration(k);
        const auto& c = traj.coeffs(k);
        for (int n = 0; n < kQuadratureNodes; ++n) {
            const double alpha = rule.nodes[n];
            const double s = alpha * T;
            const Vec6 b1 = evalBasis(s, 1);
            const Vec6 b2 = evalBasis(s, 2);
            const Vec2 vel = c.transpose() * b1;
            const Vec2 acc = c.transpose() * b2;
            const double hv = std::max(vel.squaredNorm() - v2max, 0.0);
            const double ha = std::max(acc.squaredNorm() - a2max, 0.0);
            if (hv == 0.0 && ha == 0.0) {
                continue;
            }
            const Vec2 jerk = c.transpose() * evalBasis(s, 3);
            const double node = rule.weights[n] * T;
            const double phi = hv * hv * hv + ha * ha * ha;
            out.value += node * phi;
            // d phi / d vel and d phi / d acc
            const Vec2 dvel = 6.0 * hv * hv * vel;
            const Vec2 dacc = 6.0 * ha * ha * acc;
            out.grad.coeffs[k] += node * (b1 * dvel.transpose() + b2 * dacc.transpose());
            out.grad.durations(k) += rule.weights[n] * phi + node * alpha * (dvel.dot(acc) + dacc.dot(jerk));
        }
    }
    return out;
}

int collisionSampleCount(double duration) {
    return std::max(64, static_cast<int>(std::ceil(32.0 * duration)));
}

PairCost collisionPenalty(const Trajectory& a, const Trajectory& b, double safe_distance) {
    PairCost out{0.0, CoeffGradient::zerosLike(a), CoeffGradient::zerosLike(b)};
    const double d2 = safe_distance * safe_distance;
    const bool a_longer = a.totalDuration() >= b.totalDuration();
    const double window = a_longer ? a.totalDuration() : b.totalDuration();
    const int n = collisionSampleCount(window);
    const double h = window / n;

    // Derivative of the cost with respect to the window length.
    double dwindow = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double t = j == n ? window : h * j;
        const PieceLocation la = a.locate(t);
        const PieceLocation lb = b.locate(t);
        const FlatState sa = a.evalAt(la);
        const FlatState sb = b.evalAt(lb);
        const Vec2 r = sa.position - sb.position;
        const double viol = d2 - r.squaredNorm();
        if (viol <= 0.0) {
            continue;
        }
        const double frac = (j == 0 || j == n) ? 0.5 : 1.0;
        const double w = frac * h;
        const double phi = viol * viol * viol;
        out.value += w * phi;
        const Vec2 dr = w * (-6.0 * viol * viol) * r;
        backpropSample(a, la, dr, Vec2::Zero(), Vec2::Zero(), out.grad_a);
        backpropSample(b, lb, -dr, Vec2::Zero(), Vec2::Zero(), out.grad_b);
        // sample time t = (j / n) * window, weight w = frac * window / n
        const Vec2 rv = sa.velocity - sb.velocity;
        dwindow += dr.dot(rv) * (static_cast<double>(j) / n) + frac * phi / n;
    }
    CoeffGradient& longer = a_longer ? out.grad_a : out.grad_b;
    longer.durations.array() += dwindow;
    return out;
}

PairCost topologyPenalty(const KeyPointSolution& sol, const KeyPointSensitivity& sens, Interaction eta,
                         const Trajectory& a, const Trajectory& b, double margin, HingeShape shape) {
    PairCost out{0.0, CoeffGradient::zerosLike(a), CoeffGradient::zerosLike(b)};
    const double e = label(eta);
    if (e == 0.0) {
        return out;
    }
    const double metric = metricAtKeypoint(sol);
    const double active = e * metric + margin;
    if (!(active > 0.0)) {
        return out;
    }
    double scale = e;
    if (shape == HingeShape::Cubic) {
        out.value = active * active * active;
        scale = 3.0 * active * active * e;
    } else {
        out.value = active;
    }

    const Eigen::Matrix2d& rot = rotationForm();
    const Vec2 r = sol.relPosition();
    const Vec2 rv = sol.relVelocity();
    const Vec2 ra = sol.relAcceleration();
    const Vec2 dM_dp = rot.transpose() * rv;
    const Vec2 dM_dv = rot * r;
    // The second term is rv^T B rv, zero for any rv.
    const double dM_dt = ra.dot(rot * r) + rv.dot(rot * rv);

    backpropSample(a, sol.loc_a, scale * dM_dp, scale * dM_dv, Vec2::Zero(), out.grad_a);
    backpropSample(b, sol.loc_b, -scale * dM_dp, -scale * dM_dv, Vec2::Zero(), out.grad_b);
    CoeffGradient via_a = sens.a;
    CoeffGradient via_b = sens.b;
    via_a *= scale * dM_dt;
    via_b *= scale * dM_dt;
    out.grad_a += via_a;
    out.grad_b += via_b;
    return out;
}

Trajectory obstacleTrajectory(const Obstacle& obstacle) {
    // Short enough never to extend a pair window.
    return Trajectory::stationary(obstacle.center, 1e-6);
}

ObjectiveResult totalObjective(const Scenario& scenario, const std::vector<Trajectory>& trajs,
                               const FamilyMask& families, const Weights& weights, const ObjectiveOptions& options) {
    const int n = static_cast<int>(scenario.vehicles.size());
    if (static_cast<int>(trajs.size()) != n) {
        throw std::invalid_argument("objective needs one trajectory per vehicle");
    }
    ObjectiveResult result;
    std::vector<CoeffGradient> grads;
    grads.reserve(n);
    for (const auto& t : trajs) {
        grads.push_back(CoeffGradient::zerosLike(t));
    }
    CostBreakdown& costs = result.costs;

    for (int i = 0; i < n; ++i) {
        if (families.effort) {
            const SingleCost e = effortCost(trajs[i]);
            costs.effort += e.value;
            grads[i] += e.grad;
        }
        if (families.time) {
            Eigen::VectorXd g;
            costs.time += timeCost(trajs[i].durations(), weights.time, &g);
            grads[i].durations += g;
        }
        if (families.kinodynamic && weights.kinodynamic > 0.0) {
            SingleCost k = kinodynamicPenalty(trajs[i], weights.max_velocity, weights.max_acceleration);
            costs.kinodynamic += weights.kinodynamic * k.value;
            k.grad *= weights.kinodynamic;
            grads[i] += k.grad;
        }
    }

    std::vector<Trajectory> obstacles;
    obstacles.reserve(scenario.obstacles.size());
    for (const auto& o : scenario.obstacles) {
        obstacles.push_back(obstacleTrajectory(o));
    }

    if (families.collision && weights.collision > 0.0) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                PairCost c = collisionPenalty(trajs[i], trajs[j], weights.safe_distance);
                costs.collision += weights.collision * c.value;
                c.grad_a *= weights.collision;
                c.grad_b *= weights.collision;
                grads[i] += c.grad_a;
                grads[j] += c.grad_b;
            }
        }
        for (int i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < obstacles.size(); ++o) {
                const double clearance = scenario.obstacles[o].radius + scenario.vehicles[i].radius;
                PairCost c = collisionPenalty(trajs[i], obstacles[o], clearance);
                costs.collision += weights.collision * c.value;
                c.grad_a *= weights.collision;
                grads[i] += c.grad_a;
            }
        }
    }

    if (families.topology && weights.topology > 0.0) {
        auto addPair = [&](const Trajectory& a, const Trajectory& b, Interaction eta, CoeffGradient& ga,
                           CoeffGradient* gb) {
            const KeyPointSolution sol = closestApproach(a, b, pairWindow(a, b));
            const KeyPointSensitivity sens = keypointSensitivities(sol, a, b);
            PairCost g = topologyPenalty(sol, sens, eta, a, b, options.topology_margin, options.hinge);
            if (g.value == 0.0) {
                return;
            }
            costs.topology += weights.topology * g.value;
            g.grad_a *= weights.topology;
            ga += g.grad_a;
            if (gb) {
                g.grad_b *= weights.topology;
                *gb += g.grad_b;
            }
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const Interaction eta = scenario.pattern.get(scenario.vehicles[i].id, scenario.vehicles[j].id);
                if (eta != Interaction::None) {
                    addPair(trajs[i], trajs[j], eta, grads[i], &grads[j]);
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < obstacles.size(); ++o) {
                const Interaction eta = scenario.pattern.get(scenario.vehicles[i].id, scenario.obstacles[o].id);
                if (eta != Interaction::None) {
                    addPair(trajs[i], obstacles[o], eta, grads[i], nullptr);
                }
            }
        }
    }

    result.gradients.reserve(n);
    for (int i = 0; i < n; ++i) {
        result.gradients.push_back(mincoBackprop(trajs[i], grads[i]));
    }
    return result;
}

}  // namespace topotraj
