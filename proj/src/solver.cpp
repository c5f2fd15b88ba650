#include "topotraj/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace topotraj {

double durationFromParam(double tau) {
    return kMinPieceDuration + std::max(tau, 0.0) + std::log1p(std::exp(-std::abs(tau)));
}

double paramFromDuration(double duration) {
    const double y = duration - kMinPieceDuration;
    if (!(y > 0.0)) {
        throw std::domain_error("duration must exceed the minimum piece duration");
    }
    return y + std::log(-std::expm1(-y));
}

double durationDerivative(double tau) {
    if (tau >= 0.0) {
        return 1.0 / (1.0 + std::exp(-tau));
    }
    const double e = std::exp(tau);
    return e / (1.0 + e);
}

namespace {

std::vector<Vec2> guidePolyline(const VehicleSpec& v) {
    std::vector<Vec2> pts{v.start.position};
    if (v.init_via) {
        pts.push_back(*v.init_via);
    }
    pts.push_back(v.goal.position);
    return pts;
}

double polylineLength(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        len += (pts[i] - pts[i - 1]).norm();
    }
    return len;
}

Vec2 pointAlong(const std::vector<Vec2>& pts, double s) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double seg = (pts[i] - pts[i - 1]).norm();
        if (s <= seg || i + 1 == pts.size()) {
            const double u = seg > 0.0 ? std::clamp(s / seg, 0.0, 1.0) : 0.0;
            return pts[i - 1] + u * (pts[i] - pts[i - 1]);
        }
        s -= seg;
    }
    return pts.back();
}

}  // namespace

int defaultPieceCount(const VehicleSpec& vehicle) {
    if (vehicle.pieces > 0) {
        return vehicle.pieces;
    }
    const double len = polylineLength(guidePolyline(vehicle));
    return std::max(4, static_cast<int>(std::ceil(len / 1.5)));
}

DecisionLayout::DecisionLayout(std::vector<int> pieces) : pieces_(std::move(pieces)) {
    for (int m : pieces_) {
        if (m < 1) {
            throw std::invalid_argument("every vehicle needs at least one piece");
        }
        offsets_.push_back(offsets_.back() + 2 * (m - 1) + m);
    }
}

DecisionLayout DecisionLayout::forScenario(const Scenario& scenario) {
    std::vector<int> pieces;
    for (const auto& v : scenario.vehicles) {
        pieces.push_back(defaultPieceCount(v));
    }
    return DecisionLayout(std::move(pieces));
}

std::vector<VehicleVariables> decodeVariables(const DecisionLayout& layout, const Eigen::VectorXd& x) {
    if (x.size() != layout.size()) {
        throw std::invalid_argument("decision vector length does not match the layout");
    }
    std::vector<VehicleVariables> out(layout.vehicles());
    for (int v = 0; v < layout.vehicles(); ++v) {
        const int m = layout.pieces(v);
        int at = layout.offset(v);
        for (int i = 0; i + 1 < m; ++i, at += 2) {
            out[v].waypoints.emplace_back(x(at), x(at + 1));
        }
        for (int i = 0; i < m; ++i, ++at) {
            out[v].durations.push_back(durationFromParam(x(at)));
        }
    }
    return out;
}

Eigen::VectorXd encodeVariables(const DecisionLayout& layout, const std::vector<VehicleVariables>& vars) {
    if (static_cast<int>(vars.size()) != layout.vehicles()) {
        throw std::invalid_argument("one variable set per vehicle expected");
    }
    Eigen::VectorXd x(layout.size());
    for (int v = 0; v < layout.vehicles(); ++v) {
        const int m = layout.pieces(v);
        if (static_cast<int>(vars[v].waypoints.size()) != m - 1 || static_cast<int>(vars[v].durations.size()) != m) {
            throw std::invalid_argument("vehicle variables do not match the layout");
        }
        int at = layout.offset(v);
        for (const Vec2& q : vars[v].waypoints) {
            x(at++) = q.x();
            x(at++) = q.y();
        }
        for (double d : vars[v].durations) {
            x(at++) = paramFromDuration(d);
        }
    }
    return x;
}

std::vector<Trajectory> decodeTrajectories(const Scenario& scenario, const DecisionLayout& layout,
                                           const Eigen::VectorXd& x) {
    const auto vars = decodeVariables(layout, x);
    std::vector<Trajectory> out;
    out.reserve(vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
        const auto& spec = scenario.vehicles[v];
        out.push_back(mincoSolve(spec.start, spec.goal, vars[v].waypoints, vars[v].durations));
    }
    return out;
}

Eigen::VectorXd initialize(const Scenario& scenario, const InitOptions& options) {
    const DecisionLayout layout = DecisionLayout::forScenario(scenario);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double v_cruise = 0.8 * scenario.weights.max_velocity;
    const double acc = scenario.weights.max_acceleration;

    std::vector<VehicleVariables> vars(layout.vehicles());
    for (int v = 0; v < layout.vehicles(); ++v) {
        const auto& spec = scenario.vehicles[v];
        const int m = layout.pieces(v);
        const auto guide = guidePolyline(spec);
        const double len = polylineLength(guide);
        for (int i = 1; i < m; ++i) {
            Vec2 q = pointAlong(guide, len * i / m);
            if (options.jitter > 0.0) {
                q += options.jitter * Vec2(unit(rng), unit(rng));
            }
            vars[v].waypoints.push_back(q);
        }
        double total = len >= v_cruise * v_cruise / acc ? len / v_cruise + v_cruise / acc : 2.0 * std::sqrt(len / acc);
        total = std::max(total, 0.5);
        vars[v].durations.assign(m, total / m);
    }
    return encodeVariables(layout, vars);
}

FeasibilityAudit auditFeasibility(const Scenario& scenario, const std::vector<Trajectory>& trajs) {
    constexpr int kSamples = 1000;
    FeasibilityAudit audit;
    audit.min_vehicle_distance = std::numeric_limits<double>::infinity();
    audit.min_obstacle_margin = std::numeric_limits<double>::infinity();
    for (const auto& t : trajs) {
        for (int j = 0; j <= kSamples; ++j) {
            const FlatState s = t.eval(t.totalDuration() * j / kSamples);
            audit.max_speed = std::max(audit.max_speed, s.velocity.norm());
            audit.max_acceleration = std::max(audit.max_acceleration, s.acceleration.norm());
        }
    }
    const int n = static_cast<int>(trajs.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double w = std::max(trajs[a].totalDuration(), trajs[b].totalDuration());
            for (int j = 0; j <= kSamples; ++j) {
                const double t = w * j / kSamples;
                const double d = (trajs[a].eval(t).position - trajs[b].eval(t).position).norm();
                audit.min_vehicle_distance = std::min(audit.min_vehicle_distance, d);
            }
        }
        for (const auto& o : scenario.obstacles) {
            const double clearance = o.radius + scenario.vehicles[a].radius;
            for (int j = 0; j <= kSamples; ++j) {
                const double t = trajs[a].totalDuration() * j / kSamples;
                const double d = (trajs[a].eval(t).position - o.center).norm();
                audit.min_obstacle_margin = std::min(audit.min_obstacle_margin, d / clearance);
            }
        }
    }
    const auto& w = scenario.weights;
    audit.speed_ok = audit.max_speed <= w.max_velocity * 1.01;
    audit.acceleration_ok = audit.max_acceleration <= w.max_acceleration * 1.05;
    audit.distance_ok = audit.min_vehicle_distance >= w.safe_distance * 0.99 && audit.min_obstacle_margin >= 0.99;
    return audit;
}

std::vector<PairReport> reportPairs(const Scenario& scenario, const std::vector<Trajectory>& trajs,
                                    double threshold) {
    std::vector<PairReport> out;
    auto add = [&](const std::string& ida, const std::string& idb, const Trajectory& a, const Trajectory& b) {
        PairReport p;
        p.a = ida;
        p.b = idb;
        p.requested = scenario.pattern.get(ida, idb);
        const KeyPointSolution sol = closestApproach(a, b, pairWindow(a, b));
        p.metric = metricAtKeypoint(sol);
        p.t_star = sol.t_star;
        p.observed = interactionFromMetric(p.metric, threshold);
        p.satisfied = p.requested == Interaction::None || p.observed == p.requested;
        out.push_back(std::move(p));
    };
    const int n = static_cast<int>(trajs.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            add(scenario.vehicles[i].id, scenario.vehicles[j].id, trajs[i], trajs[j]);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (const auto& o : scenario.obstacles) {
            if (scenario.pattern.get(scenario.vehicles[i].id, o.id) != Interaction::None) {
                add(scenario.vehicles[i].id, o.id, trajs[i], obstacleTrajectory(o));
            }
        }
    }
    return out;
}

namespace {

bool hasConstrainedPair(const Scenario& scenario) {
    for (const auto& [pair, value] : scenario.pattern.entries()) {
        if (value != Interaction::None) {
            return true;
        }
    }
    return false;
}

/// True when every labelled pair has eta * M <= -margin.
bool topologyHolds(const Scenario& scenario, const std::vector<Trajectory>& trajs, double margin) {
    for (const auto& p : reportPairs(scenario, trajs)) {
        if (p.requested != Interaction::None && label(p.requested) * p.metric > -margin) {
            return false;
        }
    }
    return true;
}

struct StageRun {
    Eigen::VectorXd x;
    StageReport report;
};

StageRun runStage(const Scenario& scenario, const DecisionLayout& layout, const Eigen::VectorXd& x0,
                  const StageMask& stage, double topology_weight, double margin, const SolverOptions& options,
                  const ProgressFn& progress) {
    Weights weights = scenario.weights;
    weights.topology = topology_weight;
    const FamilyMask families = FamilyMask::fromStage(stage);
    const ObjectiveOptions objective_options{margin, options.hinge};

    ObjectiveFn objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const auto vars = decodeVariables(layout, x);
        std::vector<Trajectory> trajs;
        trajs.reserve(vars.size());
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto& spec = scenario.vehicles[v];
            trajs.push_back(mincoSolve(spec.start, spec.goal, vars[v].waypoints, vars[v].durations));
        }
        const ObjectiveResult r = totalObjective(scenario, trajs, families, weights, objective_options);
        grad.resize(x.size());
        for (int v = 0; v < layout.vehicles(); ++v) {
            int at = layout.offset(v);
            for (const Vec2& gq : r.gradients[v].waypoints) {
                grad(at++) = gq.x();
                grad(at++) = gq.y();
            }
            for (int i = 0; i < layout.pieces(v); ++i, ++at) {
                grad(at) = r.gradients[v].durations(i) * durationDerivative(x(at));
            }
        }
        return r.costs.total();
    };

    const LbfgsResult res = lbfgsMinimize(objective, x0, options.lbfgs, progress);
    StageRun run{res.x, {}};
    run.report.ran = true;
    run.report.iterations = res.iterations;
    run.report.evaluations = res.evaluations;
    run.report.status = statusName(res.status);
    return run;
}

}  // namespace

OptimizationResult twoStageOptimize(const Scenario& scenario, const SolverOptions& options,
                                    const Eigen::VectorXd* initial) {
    const auto started = std::chrono::steady_clock::now();
    const DecisionLayout layout = DecisionLayout::forScenario(scenario);
    Eigen::VectorXd x = initial ? *initial : initialize(scenario);
    if (x.size() != layout.size()) {
        throw std::invalid_argument("initial decision vector does not match the scenario layout");
    }
    const double margin = options.topology_margin;

    OptimizationResult result;
    OptimizationReport& report = result.report;

    if (options.single_stage) {
        StageRun s = runStage(scenario, layout, x, StageMask{true, true}, scenario.stage_weights.stage1, margin,
                              options, nullptr);
        x = s.x;
        report.stage2 = s.report;
        report.convergence = s.report.status;
    } else {
        // Stage 1: topology without collision, pushed past the margin so the exit test is reachable.
        const bool constrained = hasConstrainedPair(scenario);
        if (!constrained || topologyHolds(scenario, decodeTrajectories(scenario, layout, x), margin)) {
            report.stage1.topology_satisfied = true;
            report.stage1.status = constrained ? "satisfied_at_start" : "no_constrained_pairs";
        } else {
            ProgressFn exit_when_satisfied = [&](const Eigen::VectorXd& xi, double, int) {
                return topologyHolds(scenario, decodeTrajectories(scenario, layout, xi), margin);
            };
            StageRun s = runStage(scenario, layout, x, StageMask{false, true}, scenario.stage_weights.stage1,
                                  2.0 * margin, options, exit_when_satisfied);
            x = s.x;
            report.stage1 = s.report;
            report.stage1.topology_satisfied =
                topologyHolds(scenario, decodeTrajectories(scenario, layout, x), margin);
        }
        report.convergence = report.stage1.status;
        if (!options.stage_one_only) {
            StageRun s = runStage(scenario, layout, x, StageMask{true, true}, scenario.stage_weights.stage2, margin,
                                  options, nullptr);
            x = s.x;
            report.stage2 = s.report;
            report.convergence = s.report.status;
        }
    }

    result.x = x;
    result.trajectories = decodeTrajectories(scenario, layout, x);
    Weights final_weights = scenario.weights;
    final_weights.topology = options.stage_one_only ? scenario.stage_weights.stage1 : scenario.stage_weights.stage2;
    FamilyMask final_families;
    final_families.collision = !options.stage_one_only;
    report.costs = totalObjective(scenario, result.trajectories, final_families, final_weights,
                                  ObjectiveOptions{margin, options.hinge})
                       .costs;
    report.pairs = reportPairs(scenario, result.trajectories, options.classification_threshold);
    report.all_satisfied = std::all_of(report.pairs.begin(), report.pairs.end(),
                                       [](const PairReport& p) { return p.satisfied; });
    report.audit = auditFeasibility(scenario, result.trajectories);
    report.audit_checked = !options.stage_one_only;
    report.success = report.all_satisfied && (!report.audit_checked || report.audit.ok());
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace topotraj
