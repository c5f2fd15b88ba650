#include "topotraj/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topotraj {

Interaction interactionFromLabel(int value) {
    switch (value) {
        case -1: return Interaction::Counterclockwise;
        case 0: return Interaction::None;
        case 1: return Interaction::Clockwise;
        default: throw std::invalid_argument("interaction label must be -1, 0 or +1");
    }
}

const char* interactionName(Interaction i) {
    switch (i) {
        case Interaction::Counterclockwise: return "counterclockwise";
        case Interaction::Clockwise: return "clockwise";
        case Interaction::None: break;
    }
    return "none";
}

Interaction parseInteraction(const std::string& text) {
    if (text == "clockwise" || text == "cw" || text == "1" || text == "+1") {
        return Interaction::Clockwise;
    }
    if (text == "counterclockwise" || text == "ccw" || text == "-1") {
        return Interaction::Counterclockwise;
    }
    if (text == "none" || text == "0") {
        return Interaction::None;
    }
    throw std::invalid_argument("unknown interaction '" + text + "'");
}

const Eigen::Matrix2d& rotationForm() {
    static const Eigen::Matrix2d b = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();
    return b;
}

double homotopyMetric(const Vec2& rel_p, const Vec2& rel_v) {
    return rel_v.dot(rotationForm() * rel_p);
}

std::pair<std::string, std::string> InteractionPattern::key(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void InteractionPattern::set(const std::string& a, const std::string& b, Interaction value) {
    if (a == b) {
        throw std::invalid_argument("interaction pattern cannot label a self pair '" + a + "'");
    }
    labels_[key(a, b)] = value;
}

Interaction InteractionPattern::get(const std::string& a, const std::string& b) const {
    const auto it = labels_.find(key(a, b));
    return it == labels_.end() ? Interaction::None : it->second;
}

bool InteractionPattern::contains(const std::string& a, const std::string& b) const {
    return labels_.count(key(a, b)) != 0;
}

TimeWindow pairWindow(const Trajectory& a, const Trajectory& b) {
    return {0.0, std::max(a.totalDuration(), b.totalDuration())};
}

namespace {

KeyPointSolution probe(const Trajectory& a, const Trajectory& b, double t) {
    KeyPointSolution s;
    s.t_star = t;
    s.loc_a = a.locate(t);
    s.loc_b = b.locate(t);
    s.state_a = a.evalAt(s.loc_a);
    s.state_b = b.evalAt(s.loc_b);
    const Vec2 r = s.relPosition();
    const Vec2 rv = s.relVelocity();
    s.f_value = r.squaredNorm();
    s.f_t = 2.0 * r.dot(rv);
    s.f_tt = 2.0 * r.dot(s.relAcceleration()) + 2.0 * rv.squaredNorm();
    return s;
}

}  // namespace

KeyPointSolution closestApproach(const Trajectory& a, const Trajectory& b, TimeWindow window,
                                 const ClosestApproachOptions& options) {
    if (!(window.lo < window.hi) || window.lo < 0.0) {
        throw std::domain_error("closest approach needs a window with 0 <= lo < hi");
    }
    const int n = std::max(2, options.coarse_samples);
    const double spacing = (window.hi - window.lo) / (n - 1);

    KeyPointSolution best = probe(a, b, window.lo);
    for (int j = 1; j < n; ++j) {
        const double t = j + 1 == n ? window.hi : window.lo + spacing * j;
        KeyPointSolution s = probe(a, b, t);
        if (s.f_value < best.f_value) {
            best = s;
        }
    }

    KeyPointSolution cur = best;
    for (int iter = 0; iter < options.max_newton_iterations; ++iter) {
        double step = cur.f_tt > 0.0 ? -cur.f_t / cur.f_tt : (cur.f_t > 0.0 ? -spacing : spacing);
        if (cur.f_t == 0.0) {
            break;
        }
        step = std::clamp(step, -spacing, spacing);
        KeyPointSolution next;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            const double t = std::clamp(cur.t_star + step, window.lo, window.hi);
            if (t == cur.t_star) {
                break;
            }
            next = probe(a, b, t);
            const double slack = 1e-14 * std::max(1.0, cur.f_value);
            if (next.f_value <= cur.f_value + slack) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        const double moved = std::abs(next.t_star - cur.t_star);
        cur = next;
        if (moved <= 1e-15 * std::max(1.0, std::abs(cur.t_star))) {
            break;
        }
    }
    if (cur.f_value > best.f_value) {
        cur = best;
    }
    cur.on_boundary = cur.t_star <= window.lo || cur.t_star >= window.hi;
    return cur;
}

KeyPointSensitivity keypointSensitivities(const KeyPointSolution& sol, const Trajectory& a, const Trajectory& b,
                                          double curvature_floor) {
    if (sol.loc_a.piece >= a.pieceCount() || sol.loc_b.piece >= b.pieceCount()) {
        throw std::domain_error("key point solution does not belong to these trajectories");
    }
    KeyPointSensitivity out{CoeffGradient::zerosLike(a), CoeffGradient::zerosLike(b)};
    if (sol.on_boundary || !(sol.f_tt > curvature_floor)) {
        return out;
    }
    // f_t = 2 r^T r', so its partials w.r.t. the sample are 2 r' (position) and 2 r (velocity).
    const Vec2 r = sol.relPosition();
    const Vec2 rv = sol.relVelocity();
    const double scale = -1.0 / sol.f_tt;
    backpropSample(a, sol.loc_a, 2.0 * rv, 2.0 * r, Vec2::Zero(), out.a);
    backpropSample(b, sol.loc_b, -2.0 * rv, -2.0 * r, Vec2::Zero(), out.b);
    out.a *= scale;
    out.b *= scale;
    return out;
}

double metricAtKeypoint(const KeyPointSolution& sol) {
    return homotopyMetric(sol.relPosition(), sol.relVelocity());
}

WindingRecord windingAngle(const Trajectory& a, const Trajectory& b, TimeWindow window, int samples) {
    if (samples < 2) {
        throw std::invalid_argument("winding angle needs at least two samples");
    }
    auto rel = [&](int j) {
        const double t = j + 1 == samples ? window.hi : window.lo + (window.hi - window.lo) * j / (samples - 1);
        const Vec2 r = a.eval(t).position - b.eval(t).position;
        if (r.x() == 0.0 && r.y() == 0.0) {
            throw std::domain_error("agents coincide at a winding sample");
        }
        return r;
    };
    WindingRecord rec;
    Vec2 prev = rel(0);
    for (int j = 1; j < samples; ++j) {
        const Vec2 cur = rel(j);
        const double cross = prev.x() * cur.y() - prev.y() * cur.x();
        rec.total_angle += std::atan2(cross, prev.dot(cur));
        prev = cur;
    }
    return rec;
}

Interaction interactionFromMetric(double metric, double threshold) {
    if (std::abs(metric) <= threshold) {
        return Interaction::None;
    }
    return metric > 0.0 ? Interaction::Counterclockwise : Interaction::Clockwise;
}

Interaction classifyInteraction(const Trajectory& a, const Trajectory& b, TimeWindow window, double threshold) {
    return interactionFromMetric(metricAtKeypoint(closestApproach(a, b, window)), threshold);
}

}  // namespace topotraj
