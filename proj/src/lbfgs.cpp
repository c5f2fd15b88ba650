#include "topotraj/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace topotraj {

const char* statusName(LbfgsStatus status) {
    switch (status) {
        case LbfgsStatus::GradientTolerance: return "gradient_tolerance";
        case LbfgsStatus::RelativeDecrease: return "relative_decrease";
        case LbfgsStatus::MaxIterations: return "max_iterations";
        case LbfgsStatus::Stopped: return "stopped";
        case LbfgsStatus::LineSearchFailed: return "line_search_failed";
        case LbfgsStatus::NonFiniteStart: return "non_finite_start";
    }
    return "unknown";
}

namespace {

bool finite(double f, const Eigen::VectorXd& g) { return std::isfinite(f) && g.allFinite(); }

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

}  // namespace

LbfgsResult lbfgsMinimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0, const LbfgsOptions& options,
                          const ProgressFn& progress) {
    if (options.memory < 1 || options.max_iterations < 0) {
        throw std::invalid_argument("invalid L-BFGS options");
    }
    const auto& ls = options.line_search;
    LbfgsResult res;
    res.x = x0;
    Eigen::VectorXd g(x0.size());
    res.f = objective(res.x, g);
    res.evaluations = 1;
    if (!finite(res.f, g)) {
        res.status = LbfgsStatus::NonFiniteStart;
        return res;
    }
    if (g.size() == 0 || g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
        res.status = LbfgsStatus::GradientTolerance;
        return res;
    }

    std::deque<CurvaturePair> memory;
    std::deque<double> history{res.f};
    Eigen::VectorXd d = -g;
    double step = 1.0 / std::max(1.0, d.norm());
    Eigen::VectorXd x_trial(x0.size());
    Eigen::VectorXd g_trial(x0.size());

    while (res.iterations < options.max_iterations) {
        double dg0 = g.dot(d);
        if (!(dg0 < 0.0)) {
            // Not a descent direction: restart from steepest descent.
            memory.clear();
            d = -g;
            dg0 = g.dot(d);
            step = 1.0 / std::max(1.0, d.norm());
        }

        // Weak Wolfe bracketing (bisection / doubling).
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        bool accepted = false;
        double f_trial = 0.0;
        for (int k = 0; k < ls.max_evaluations; ++k) {
            x_trial = res.x + step * d;
            f_trial = objective(x_trial, g_trial);
            ++res.evaluations;
            if (!finite(f_trial, g_trial) || f_trial > res.f + ls.armijo * step * dg0) {
                hi = step;
            } else if (g_trial.dot(d) < ls.curvature * dg0) {
                lo = step;
            } else {
                accepted = true;
                break;
            }
            step = std::isfinite(hi) ? 0.5 * (lo + hi) : std::min(2.0 * step, ls.max_step);
        }
        if (!accepted) {
            // Accept the best sufficient-decrease point if the curvature test never passed.
            if (lo > 0.0) {
                x_trial = res.x + lo * d;
                f_trial = objective(x_trial, g_trial);
                ++res.evaluations;
                accepted = finite(f_trial, g_trial) && f_trial <= res.f + ls.armijo * lo * dg0;
                step = lo;
            }
            if (!accepted) {
                res.status = LbfgsStatus::LineSearchFailed;
                return res;
            }
        }

        CurvaturePair pair{x_trial - res.x, g_trial - g, 0.0};
        res.x = x_trial;
        res.f = f_trial;
        g = g_trial;
        ++res.iterations;

        const double sy = pair.s.dot(pair.y);
        if (sy > std::numeric_limits<double>::epsilon() * pair.y.squaredNorm()) {
            pair.rho = 1.0 / sy;
            memory.push_back(std::move(pair));
            if (static_cast<int>(memory.size()) > options.memory) {
                memory.pop_front();
            }
        }

        if (progress && progress(res.x, res.f, res.iterations)) {
            res.status = LbfgsStatus::Stopped;
            return res;
        }
        if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
            res.status = LbfgsStatus::GradientTolerance;
            return res;
        }
        history.push_back(res.f);
        if (static_cast<int>(history.size()) > options.past) {
            const double past = history.front();
            history.pop_front();
            if ((past - res.f) / std::max(1.0, std::abs(res.f)) < options.relative_tolerance) {
                res.status = LbfgsStatus::RelativeDecrease;
                return res;
            }
        }

        // Two-loop recursion.
        d = -g;
        std::vector<double> alpha(memory.size());
        for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
            alpha[i] = memory[i].rho * memory[i].s.dot(d);
            d -= alpha[i] * memory[i].y;
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            d *= 1.0 / (last.rho * last.y.squaredNorm());
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const double beta = memory[i].rho * memory[i].y.dot(d);
            d += (alpha[i] - beta) * memory[i].s;
        }
        step = 1.0;
    }
    res.status = LbfgsStatus::MaxIterations;
    return res;
}

}  // namespace topotraj
