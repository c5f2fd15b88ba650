#include "topotraj/gradcheck.hpp"

#include "topotraj/costs.hpp"
#include "topotraj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace topotraj {

double GradcheckReport::worst() const {
    double w = 0.0;
    for (const auto& f : families) {
        w = std::max(w, f.worst_relative_error);
    }
    return w;
}

namespace {

struct Family {
    const char* name;
    FamilyMask mask;
};

const Family kFamilies[] = {
    {"effort", {true, false, false, false, false}},
    {"time", {false, true, false, false, false}},
    {"kinodynamic", {false, false, true, false, false}},
    {"collision", {false, false, false, true, false}},
    {"topology", {false, false, false, false, true}},
};

}  // namespace

GradcheckReport gradcheck(const Scenario& scenario, const GradcheckOptions& options) {
    if (options.samples < 1) {
        throw std::invalid_argument("gradcheck needs at least one sample");
    }
    const DecisionLayout layout = DecisionLayout::forScenario(scenario);
    const Eigen::VectorXd base = initialize(scenario);
    Weights weights = scenario.weights;
    weights.topology = scenario.stage_weights.stage2;
    const ObjectiveOptions objective_options{options.topology_activation, HingeShape::Linear};

    auto evaluate = [&](const FamilyMask& mask, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const auto trajs = decodeTrajectories(scenario, layout, x);
        const ObjectiveResult r = totalObjective(scenario, trajs, mask, weights, objective_options);
        if (grad) {
            grad->resize(x.size());
            for (int v = 0; v < layout.vehicles(); ++v) {
                int at = layout.offset(v);
                for (const Vec2& gq : r.gradients[v].waypoints) {
                    (*grad)(at++) = gq.x();
                    (*grad)(at++) = gq.y();
                }
                for (int i = 0; i < layout.pieces(v); ++i, ++at) {
                    (*grad)(at) = r.gradients[v].durations(i) * durationDerivative(x(at));
                }
            }
        }
        return r.costs.total();
    };

    GradcheckReport report;
    for (const auto& f : kFamilies) {
        report.families.push_back({f.name, 0.0});
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double h = options.step;
    const int max_attempts = 20 * options.samples;

    int attempts = 0;
    while (report.samples < options.samples) {
        if (attempts++ >= max_attempts) {
            throw std::runtime_error("gradcheck could not find enough kink-free samples");
        }
        Eigen::VectorXd x = base;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x(i) += options.perturbation * unit(rng);
        }
        std::vector<double> errors;
        bool kink = false;
        for (const auto& f : kFamilies) {
            Eigen::VectorXd analytic;
            const double f0 = evaluate(f.mask, x, &analytic);
            Eigen::VectorXd numeric(x.size());
            for (Eigen::Index i = 0; i < x.size() && !kink; ++i) {
                Eigen::VectorXd xp = x;
                Eigen::VectorXd xm = x;
                xp(i) += h;
                xm(i) -= h;
                const double fp = evaluate(f.mask, xp, nullptr);
                const double fm = evaluate(f.mask, xm, nullptr);
                numeric(i) = (fp - fm) / (2.0 * h);
                const double forward = (fp - f0) / h;
                const double backward = (f0 - fm) / h;
                // A one-sided slope mismatch far beyond curvature effects means a kink in the stencil.
                if (std::abs(forward - backward) > 0.05 * std::max({std::abs(forward), std::abs(backward), 1.0})) {
                    kink = true;
                }
            }
            if (kink) {
                break;
            }
            const double scale = std::max(numeric.lpNorm<Eigen::Infinity>(), 1e-8);
            errors.push_back((analytic - numeric).lpNorm<Eigen::Infinity>() / scale);
        }
        if (kink) {
            ++report.resampled;
            continue;
        }
        for (std::size_t k = 0; k < errors.size(); ++k) {
            report.families[k].worst_relative_error = std::max(report.families[k].worst_relative_error, errors[k]);
        }
        ++report.samples;
    }
    return report;
}

}  // namespace topotraj
