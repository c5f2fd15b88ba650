#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace topotraj {

/// Returns the objective at x and writes its gradient.
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Called after every accepted iterate; returning true stops the run.
using ProgressFn = std::function<bool(const Eigen::VectorXd& x, double f, int iteration)>;

struct LineSearchOptions {
    double armijo = 1e-4;
    double curvature = 0.9;
    int max_evaluations = 60;
    double max_step = 1e20;
};

struct LbfgsOptions {
    int memory = 8;
    int max_iterations = 300;
    double gradient_tolerance = 1e-5;  ///< on the infinity norm
    double relative_tolerance = 1e-6;  ///< cost decrease over `past` iterations, relative
    int past = 3;
    LineSearchOptions line_search;
};

enum class LbfgsStatus {
    GradientTolerance,
    RelativeDecrease,
    MaxIterations,
    Stopped,
    LineSearchFailed,
    NonFiniteStart,
};

const char* statusName(LbfgsStatus status);

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStatus status = LbfgsStatus::MaxIterations;
};

/// Limited-memory BFGS with a weak-Wolfe bracketing line search. Curvature
/// pairs with non-positive s^T y are discarded. Non-finite trial values are
/// treated as failed sufficient-decrease checks and shrink the step.
LbfgsResult lbfgsMinimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0, const LbfgsOptions& options = {},
                          const ProgressFn& progress = nullptr);

}  // namespace topotraj
