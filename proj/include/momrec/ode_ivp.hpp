#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace momrec {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-13;
    double initial_step = 0.0; // 0 = automatic
    double min_step = 1e-14;
    long max_steps = 2'000'000;
};

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0, recording
/// the state at each target point. Targets must be strictly monotone and lie
/// on one side of t0 (either direction).
std::vector<Eigen::VectorXd> integrate_to_points(const OdeRhs& f, double t0,
                                                 const Eigen::VectorXd& y0,
                                                 std::span<const double> targets,
                                                 const OdeOptions& opts = {});

} // namespace momrec
