#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "momrec/moments.hpp"

namespace momrec {

struct QuadratureOptions {
    /// Absolute tolerance; acceptance is floored at roundoff relative to the
    /// running estimate so that large-magnitude integrands remain integrable.
    double tol = 1e-12;
    int max_depth = 48;
    int points = 12; // Gauss-Legendre points per panel (doubled for the error estimate)
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

/// Adaptive Gauss-Legendre integration of f over [a,b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               const QuadratureOptions& opts = {});

/// Integrates over [a,b] split at the given interior breakpoints.
double integrate_segmented(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts = {});

cplx integrate_segmented(const std::function<cplx(double)>& f, double a, double b,
                         std::span<const double> breakpoints,
                         const QuadratureOptions& opts = {});

} // namespace momrec
