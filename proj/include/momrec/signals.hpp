#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "momrec/moments.hpp"
#include "momrec/quadrature.hpp"

namespace momrec {

/// One continuity piece of a synthesized signal.
struct Piece {
    enum class Kind { polynomial, sinusoid, rational, callable };
    Kind kind = Kind::polynomial;

    std::vector<double> poly; // ascending coefficients

    double amp = 0.0, freq = 0.0, phase = 0.0; // amp * sin(freq*x + phase)

    std::vector<double> num, den; // rational num/den, ascending

    std::function<double(double)> fn;

    static Piece polynomial(std::vector<double> coeffs);
    static Piece sinusoid(double amp, double freq, double phase);
    static Piece rational(std::vector<double> num, std::vector<double> den);
    static Piece callable(std::function<double(double)> fn);

    double eval(double x) const;
};

struct PiecewiseSpec {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> breakpoints; // strictly increasing, inside (a,b)
    std::vector<Piece> pieces;       // breakpoints.size() + 1 entries

    void validate() const;
};

/// Linear combination of shifted kernels and kernel derivatives:
/// F(x) = sum_j sum_l amplitudes[j][l] * f^{(l)}(x + shifts[j]).
struct ShiftSpec {
    std::string kernel = "gaussian"; // gaussian | box | dirac | custom
    double sigma = 1.0;              // gaussian width
    std::vector<double> custom_moments;

    std::vector<double> shifts;
    std::vector<std::vector<double>> amplitudes; // [j][l]

    double a = 0.0; // Fourier period, default [0, 2*pi]
    double b = 2.0 * M_PI;

    void validate() const;
    int max_derivative_order() const;

    /// k-th raw moment of the kernel f.
    double kernel_moment(int k) const;
    /// f^{(l)}(x); distributional kernels (box/dirac) only support l == 0.
    double kernel_derivative(int l, double x) const;
    /// Pointwise value of F; `periodized` folds the kernel onto [a,b].
    double evaluate(double x, bool periodized = false) const;
};

/// Exact closed-form moments of a piecewise-polynomial spec.
MomentSequence pp_moments(const PiecewiseSpec& spec, int k_max);

/// Adaptive quadrature moments of any evaluable spec. The parallel version
/// distributes the independent integrals over k across threads and matches
/// the serial reference bit for bit.
MomentSequence quad_moments(const PiecewiseSpec& spec, int k_max, double tol = 1e-12);
MomentSequence quad_moments_serial(const PiecewiseSpec& spec, int k_max, double tol = 1e-12);

/// Exact raw moments of a shift model on the whole line, from kernel moments
/// by binomial shift and integration by parts for the derivative orders.
MomentSequence shift_model_moments(const ShiftSpec& spec, int k_max);

/// mu_k = int F(t) e^{ikt} dt over one period, |k| <= k_range; piecewise
/// signals integrate over [a,b] split at breakpoints, shift models fold the
/// kernel onto the period first.
FourierCoefficients fourier_coefficients(const PiecewiseSpec& spec, int k_range,
                                         double tol = 1e-12);
FourierCoefficients fourier_coefficients_serial(const PiecewiseSpec& spec, int k_range,
                                                double tol = 1e-12);
FourierCoefficients fourier_coefficients(const ShiftSpec& spec, int k_range,
                                         double tol = 1e-12);

/// Pointwise evaluation; breakpoints evaluate to the right limit.
double evaluate(const PiecewiseSpec& spec, double x);
std::vector<double> evaluate(const PiecewiseSpec& spec, std::span<const double> grid);

/// Deterministic random piecewise-polynomial generator for test corpora.
PiecewiseSpec random_piecewise_poly(std::mt19937& rng, int max_degree, int jumps,
                                    double a, double b);

} // namespace momrec
