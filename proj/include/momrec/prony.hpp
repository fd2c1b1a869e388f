#pragma once

#include <span>
#include <vector>

#include "momrec/convdual.hpp"
#include "momrec/moments.hpp"

namespace momrec {

struct PronyOptions {
    double node_sep_tol = 1e-6;   // coincident recovered nodes trigger a confluent re-solve
    double hankel_rank_tol = 1e-10;
    double circle_tol = 1e-3;     // Fourier nodes must sit this close to the unit circle
    double zero_node_tol = 1e-8;  // confluent amplitudes are undefined for nodes at 0
    double condition_cap = 1e12;
};

/// Recovered nodes and per-derivative-order amplitudes: the model
/// sum_j sum_l amplitudes[j][l] * d^l/dx^l applied to the node power basis,
/// i.e. M_k = sum_j sum_l amplitudes[j][l] * k(k-1)...(k-l+1) * nodes_j^{k-l}.
struct PronySolution {
    std::vector<cplx> nodes;
    std::vector<std::vector<cplx>> amplitudes;
    double residual = 0.0;

    int order() const { return static_cast<int>(nodes.size()); }
    int max_derivative_order() const;
};

enum class MeasurementDomain { moments, fourier };

struct ShiftModel {
    KernelSpec kernel;
    PronySolution solution;
    std::vector<double> shifts; // x_j = -arg(rho_j) in [0, 2*pi), sorted
    MeasurementDomain domain = MeasurementDomain::fourier;
};

/// Plain generalized Prony solve: nodes from the Hankel recurrence, amplitudes
/// by least squares over all supplied moments. Coincident nodes collapse
/// automatically into a confluent solve with reduced node count.
PronySolution solve_prony(const MomentSequence& M, int s, const PronyOptions& opts = {});

/// Numerical rank of the s_max x s_max Hankel matrix of M - the model order.
int estimate_order(const MomentSequence& M, int s_max, double tol = 1e-10);

/// Derivative (confluent) model of uniform order r: every node carries
/// amplitudes a_{j,0..r}. Nodes come from the degree-s(r+1) recurrence with
/// clusters collapsed; amplitudes are solved in the partial-fraction basis of
/// the rational generating function and mapped back through the per-node
/// lower-triangular relation.
PronySolution solve_prony_confluent(const MomentSequence& M, int s, int r,
                                    const PronyOptions& opts = {});

/// Per-node triangular maps between derivative-model amplitudes a_{j,l} and
/// the partial-fraction coefficients b_{j,q} of the generating function
/// sum_q b_q / (1 - x z)^{q+1}. Exposed for verification.
std::vector<cplx> amplitudes_to_partial_fractions(std::span<const cplx> a, cplx node);
std::vector<cplx> partial_fractions_to_amplitudes(std::span<const cplx> b, cplx node);

/// Fourier variant: nodes projected onto the unit circle, shifts recovered as
/// x_j = -arg(rho_j) normalized to [0, 2*pi).
ShiftModel solve_fourier_shifts(const MomentSequence& M, int s, const PronyOptions& opts = {},
                                const KernelSpec& kernel = KernelSpec::dirac());

/// First `terms` Taylor coefficients of the (confluent) rational generating
/// function of the solution; reproduces the moment sequence the solution was
/// derived from.
std::vector<cplx> generating_series(const PronySolution& sol, int terms);

} // namespace momrec
