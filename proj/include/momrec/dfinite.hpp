#pragma once

#include <span>
#include <string>
#include <vector>

#include "momrec/moments.hpp"
#include "momrec/ode_ivp.hpp"
#include "momrec/polyalg.hpp"

namespace momrec {

/// Linear differential operator sum_j p_j(x) d^j/dx^j with polynomial
/// coefficients, stored as one polynomial per derivative order.
struct DifferentialOperator {
    std::vector<Polynomial> p; // j = 0..N; raw coefficient slots preserve layout

    int order() const { return static_cast<int>(p.size()) - 1; }
    std::vector<int> layout_degrees() const;
    int unknowns() const;

    /// Reshapes a stacked coefficient vector (j-major, ascending power) laid
    /// out by `degs` into the operator.
    static DifferentialOperator from_vector(const Eigen::VectorXd& v,
                                            std::span<const int> degs);
    Eigen::VectorXd to_vector() const;

    /// Scales to unit Euclidean norm with a canonical sign (largest
    /// coefficient positive).
    void normalize();
};

struct PiCoefficient {
    double value = 0.0;
    int shift = 0;
};

/// Theorem coefficient of the moment image of x^i d^j/dx^j:
/// value = (-1)^j (i+k)(i+k-1)...(i+k-j+1), shift = i-j, meaning the term
/// value * m_{k+i-j}. The falling factorial vanishes exactly when the shifted
/// index would be negative.
PiCoefficient pi_coefficient(int i, int j, int k);

/// (E - a)^N (E - b)^N as a polynomial in the forward shift E.
Polynomial boundary_operator(double a, double b, int N);

/// v^{(i,j)}_k = sum_t L_t * pi(i,j,k+t).value * m_{k+t+i-j}; the boundary
/// operator acts outermost, so pi's polynomial-in-k coefficient is evaluated
/// at the shifted index.
double v_entry(const MomentSequence& m, int i, int j, int k, const Polynomial& L);

/// Cancellation-free magnitude sum_t |L_t * pi * m| of the same entry; deep
/// recurrence rows cancel by many orders of magnitude, and weighting each row
/// by this scale keeps their roundoff from polluting the nullspace.
double v_entry_magnitude(const MomentSequence& m, int i, int j, int k, const Polynomial& L);

/// Moment-side annihilator system: rows x sum(degs[j]+1) matrix with columns
/// ordered j-major (a_{0,0}, a_{1,0}, ..., a_{deg_N,N}); row k holds the
/// v^{(i,j)}_k entries.
DenseMatrix annihilator_matrix(const MomentSequence& m, int N, std::span<const int> degs,
                               double a, double b, int rows);

struct AnnihilatorSolution {
    DifferentialOperator op;
    int nullspace_dim = 0;
    double sigma_ratio = 0.0; // smallest/largest singular value of the row-equilibrated H
};

/// Smallest-singular-vector solve of H a = 0. Rows are scaled before the SVD
/// (exact nullspace unchanged): by `row_scales` when provided (normally the
/// v_entry_magnitude of each row), otherwise by the row maximum.
/// EmptyNullspace when the matrix is numerically full rank; a dimension > 1
/// is surfaced, not an error.
AnnihilatorSolution solve_annihilator(const DenseMatrix& H, std::span<const int> degs,
                                      double rank_tol = 1e-10,
                                      std::span<const double> row_scales = {});

struct JumpExtraction {
    std::vector<double> jumps;
    DifferentialOperator reduced;
    double max_deflation_residual = 0.0;
    std::vector<cplx> rejected; // common roots outside (a,b) or off the real axis
};

/// Factors the multiplicity-N common roots inside (a,b) out of every
/// polynomial coefficient; exactly p roots must qualify. tol <= 0 selects the
/// default clustering radius 0.02 * max(1, b-a).
JumpExtraction extract_jumps(const DifferentialOperator& op, int N, int p, double a,
                             double b, double tol = 0.0);

/// Chebyshev-sampled solution values with barycentric interpolation.
struct BasisFunction {
    double lo = 0.0, hi = 1.0;
    std::vector<double> nodes;   // ascending Chebyshev-Lobatto grid
    std::vector<double> values;
    std::vector<double> weights; // barycentric

    double operator()(double x) const;
};

/// N independent solutions of op u = 0 on [lo,hi], integrated outward from
/// the midpoint with canonical unit initial conditions (identity Wronskian).
std::vector<BasisFunction> fundamental_basis(const DifferentialOperator& op, double lo,
                                             double hi, int n_nodes = 64,
                                             const OdeOptions& ode = {});

/// (k_max+1) x (N * n_intervals) matrix of int_{cut_n}^{cut_{n+1}} x^k u_i dx,
/// columns ordered interval-major. `cuts` = a, jumps..., b.
DenseMatrix basis_moment_matrix(const std::vector<std::vector<BasisFunction>>& basis,
                                std::span<const double> cuts, int k_max,
                                double quad_tol = 1e-12);

struct AmplitudeSolution {
    Eigen::VectorXd alpha;
    double residual = 0.0; // max absolute moment defect
};

AmplitudeSolution solve_amplitudes(const DenseMatrix& C, const MomentSequence& m,
                                   double rank_tol = 1e-10);

struct ReconstructOptions {
    double rank_tol = 1e-10;
    double jump_tol = 0.0; // 0 = auto
    int basis_nodes = 64;
    double quad_tol = 1e-12;
    OdeOptions ode;
    int initial_rows = 0; // 0 = 2 * unknowns
};

struct ReconstructDiagnostics {
    int rows_used = 0;
    int nullspace_dim = 0;
    double sigma_ratio = 0.0;
    double jump_residual = 0.0;
    double moment_residual = 0.0;     // relative to max |m|
    double recurrence_residual = 0.0; // of the solved augmented operator
    bool ambiguous = false;           // nullspace dimension > 1
    bool disambiguated = false;       // factored-form re-solve was applied
};

struct PiecewiseDFiniteModel {
    double a = 0.0, b = 1.0;
    int order = 0;                // N
    std::vector<double> jumps;
    DifferentialOperator reduced; // annihilates each piece
    std::vector<std::vector<BasisFunction>> basis; // [interval][i]
    Eigen::MatrixXd alpha;        // order x (jumps+1), column n = interval n
    ReconstructDiagnostics diag;

    double evaluate(double x) const; // right-limit at jumps
};

/// Full reconstruction: degree augmentation by p*N, annihilator solve with
/// geometric row growth until the nullspace dimension stabilizes, jump
/// extraction, fundamental basis, and the amplitude solve.
///
/// When the nullspace has dimension > 1 (degenerate pieces such as low-degree
/// polynomials admit annihilators without the common jump factor), the jumps
/// are first located from the leading coefficients of the whole nullspace
/// basis -- every annihilator's leading polynomial vanishes at a value jump --
/// and the operator is re-solved inside the factored subspace
/// prod (x - xi)^N * (unaugmented layout) before extraction.
PiecewiseDFiniteModel reconstruct(const MomentSequence& m, int N, std::span<const int> degs,
                                  int p, double a, double b,
                                  const ReconstructOptions& opts = {});

/// max_k |sum_{i,j} a_{i,j} v^{(i,j)}_k| / max|m| over all admissible rows.
double recurrence_residual(const MomentSequence& m, const DifferentialOperator& op,
                           double a, double b);

struct PadeHermiteResult {
    double residual = 0.0; // max high-order coefficient, relative to the v scale
    Polynomial Q;          // low-order part, deg < max layout degree
};

/// Theorem-style dependence certificate: coefficients of
/// sum_j h_j(z) z^{d*} p_j(1/z) beyond degree d* must vanish for a true
/// annihilator; the part below d* is the polynomial Q.
PadeHermiteResult pade_hermite_residual(const DifferentialOperator& op,
                                        const MomentSequence& m, int T);

} // namespace momrec
