#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "momrec/moments.hpp"

namespace momrec {

using DenseMatrix = Eigen::MatrixXd;

/// Dense univariate polynomial, coefficients ascending by power. Storage is
/// complex; polynomials built from real data keep imaginary parts exactly
/// zero through arithmetic and synthetic division.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}
    explicit Polynomial(std::span<const double> coeffs);
    Polynomial(std::initializer_list<double> coeffs);

    static Polynomial zero() { return Polynomial(); }
    static Polynomial constant(cplx v) { return Polynomial(std::vector<cplx>{v}); }
    /// Expands prod (x - r_i), scaled by `leading`.
    static Polynomial from_roots(std::span<const cplx> roots, cplx leading = 1.0);

    const std::vector<cplx>& coeffs() const noexcept { return c_; }
    cplx coeff(std::size_t i) const { return i < c_.size() ? c_[i] : cplx(0.0); }
    std::size_t raw_size() const noexcept { return c_.size(); }

    /// Index of the last coefficient with |c| > trim_tol * max|c|; -1 if all
    /// coefficients are below the threshold.
    int degree(double trim_tol = 1e-12) const;
    bool is_zero(double trim_tol = 1e-12) const { return degree(trim_tol) < 0; }
    Polynomial trimmed(double trim_tol = 1e-12) const;

    double max_abs_coeff() const;

    cplx eval(cplx x) const;
    double eval_real(double x) const { return eval(cplx(x)).real(); }

    Polynomial derivative() const;
    Polynomial antiderivative() const;

    /// Synthetic division by (x - root); the remainder is discarded and
    /// returned through *remainder when provided.
    Polynomial deflated(cplx root, cplx* remainder = nullptr) const;

    bool is_real(double tol = 1e-10) const;
    std::vector<double> real_coeffs() const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(cplx s) const;

private:
    std::vector<cplx> c_;
};

/// All `degree` roots (with multiplicity) via balanced companion-matrix
/// eigenvalues. Throws zero_polynomial when every coefficient trims away.
std::vector<cplx> roots(const Polynomial& p, double trim_tol = 1e-12);

/// Orthonormal basis of the numerical nullspace: right singular vectors with
/// sigma <= rank_tol * sigma_max. Empty when numerically full column rank.
std::vector<Eigen::VectorXd> nullspace(const DenseMatrix& A, double rank_tol = 1e-10);

/// Numerical rank of A at the same threshold.
int numerical_rank(const Eigen::MatrixXcd& A, double rank_tol = 1e-10);

/// Monic degree-s characteristic polynomial q of the linear recurrence
/// annihilating M: sum_t q_t M_{k+t} = 0 (q_s = 1), least squares over all
/// available rows. Its roots are the Prony nodes.
Polynomial hankel_recurrence(const MomentSequence& M, int s, double rank_tol = 1e-10);

struct VandermondeInfo {
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// Least-squares solution of the (confluent) Vandermonde system V w = rhs.
/// Node j with confluency m_j contributes columns d^l/dx^l [x^k] evaluated at
/// the node, l = 0..m_j-1. Output is ordered node-major, derivative-minor.
Eigen::VectorXcd vandermonde_solve(std::span<const cplx> nodes,
                                   std::span<const cplx> rhs,
                                   std::span<const int> confluency,
                                   VandermondeInfo* info = nullptr,
                                   double condition_cap = 1e12);

struct CommonRoots {
    std::vector<cplx> roots;
    std::vector<Polynomial> deflated;
    double max_deflation_residual = 0.0;
};

/// Roots shared by every nonzero input polynomial with multiplicity >= mult,
/// identified by single-linkage clustering with radius tol. Each returned
/// polynomial has prod (x - r)^mult divided out.
CommonRoots common_roots(const std::vector<Polynomial>& polys, int mult,
                         double tol = 1e-6);

double falling_factorial(int n, int j);

} // namespace momrec
