#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "momrec/moments.hpp"
#include "momrec/polyalg.hpp"

namespace momrec {

/// Measurement-side description of the known kernel f: Taylor coefficients
/// of fhat(w) = int f(x) e^{-iwx} dx at w = 0, and optionally fhat at the
/// integer frequencies used by the Fourier pipeline. The paper's transform
/// prefactor is absorbed into convention_scale (default 1 for the
/// convention above).
struct KernelSpec {
    std::string name = "custom";
    std::vector<cplx> fhat_taylor;
    std::function<cplx(double)> fhat_eval;
    double convention_scale = 1.0;
    double sigma = 1.0;

    static KernelSpec gaussian(double sigma = 1.0, int taylor_order = 48);
    static KernelSpec box(int taylor_order = 48);
    static KernelSpec dirac(int taylor_order = 48);
    static KernelSpec custom(std::vector<cplx> fhat_taylor,
                             std::function<cplx(double)> fhat_eval = {});

    cplx fhat_at(double k) const;
};

/// Lower-triangular table C_{n,k}, 0 <= k <= n, mapping raw moments to
/// generalized moments M_n = sum_{k<=n} C_{n,k} m_k.
struct DualCoefficients {
    int order = 0;
    std::vector<cplx> table; // row-major lower triangle, row n holds n+1 entries

    cplx at(int n, int k) const {
        if (k > n || n > order || k < 0)
            return cplx(0.0);
        return table[static_cast<std::size_t>(n) * (n + 1) / 2 + k];
    }
    cplx& at_mut(int n, int k) {
        return table[static_cast<std::size_t>(n) * (n + 1) / 2 + k];
    }
    bool is_real(double tol = 1e-10) const;
};

/// Taylor coefficients g of 1/fhat at 0: sum_t g_t f_{s-t} = [s == 0].
std::vector<cplx> inverse_taylor(std::span<const cplx> fhat_taylor, int order);

/// C_{n,k} = convention_scale * binom(n,k) * (-i)^{n+k} * (n-k)! * g_{n-k}.
DualCoefficients dual_coefficients(const KernelSpec& spec, int order);

/// psi_n(t) = sum_{k<=n} C_{n,k} t^k, the dual polynomial satisfying
/// int f(t+x) psi_n(t) dt = x^n.
Polynomial dual_polynomial(const DualCoefficients& C, int n);

/// Generalized polynomial moments M_n of a raw moment sequence.
MomentSequence generalized_poly_moments(const MomentSequence& m, const DualCoefficients& C);

/// Generalized Fourier moments M_k, k = 0..k_range, with M_k = sum_j a_j rho_j^k
/// and rho_j = e^{-i x_j}. With mu_k = int F(t) e^{ikt} dt this requires
/// dividing mu_k by fhat(-k); for the real even built-in kernels this equals
/// the division by fhat(k).
MomentSequence fourier_generalized_moments(const FourierCoefficients& mu,
                                           const KernelSpec& spec, int k_range);

} // namespace momrec
