#include "momrec/convdual.hpp"

#include <cmath>

namespace momrec {

namespace {

cplx minus_i_pow(int e) {
    switch (((e % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
    }
}

} // namespace

KernelSpec KernelSpec::gaussian(double sigma, int taylor_order) {
    KernelSpec s;
    s.name = "gaussian";
    s.sigma = sigma;
    s.fhat_taylor.assign(static_cast<std::size_t>(taylor_order) + 1, cplx(0.0));
    // fhat(w) = exp(-sigma^2 w^2 / 2)
    double term = 1.0;
    for (int m = 0; 2 * m <= taylor_order; ++m) {
        s.fhat_taylor[static_cast<std::size_t>(2 * m)] = term;
        term *= -0.5 * sigma * sigma / (m + 1);
    }
    s.fhat_eval = [sigma](double k) { return cplx(std::exp(-0.5 * sigma * sigma * k * k)); };
    return s;
}

KernelSpec KernelSpec::box(int taylor_order) {
    KernelSpec s;
    s.name = "box";
    s.fhat_taylor.assign(static_cast<std::size_t>(taylor_order) + 1, cplx(0.0));
    // fhat(w) = 2 sin(w/2) / w = sum (-1)^m w^{2m} / (4^m (2m+1)!)
    double term = 1.0;
    for (int m = 0; 2 * m <= taylor_order; ++m) {
        s.fhat_taylor[static_cast<std::size_t>(2 * m)] = term;
        term *= -1.0 / (4.0 * (2 * m + 2) * (2 * m + 3));
    }
    s.fhat_eval = [](double k) {
        return cplx(k == 0.0 ? 1.0 : 2.0 * std::sin(0.5 * k) / k);
    };
    return s;
}

KernelSpec KernelSpec::dirac(int taylor_order) {
    KernelSpec s;
    s.name = "dirac";
    s.fhat_taylor.assign(static_cast<std::size_t>(taylor_order) + 1, cplx(0.0));
    s.fhat_taylor[0] = 1.0;
    s.fhat_eval = [](double) { return cplx(1.0); };
    return s;
}

KernelSpec KernelSpec::custom(std::vector<cplx> fhat_taylor,
                              std::function<cplx(double)> fhat_eval) {
    KernelSpec s;
    s.name = "custom";
    s.fhat_taylor = std::move(fhat_taylor);
    s.fhat_eval = std::move(fhat_eval);
    return s;
}

cplx KernelSpec::fhat_at(double k) const {
    if (!fhat_eval)
        fail(errc::vanishing_fhat, "kernel has no fhat evaluator for the Fourier pipeline");
    return fhat_eval(k);
}

bool DualCoefficients::is_real(double tol) const {
    double scale = 0.0;
    for (const cplx& v : table)
        scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-300);
    for (const cplx& v : table)
        if (std::abs(v.imag()) > tol * scale)
            return false;
    return true;
}

std::vector<cplx> inverse_taylor(std::span<const cplx> fhat_taylor, int order) {
    if (fhat_taylor.empty() || static_cast<int>(fhat_taylor.size()) < order + 1)
        fail(errc::length_mismatch, "need fhat Taylor coefficients up to the requested order");
    const cplx f0 = fhat_taylor[0];
    if (std::abs(f0) < 1e-150)
        fail(errc::zero_at_origin, "fhat(0) vanishes; convolution dual undefined");
    std::vector<cplx> g(static_cast<std::size_t>(order) + 1, cplx(0.0));
    g[0] = 1.0 / f0;
    for (int s = 1; s <= order; ++s) {
        cplx acc = 0.0;
        for (int t = 1; t <= s; ++t)
            acc += fhat_taylor[t] * g[s - t];
        g[s] = -acc / f0;
    }
    return g;
}

DualCoefficients dual_coefficients(const KernelSpec& spec, int order) {
    const std::vector<cplx> g = inverse_taylor(spec.fhat_taylor, order);

    DualCoefficients C;
    C.order = order;
    C.table.assign(static_cast<std::size_t>(order + 1) * (order + 2) / 2, cplx(0.0));

    // binomials and factorials
    std::vector<std::vector<double>> binom(order + 1);
    for (int n = 0; n <= order; ++n) {
        binom[n].assign(n + 1, 1.0);
        for (int k = 1; k < n; ++k)
            binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
    }
    std::vector<double> fact(order + 1, 1.0);
    for (int t = 1; t <= order; ++t)
        fact[t] = fact[t - 1] * t;

    for (int n = 0; n <= order; ++n)
        for (int k = 0; k <= n; ++k)
            C.at_mut(n, k) = spec.convention_scale * binom[n][k] * minus_i_pow(n + k) *
                             fact[n - k] * g[n - k];
    return C;
}

Polynomial dual_polynomial(const DualCoefficients& C, int n) {
    if (n > C.order)
        fail(errc::length_mismatch, "dual polynomial order exceeds table");
    std::vector<cplx> coeffs(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        coeffs[k] = C.at(n, k);
    return Polynomial(std::move(coeffs));
}

MomentSequence generalized_poly_moments(const MomentSequence& m, const DualCoefficients& C) {
    if (static_cast<int>(m.size()) < C.order + 1)
        fail(errc::length_mismatch,
             "need " + std::to_string(C.order + 1) + " raw moments, have " +
                 std::to_string(m.size()));
    MomentSequence out;
    out.a = m.a;
    out.b = m.b;
    out.provenance = m.provenance;
    out.values.resize(static_cast<std::size_t>(C.order) + 1);
    for (int n = 0; n <= C.order; ++n) {
        cplx acc = 0.0;
        for (int k = 0; k <= n; ++k)
            acc += C.at(n, k) * m[k];
        out.values[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

MomentSequence fourier_generalized_moments(const FourierCoefficients& mu,
                                           const KernelSpec& spec, int k_range) {
    if (mu.k_range < k_range)
        fail(errc::length_mismatch, "Fourier data does not cover the requested k range");
    MomentSequence out;
    out.a = mu.a;
    out.b = mu.b;
    out.provenance = mu.provenance;
    out.values.resize(static_cast<std::size_t>(k_range) + 1);
    for (int k = 0; k <= k_range; ++k) {
        const cplx fh = spec.fhat_at(-static_cast<double>(k));
        if (std::abs(fh) < 1e-150)
            fail(errc::vanishing_fhat,
                 "fhat vanishes at frequency " + std::to_string(k) +
                     "; drop this equation and retry");
        out.values[static_cast<std::size_t>(k)] = mu.at(k) / fh;
    }
    return out;
}

} // namespace momrec
