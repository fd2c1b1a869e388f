#pragma once

#include <complex>
#include <string>
#include <vector>

#include "momrec/errors.hpp"

namespace momrec {

using cplx = std::complex<double>;

enum class Provenance { analytic, quadrature, external };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

/// Ordered measurements m_0..m_K taken on [a,b]. Values are stored complex;
/// moment pipelines that are real by construction keep the imaginary parts
/// exactly zero and can project with real_values().
struct MomentSequence {
    std::vector<cplx> values;
    double a = 0.0;
    double b = 0.0;
    Provenance provenance = Provenance::analytic;

    MomentSequence() = default;
    MomentSequence(std::vector<cplx> v, double lo, double hi,
                   Provenance prov = Provenance::analytic)
        : values(std::move(v)), a(lo), b(hi), provenance(prov) {}

    static MomentSequence from_real(const std::vector<double>& v, double lo, double hi,
                                    Provenance prov = Provenance::analytic);

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    const cplx& operator[](std::size_t k) const { return values[k]; }

    double max_abs() const;

    /// True if every imaginary part is below tol relative to the largest value.
    bool is_real(double tol = 1e-10) const;

    /// Real projection; throws length_mismatch-style error if the imaginary
    /// residue exceeds tol relative to the largest magnitude.
    std::vector<double> real_values(double tol = 1e-10) const;

    /// Real part of entry k without any residue check.
    double real_at(std::size_t k) const { return values[k].real(); }
};

/// Fourier measurements mu_k = \int F(t) e^{ikt} dt for |k| <= k_range,
/// stored densely with index k + k_range.
struct FourierCoefficients {
    int k_range = 0;
    std::vector<cplx> values; // size 2*k_range+1
    double a = 0.0;
    double b = 0.0;
    Provenance provenance = Provenance::quadrature;

    FourierCoefficients() = default;
    FourierCoefficients(int range, double lo, double hi,
                        Provenance prov = Provenance::quadrature)
        : k_range(range), values(2 * range + 1, cplx(0.0)), a(lo), b(hi), provenance(prov) {}

    const cplx& at(int k) const {
        if (k < -k_range || k > k_range)
            fail(errc::length_mismatch,
                 "Fourier coefficient k=" + std::to_string(k) + " outside range " +
                     std::to_string(k_range));
        return values[static_cast<std::size_t>(k + k_range)];
    }
    cplx& at(int k) {
        return const_cast<cplx&>(static_cast<const FourierCoefficients&>(*this).at(k));
    }
};

} // namespace momrec
