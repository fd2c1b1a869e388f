#include "momrec/moments.hpp"

#include <algorithm>
#include <cmath>

namespace momrec {

const char* provenance_name(Provenance p) {
    switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::quadrature: return "quadrature";
    case Provenance::external: return "external";
    }
    return "external";
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "analytic") return Provenance::analytic;
    if (name == "quadrature") return Provenance::quadrature;
    if (name == "external") return Provenance::external;
    fail(errc::schema_error, "unknown provenance '" + name + "'");
}

MomentSequence MomentSequence::from_real(const std::vector<double>& v, double lo, double hi,
                                         Provenance prov) {
    std::vector<cplx> c(v.size());
    std::transform(v.begin(), v.end(), c.begin(), [](double x) { return cplx(x, 0.0); });
    return MomentSequence(std::move(c), lo, hi, prov);
}

double MomentSequence::max_abs() const {
    double m = 0.0;
    for (const cplx& v : values)
        m = std::max(m, std::abs(v));
    return m;
}

bool MomentSequence::is_real(double tol) const {
    const double scale = std::max(max_abs(), 1e-300);
    for (const cplx& v : values)
        if (std::abs(v.imag()) > tol * scale)
            return false;
    return true;
}

std::vector<double> MomentSequence::real_values(double tol) const {
    if (!is_real(tol))
        fail(errc::length_mismatch, "moment sequence has non-negligible imaginary residue");
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [](const cplx& v) { return v.real(); });
    return out;
}

} // namespace momrec
