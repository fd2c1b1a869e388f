#include "momrec/signals.hpp"

#include <algorithm>
#include <cmath>

#include "momrec/parallel.hpp"
#include "momrec/polyalg.hpp"

namespace momrec {

Piece Piece::polynomial(std::vector<double> coeffs) {
    Piece p;
    p.kind = Kind::polynomial;
    p.poly = std::move(coeffs);
    return p;
}

Piece Piece::sinusoid(double amp, double freq, double phase) {
    Piece p;
    p.kind = Kind::sinusoid;
    p.amp = amp;
    p.freq = freq;
    p.phase = phase;
    return p;
}

Piece Piece::rational(std::vector<double> num, std::vector<double> den) {
    Piece p;
    p.kind = Kind::rational;
    p.num = std::move(num);
    p.den = std::move(den);
    return p;
}

Piece Piece::callable(std::function<double(double)> fn) {
    Piece p;
    p.kind = Kind::callable;
    p.fn = std::move(fn);
    return p;
}

namespace {

double eval_poly(std::span<const double> c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;)
        acc = acc * x + c[i];
    return acc;
}

} // namespace

double Piece::eval(double x) const {
    switch (kind) {
    case Kind::polynomial: return eval_poly(poly, x);
    case Kind::sinusoid: return amp * std::sin(freq * x + phase);
    case Kind::rational: return eval_poly(num, x) / eval_poly(den, x);
    case Kind::callable: return fn(x);
    }
    return 0.0;
}

void PiecewiseSpec::validate() const {
    if (!(a < b))
        fail(errc::schema_error, "piecewise spec needs a < b");
    if (pieces.size() != breakpoints.size() + 1)
        fail(errc::schema_error, "piece count must be breakpoint count + 1");
    double prev = a;
    for (double t : breakpoints) {
        if (!(t > prev && t < b))
            fail(errc::schema_error, "breakpoints must be strictly increasing inside (a,b)");
        prev = t;
    }
    for (const Piece& p : pieces)
        if (p.kind == Piece::Kind::callable && !p.fn)
            fail(errc::schema_error, "callable piece without function");
}

void ShiftSpec::validate() const {
    if (kernel != "gaussian" && kernel != "box" && kernel != "dirac" && kernel != "custom")
        fail(errc::schema_error, "unknown kernel '" + kernel + "'");
    if (kernel == "custom" && custom_moments.empty())
        fail(errc::schema_error, "custom kernel needs a moment list");
    if (shifts.size() != amplitudes.size())
        fail(errc::schema_error, "one amplitude vector per shift required");
    for (std::size_t i = 0; i < shifts.size(); ++i)
        for (std::size_t j = i + 1; j < shifts.size(); ++j)
            if (shifts[i] == shifts[j])
                fail(errc::schema_error, "shifts must be distinct");
    if (sigma <= 0.0)
        fail(errc::schema_error, "gaussian sigma must be positive");
}

int ShiftSpec::max_derivative_order() const {
    int r = 0;
    for (const auto& a : amplitudes)
        r = std::max(r, static_cast<int>(a.size()) - 1);
    return r;
}

double ShiftSpec::kernel_moment(int k) const {
    if (kernel == "gaussian") {
        if (k % 2 == 1)
            return 0.0;
        double acc = 1.0; // (k-1)!! * sigma^k
        for (int t = k - 1; t > 0; t -= 2)
            acc *= t;
        return acc * std::pow(sigma, k);
    }
    if (kernel == "box")
        return (k % 2 == 1) ? 0.0 : std::pow(0.5, k) / (k + 1);
    if (kernel == "dirac")
        return k == 0 ? 1.0 : 0.0;
    if (k >= static_cast<int>(custom_moments.size()))
        fail(errc::length_mismatch,
             "custom kernel moment " + std::to_string(k) + " not provided");
    return custom_moments[k];
}

double ShiftSpec::kernel_derivative(int l, double x) const {
    if (kernel == "gaussian") {
        const double u = x / sigma;
        // probabilists' Hermite: d^l/du^l e^{-u^2/2} = (-1)^l He_l(u) e^{-u^2/2}
        double he0 = 1.0, he1 = u;
        double he = (l == 0) ? he0 : he1;
        for (int t = 1; t < l; ++t) {
            const double next = u * he1 - t * he0;
            he0 = he1;
            he1 = next;
            he = next;
        }
        const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        return sign * he * phi / std::pow(sigma, l + 1);
    }
    if (l > 0)
        fail(errc::unsupported_piece,
             "kernel '" + kernel + "' has no pointwise derivative of order " +
                 std::to_string(l));
    if (kernel == "box")
        return (x >= -0.5 && x <= 0.5) ? 1.0 : 0.0;
    fail(errc::unsupported_piece, "kernel '" + kernel + "' is not pointwise evaluable");
}

double ShiftSpec::evaluate(double x, bool periodized) const {
    const double period = b - a;
    int wraps = 0;
    if (periodized) {
        const double reach = kernel == "gaussian" ? 10.0 * sigma : 1.0;
        wraps = 2 + static_cast<int>(std::ceil(reach / period));
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < shifts.size(); ++j)
        for (std::size_t l = 0; l < amplitudes[j].size(); ++l) {
            if (amplitudes[j][l] == 0.0)
                continue;
            for (int m = -wraps; m <= wraps; ++m)
                acc += amplitudes[j][l] *
                       kernel_derivative(static_cast<int>(l), x + shifts[j] + m * period);
        }
    return acc;
}

MomentSequence pp_moments(const PiecewiseSpec& spec, int k_max) {
    spec.validate();
    for (const Piece& p : spec.pieces)
        if (p.kind != Piece::Kind::polynomial)
            fail(errc::unsupported_piece, "pp_moments handles polynomial pieces only");

    std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 0.0);
    std::vector<double> cuts{spec.a};
    cuts.insert(cuts.end(), spec.breakpoints.begin(), spec.breakpoints.end());
    cuts.push_back(spec.b);
    for (std::size_t p = 0; p < spec.pieces.size(); ++p) {
        const double lo = cuts[p], hi = cuts[p + 1];
        const auto& c = spec.pieces[p].poly;
        for (int k = 0; k <= k_max; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                const int e = k + static_cast<int>(i) + 1;
                acc += c[i] * (std::pow(hi, e) - std::pow(lo, e)) / e;
            }
            m[k] += acc;
        }
    }
    return MomentSequence::from_real(m, spec.a, spec.b, Provenance::analytic);
}

namespace {

MomentSequence quad_moments_impl(const PiecewiseSpec& spec, int k_max, double tol,
                                 bool parallel) {
    spec.validate();
    QuadratureOptions opts;
    opts.tol = tol;
    std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 0.0);
    auto worker = [&](int k) {
        m[k] = integrate_segmented(
            std::function<double(double)>(
                [&](double x) { return std::pow(x, k) * evaluate(spec, x); }),
            spec.a, spec.b, spec.breakpoints, opts);
    };
    if (parallel)
        parallel_for(k_max + 1, worker);
    else
        serial_for(k_max + 1, worker);
    return MomentSequence::from_real(m, spec.a, spec.b, Provenance::quadrature);
}

} // namespace

MomentSequence quad_moments(const PiecewiseSpec& spec, int k_max, double tol) {
    return quad_moments_impl(spec, k_max, tol, true);
}

MomentSequence quad_moments_serial(const PiecewiseSpec& spec, int k_max, double tol) {
    return quad_moments_impl(spec, k_max, tol, false);
}

MomentSequence shift_model_moments(const ShiftSpec& spec, int k_max) {
    spec.validate();
    // binomial table
    std::vector<std::vector<double>> binom(k_max + 1);
    for (int n = 0; n <= k_max; ++n) {
        binom[n].assign(n + 1, 1.0);
        for (int k = 1; k < n; ++k)
            binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
    }

    std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (std::size_t j = 0; j < spec.shifts.size(); ++j) {
        const double xj = spec.shifts[j];
        for (std::size_t l = 0; l < spec.amplitudes[j].size(); ++l) {
            const double a = spec.amplitudes[j][l];
            if (a == 0.0)
                continue;
            const int li = static_cast<int>(l);
            const double dsign = (li % 2 == 0) ? 1.0 : -1.0;
            for (int n = 0; n <= k_max; ++n) {
                double acc = 0.0;
                for (int kappa = li; kappa <= n; ++kappa) {
                    const double ff = falling_factorial(kappa, li);
                    if (ff == 0.0)
                        continue;
                    acc += binom[n][kappa] * std::pow(-xj, n - kappa) * dsign * ff *
                           spec.kernel_moment(kappa - li);
                }
                m[n] += a * acc;
            }
        }
    }
    return MomentSequence::from_real(m, 0.0, 0.0, Provenance::analytic);
}

namespace {

FourierCoefficients fourier_piecewise_impl(const PiecewiseSpec& spec, int k_range,
                                           double tol, bool parallel) {
    spec.validate();
    QuadratureOptions opts;
    opts.tol = tol;
    FourierCoefficients mu(k_range, spec.a, spec.b, Provenance::quadrature);
    auto worker = [&](int idx) {
        const int k = idx - k_range;
        mu.at(k) = integrate_segmented(
            std::function<cplx(double)>([&](double t) {
                return evaluate(spec, t) * std::exp(cplx(0.0, k * t));
            }),
            spec.a, spec.b, spec.breakpoints, opts);
    };
    if (parallel)
        parallel_for(2 * k_range + 1, worker);
    else
        serial_for(2 * k_range + 1, worker);
    return mu;
}

} // namespace

FourierCoefficients fourier_coefficients(const PiecewiseSpec& spec, int k_range, double tol) {
    return fourier_piecewise_impl(spec, k_range, tol, true);
}

FourierCoefficients fourier_coefficients_serial(const PiecewiseSpec& spec, int k_range,
                                                double tol) {
    return fourier_piecewise_impl(spec, k_range, tol, false);
}

FourierCoefficients fourier_coefficients(const ShiftSpec& spec, int k_range, double tol) {
    spec.validate();
    QuadratureOptions opts;
    opts.tol = tol;
    FourierCoefficients mu(k_range, spec.a, spec.b, Provenance::quadrature);
    parallel_for(2 * k_range + 1, [&](int idx) {
        const int k = idx - k_range;
        mu.at(k) = integrate(
            std::function<cplx(double)>([&](double t) {
                return spec.evaluate(t, true) * std::exp(cplx(0.0, k * t));
            }),
            spec.a, spec.b, opts);
    });
    return mu;
}

double evaluate(const PiecewiseSpec& spec, double x) {
    if (x < spec.a || x > spec.b)
        return 0.0;
    // right-limit convention: a breakpoint belongs to the piece on its right
    std::size_t idx =
        std::upper_bound(spec.breakpoints.begin(), spec.breakpoints.end(), x) -
        spec.breakpoints.begin();
    if (idx >= spec.pieces.size())
        idx = spec.pieces.size() - 1;
    return spec.pieces[idx].eval(x);
}

std::vector<double> evaluate(const PiecewiseSpec& spec, std::span<const double> grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = evaluate(spec, grid[i]);
    return out;
}

PiecewiseSpec random_piecewise_poly(std::mt19937& rng, int max_degree, int jumps,
                                    double a, double b) {
    PiecewiseSpec spec;
    spec.a = a;
    spec.b = b;
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    // keep breakpoints separated so that clustering cannot merge them
    const double min_sep = 0.15 * (b - a);
    std::uniform_real_distribution<double> pos(a + min_sep, b - min_sep);
    std::vector<double> cuts;
    int guard = 0;
    while (static_cast<int>(cuts.size()) < jumps && guard++ < 1000) {
        const double t = pos(rng);
        bool ok = true;
        for (double u : cuts)
            if (std::abs(u - t) < min_sep)
                ok = false;
        if (ok)
            cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    spec.breakpoints = cuts;
    std::uniform_int_distribution<int> deg(0, max_degree);
    for (int p = 0; p <= jumps; ++p) {
        std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
        for (double& v : c)
            v = coeff(rng);
        if (std::abs(c.back()) < 0.1)
            c.back() += (c.back() < 0 ? -0.5 : 0.5);
        spec.pieces.push_back(Piece::polynomial(std::move(c)));
    }
    return spec;
}

} // namespace momrec
