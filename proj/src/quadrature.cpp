#include "momrec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace momrec {

namespace {

std::pair<std::vector<double>, std::vector<double>> compute_gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    // Newton iteration on P_n from the Chebyshev-based initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {x, w};
}

std::mutex rule_mutex;
std::map<int, std::pair<std::vector<double>, std::vector<double>>> rule_cache;

using Rule = std::pair<std::vector<double>, std::vector<double>>;

template <class T>
T panel(const std::function<T(double)>& f, double a, double b, const Rule& rule,
        double* l1 = nullptr) {
    const auto& [x, w] = rule;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    T acc{};
    double mag = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const T v = f(mid + half * x[i]);
        acc += w[i] * v;
        mag += w[i] * std::abs(v);
    }
    if (l1)
        *l1 = mag * half;
    return acc * half;
}

template <class T>
T adaptive(const std::function<T(double)>& f, double a, double b, double tol, int depth,
           const Rule& rule, const QuadratureOptions& opts) {
    const T coarse = panel(f, a, b, rule);
    const double mid = 0.5 * (a + b);
    double l1_left = 0.0, l1_right = 0.0;
    const T left = panel(f, a, mid, rule, &l1_left);
    const T right = panel(f, mid, b, rule, &l1_right);
    const T fine = left + right;
    const double err = std::abs(fine - coarse);
    if (!std::isfinite(err))
        fail(errc::quadrature_failure,
             "non-finite integrand on [" + std::to_string(a) + "," + std::to_string(b) + "]");
    // the roundoff floor follows the integrand magnitude, not the (possibly
    // cancelling) panel integral
    const double floor =
        50.0 * std::numeric_limits<double>::epsilon() * (l1_left + l1_right);
    if (err <= std::max(tol, floor))
        return fine;
    if (depth >= opts.max_depth)
        fail(errc::quadrature_failure,
             "tolerance " + std::to_string(tol) + " unreachable on [" + std::to_string(a) +
                 "," + std::to_string(b) + "]");
    return adaptive(f, a, mid, 0.5 * tol, depth + 1, rule, opts) +
           adaptive(f, mid, b, 0.5 * tol, depth + 1, rule, opts);
}

template <class T>
T integrate_impl(const std::function<T(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    if (a == b)
        return T{};
    if (b < a)
        return -integrate_impl(f, b, a, opts);
    const Rule& rule = gauss_legendre(opts.points);
    return adaptive(f, a, b, opts.tol, 0, rule, opts);
}

template <class T>
T integrate_segmented_impl(const std::function<T(double)>& f, double a, double b,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts) {
    std::vector<double> cuts{a};
    for (double t : breakpoints)
        if (t > a && t < b)
            cuts.push_back(t);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    T acc{};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += integrate_impl(f, cuts[i], cuts[i + 1], opts);
    return acc;
}

} // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    std::lock_guard<std::mutex> lock(rule_mutex);
    auto it = rule_cache.find(n);
    if (it == rule_cache.end())
        it = rule_cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    return integrate_impl(f, a, b, opts);
}

cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               const QuadratureOptions& opts) {
    return integrate_impl(f, a, b, opts);
}

double integrate_segmented(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts) {
    return integrate_segmented_impl(f, a, b, breakpoints, opts);
}

cplx integrate_segmented(const std::function<cplx(double)>& f, double a, double b,
                         std::span<const double> breakpoints,
                         const QuadratureOptions& opts) {
    return integrate_segmented_impl(f, a, b, breakpoints, opts);
}

} // namespace momrec
