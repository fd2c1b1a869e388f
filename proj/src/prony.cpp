#include "momrec/prony.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "momrec/log.hpp"
#include "momrec/polyalg.hpp"

namespace momrec {

namespace {

cplx node_pow(cplx x, int e) {
    if (e == 0)
        return cplx(1.0);
    return std::pow(x, static_cast<double>(e));
}

/// Greedy single-linkage clustering of complex points with the given radius;
/// returns cluster index per point, clusters ordered by first appearance.
std::vector<int> cluster_points(std::span<const cplx> pts, double radius, int* n_clusters) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (label[i] >= 0)
            continue;
        label[i] = next;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int u = 0; u < n; ++u) {
                if (label[u] != next)
                    continue;
                for (int v = 0; v < n; ++v) {
                    if (label[v] >= 0)
                        continue;
                    if (std::abs(pts[u] - pts[v]) <= radius) {
                        label[v] = next;
                        grew = true;
                    }
                }
            }
        }
        ++next;
    }
    if (n_clusters)
        *n_clusters = next;
    return label;
}

double solution_residual(const PronySolution& sol, const MomentSequence& M) {
    const std::vector<cplx> series = generating_series(sol, static_cast<int>(M.size()));
    double r = 0.0;
    for (std::size_t k = 0; k < M.size(); ++k)
        r = std::max(r, std::abs(series[k] - M[k]));
    return r;
}

PronySolution assemble(std::vector<cplx> nodes, std::vector<std::vector<cplx>> amps,
                       const MomentSequence& M) {
    PronySolution sol;
    sol.nodes = std::move(nodes);
    sol.amplitudes = std::move(amps);
    sol.residual = solution_residual(sol, M);
    return sol;
}

} // namespace

int PronySolution::max_derivative_order() const {
    int r = 0;
    for (const auto& a : amplitudes)
        r = std::max(r, static_cast<int>(a.size()) - 1);
    return r;
}

PronySolution solve_prony(const MomentSequence& M, int s, const PronyOptions& opts) {
    if (static_cast<int>(M.size()) < 2 * s)
        fail(errc::insufficient_moments,
             "need at least " + std::to_string(2 * s) + " moments for s=" + std::to_string(s));

    const Polynomial q = hankel_recurrence(M, s, opts.hankel_rank_tol);
    const std::vector<cplx> raw_nodes = roots(q);

    // collapse coincident nodes into a confluent solve
    int n_clusters = 0;
    const std::vector<int> label = cluster_points(raw_nodes, opts.node_sep_tol, &n_clusters);

    std::vector<cplx> nodes(n_clusters, cplx(0.0));
    std::vector<int> confluency(n_clusters, 0);
    for (std::size_t i = 0; i < raw_nodes.size(); ++i) {
        nodes[label[i]] += raw_nodes[i];
        confluency[label[i]] += 1;
    }
    for (int c = 0; c < n_clusters; ++c)
        nodes[c] /= static_cast<double>(confluency[c]);
    if (n_clusters < s)
        log_info("solve_prony: " + std::to_string(s - n_clusters) +
                 " coincident node(s); continuing with a confluent solve");

    VandermondeInfo vinfo;
    const Eigen::VectorXcd w =
        vandermonde_solve(nodes, M.values, confluency, &vinfo, opts.condition_cap);

    std::vector<std::vector<cplx>> amps(nodes.size());
    int col = 0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
        for (int l = 0; l < confluency[j]; ++l, ++col)
            amps[j].push_back(w(col));

    return assemble(std::move(nodes), std::move(amps), M);
}

int estimate_order(const MomentSequence& M, int s_max, double tol) {
    if (static_cast<int>(M.size()) < 2 * s_max)
        fail(errc::insufficient_moments,
             "need at least " + std::to_string(2 * s_max) + " moments");
    Eigen::MatrixXcd H(s_max, s_max);
    for (int r = 0; r < s_max; ++r)
        for (int c = 0; c < s_max; ++c)
            H(r, c) = M[r + c];
    return numerical_rank(H, tol);
}

std::vector<cplx> amplitudes_to_partial_fractions(std::span<const cplx> a, cplx node) {
    const int r = static_cast<int>(a.size()) - 1;
    std::vector<double> fact(r + 1, 1.0);
    for (int t = 1; t <= r; ++t)
        fact[t] = fact[t - 1] * t;
    std::vector<cplx> b(a.size(), cplx(0.0));
    for (int qq = 0; qq <= r; ++qq) {
        cplx acc = 0.0;
        for (int l = qq; l <= r; ++l) {
            const double bin = fact[l] / (fact[qq] * fact[l - qq]);
            const double sign = ((qq + l) % 2 == 0) ? 1.0 : -1.0;
            acc += sign * bin * fact[l] * a[l] / node_pow(node, l);
        }
        b[qq] = acc;
    }
    return b;
}

std::vector<cplx> partial_fractions_to_amplitudes(std::span<const cplx> b, cplx node) {
    const int r = static_cast<int>(b.size()) - 1;
    std::vector<double> fact(r + 1, 1.0);
    for (int t = 1; t <= r; ++t)
        fact[t] = fact[t - 1] * t;
    std::vector<cplx> a(b.size(), cplx(0.0));
    for (int qq = r; qq >= 0; --qq) {
        cplx acc = b[qq];
        for (int l = qq + 1; l <= r; ++l) {
            const double bin = fact[l] / (fact[qq] * fact[l - qq]);
            const double sign = ((qq + l) % 2 == 0) ? 1.0 : -1.0;
            acc -= sign * bin * fact[l] * a[l] / node_pow(node, l);
        }
        // diagonal term: q! / node^q
        a[qq] = acc * node_pow(node, qq) / fact[qq];
    }
    return a;
}

PronySolution solve_prony_confluent(const MomentSequence& M, int s, int r,
                                    const PronyOptions& opts) {
    if (r == 0)
        return solve_prony(M, s, opts);
    const int full = s * (r + 1);
    if (static_cast<int>(M.size()) < 2 * full)
        fail(errc::insufficient_moments,
             "need at least " + std::to_string(2 * full) + " moments for s=" +
                 std::to_string(s) + ", r=" + std::to_string(r));

    const Polynomial q = hankel_recurrence(M, full, opts.hankel_rank_tol);
    std::vector<cplx> raw_nodes = roots(q);

    // collapse the multiplicity-(r+1) clusters to s nodes; the cluster radius
    // must dominate the (r+1)-th root scatter of the recurrence roots
    const double radius = std::max(opts.node_sep_tol, 1e-3);
    int n_clusters = 0;
    std::vector<int> label = cluster_points(raw_nodes, radius, &n_clusters);
    if (n_clusters != s)
        fail(errc::singular_hankel,
             "expected " + std::to_string(s) + " node clusters, found " +
                 std::to_string(n_clusters));

    std::vector<cplx> nodes(s, cplx(0.0));
    std::vector<int> counts(s, 0);
    for (std::size_t i = 0; i < raw_nodes.size(); ++i) {
        nodes[label[i]] += raw_nodes[i];
        counts[label[i]] += 1;
    }
    for (int c = 0; c < s; ++c)
        nodes[c] /= static_cast<double>(counts[c]);

    for (const cplx& x : nodes)
        if (std::abs(x) < opts.zero_node_tol)
            fail(errc::node_at_zero,
                 "confluent amplitudes are undefined for a node at the origin");

    // amplitudes in the partial-fraction basis: columns binom(k+q, q) * x^k
    const int rows = static_cast<int>(M.size());
    const int cols = s * (r + 1);
    Eigen::MatrixXcd A(rows, cols);
    for (int k = 0; k < rows; ++k) {
        int col = 0;
        for (int j = 0; j < s; ++j) {
            const cplx xk = node_pow(nodes[j], k);
            double binom_kq = 1.0; // binom(k+q, q), starts at q=0
            for (int qq = 0; qq <= r; ++qq, ++col) {
                A(k, col) = binom_kq * xk;
                binom_kq = binom_kq * (k + qq + 1) / (qq + 1);
            }
        }
    }
    Eigen::VectorXcd rhs(rows);
    for (int k = 0; k < rows; ++k)
        rhs(k) = M[k];
    const Eigen::VectorXcd b = A.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);

    std::vector<std::vector<cplx>> amps(s);
    for (int j = 0; j < s; ++j) {
        std::vector<cplx> bj(r + 1);
        for (int qq = 0; qq <= r; ++qq)
            bj[qq] = b(j * (r + 1) + qq);
        amps[j] = partial_fractions_to_amplitudes(bj, nodes[j]);
    }

    return assemble(std::move(nodes), std::move(amps), M);
}

ShiftModel solve_fourier_shifts(const MomentSequence& M, int s, const PronyOptions& opts,
                                const KernelSpec& kernel) {
    PronySolution sol = solve_prony(M, s, opts);
    for (cplx& rho : sol.nodes) {
        const double dev = std::abs(std::abs(rho) - 1.0);
        if (dev > opts.circle_tol)
            fail(errc::off_circle_node,
                 "node modulus deviates from the unit circle by " + std::to_string(dev));
        rho /= std::abs(rho);
    }

    // re-solve amplitudes with the projected nodes
    std::vector<int> confluency(sol.nodes.size());
    for (std::size_t j = 0; j < sol.nodes.size(); ++j)
        confluency[j] = static_cast<int>(sol.amplitudes[j].size());
    VandermondeInfo vinfo;
    const Eigen::VectorXcd w =
        vandermonde_solve(sol.nodes, M.values, confluency, &vinfo, opts.condition_cap);
    int col = 0;
    for (std::size_t j = 0; j < sol.nodes.size(); ++j)
        for (std::size_t l = 0; l < sol.amplitudes[j].size(); ++l, ++col)
            sol.amplitudes[j][l] = w(col);
    sol.residual = solution_residual(sol, M);

    ShiftModel model;
    model.kernel = kernel;
    model.domain = MeasurementDomain::fourier;

    // sort nodes by shift for a canonical ordering
    std::vector<std::size_t> perm(sol.nodes.size());
    std::iota(perm.begin(), perm.end(), 0);
    auto shift_of = [&](std::size_t j) {
        double x = -std::arg(sol.nodes[j]);
        if (x < 0.0)
            x += 2.0 * M_PI;
        if (x >= 2.0 * M_PI)
            x -= 2.0 * M_PI;
        return x;
    };
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t u, std::size_t v) { return shift_of(u) < shift_of(v); });

    PronySolution ordered;
    ordered.residual = sol.residual;
    for (std::size_t j : perm) {
        ordered.nodes.push_back(sol.nodes[j]);
        ordered.amplitudes.push_back(sol.amplitudes[j]);
        model.shifts.push_back(shift_of(j));
    }
    model.solution = std::move(ordered);
    return model;
}

std::vector<cplx> generating_series(const PronySolution& sol, int terms) {
    std::vector<cplx> out(static_cast<std::size_t>(std::max(terms, 0)), cplx(0.0));
    for (int n = 0; n < terms; ++n) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < sol.nodes.size(); ++j)
            for (std::size_t l = 0; l < sol.amplitudes[j].size(); ++l) {
                const int li = static_cast<int>(l);
                const double ff = falling_factorial(n, li);
                if (ff == 0.0)
                    continue;
                acc += sol.amplitudes[j][l] * ff * node_pow(sol.nodes[j], n - li);
            }
        out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

} // namespace momrec
