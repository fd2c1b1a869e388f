#include "momrec/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "momrec/log.hpp"

namespace momrec {

Polynomial::Polynomial(std::span<const double> coeffs) {
    c_.reserve(coeffs.size());
    for (double v : coeffs)
        c_.emplace_back(v, 0.0);
}

Polynomial::Polynomial(std::initializer_list<double> coeffs) {
    c_.reserve(coeffs.size());
    for (double v : coeffs)
        c_.emplace_back(v, 0.0);
}

Polynomial Polynomial::from_roots(std::span<const cplx> roots, cplx leading) {
    std::vector<cplx> c{leading};
    for (const cplx& r : roots) {
        c.push_back(0.0);
        for (std::size_t i = c.size() - 1; i > 0; --i)
            c[i] = c[i - 1] - r * c[i];
        c[0] = -r * c[0];
    }
    return Polynomial(std::move(c));
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (const cplx& v : c_)
        m = std::max(m, std::abs(v));
    return m;
}

int Polynomial::degree(double trim_tol) const {
    const double cutoff = trim_tol * max_abs_coeff();
    for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i)
        if (std::abs(c_[i]) > cutoff)
            return i;
    return -1;
}

Polynomial Polynomial::trimmed(double trim_tol) const {
    const int d = degree(trim_tol);
    if (d < 0)
        return Polynomial();
    return Polynomial(std::vector<cplx>(c_.begin(), c_.begin() + d + 1));
}

cplx Polynomial::eval(cplx x) const {
    cplx acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;)
        acc = acc * x + c_[i];
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1)
        return Polynomial();
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
        d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
    std::vector<cplx> d(c_.size() + 1, cplx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
        d[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::deflated(cplx root, cplx* remainder) const {
    if (c_.empty()) {
        if (remainder)
            *remainder = 0.0;
        return Polynomial();
    }
    std::vector<cplx> q(c_.size() > 1 ? c_.size() - 1 : 0);
    cplx carry = c_.back();
    for (std::size_t i = c_.size() - 1; i-- > 0;) {
        if (i < q.size())
            q[i] = carry;
        carry = c_[i] + root * carry;
    }
    if (remainder)
        *remainder = carry;
    return Polynomial(std::move(q));
}

bool Polynomial::is_real(double tol) const {
    const double scale = std::max(max_abs_coeff(), 1e-300);
    for (const cplx& v : c_)
        if (std::abs(v.imag()) > tol * scale)
            return false;
    return true;
}

std::vector<double> Polynomial::real_coeffs() const {
    std::vector<double> out(c_.size());
    std::transform(c_.begin(), c_.end(), out.begin(), [](const cplx& v) { return v.real(); });
    return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<cplx> c(std::max(c_.size(), o.c_.size()), cplx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
        c[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i)
        c[i] += o.c_[i];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    std::vector<cplx> c(std::max(c_.size(), o.c_.size()), cplx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
        c[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i)
        c[i] -= o.c_[i];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (c_.empty() || o.c_.empty())
        return Polynomial();
    std::vector<cplx> c(c_.size() + o.c_.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j)
            c[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(cplx s) const {
    std::vector<cplx> c(c_);
    for (cplx& v : c)
        v *= s;
    return Polynomial(std::move(c));
}

namespace {

// Parlett-Reinsch style balancing by powers of two; keeps eigenvalues exact.
void balance_in_place(Eigen::MatrixXcd& A) {
    const int n = static_cast<int>(A.rows());
    const double gamma = 0.9;
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 50) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            double row_norm = A.row(i).cwiseAbs().sum();
            double col_norm = A.col(i).cwiseAbs().sum();
            if (row_norm == 0.0 || col_norm == 0.0)
                continue;
            int exponent = 0;
            std::frexp(row_norm / col_norm, &exponent);
            exponent /= 2;
            if (exponent == 0)
                continue;
            const double scaled_col = std::ldexp(col_norm, exponent);
            const double scaled_row = std::ldexp(row_norm, -exponent);
            if (scaled_col + scaled_row < gamma * (col_norm + row_norm)) {
                changed = true;
                A.row(i) *= std::ldexp(1.0, -exponent);
                A.col(i) *= std::ldexp(1.0, exponent);
            }
        }
    }
}

} // namespace

std::vector<cplx> roots(const Polynomial& p, double trim_tol) {
    const Polynomial q = p.trimmed(trim_tol);
    const int deg = q.degree(0.0);
    if (deg < 0)
        fail(errc::zero_polynomial, "all coefficients below trim tolerance");
    if (deg == 0)
        return {};
    const auto& c = q.coeffs();
    if (deg == 1)
        return {-c[0] / c[1]};

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i)
        companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i)
        companion(i, deg - 1) = -c[i] / c[deg];
    balance_in_place(companion);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        fail(errc::zero_polynomial, "companion eigenvalue iteration failed");

    std::vector<cplx> out(deg);
    for (int i = 0; i < deg; ++i)
        out[i] = solver.eigenvalues()(i);
    std::sort(out.begin(), out.end(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return out;
}

std::vector<Eigen::VectorXd> nullspace(const DenseMatrix& A, double rank_tol) {
    if (!A.allFinite())
        fail(errc::length_mismatch, "nullspace input has non-finite entries");
    Eigen::JacobiSVD<DenseMatrix> svd(A, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    std::vector<Eigen::VectorXd> basis;
    const int cols = static_cast<int>(A.cols());
    const int nsv = static_cast<int>(sigma.size());
    for (int i = 0; i < cols; ++i) {
        const double s = i < nsv ? sigma(i) : 0.0;
        if (s <= rank_tol * smax)
            basis.push_back(svd.matrixV().col(i));
    }
    return basis;
}

int numerical_rank(const Eigen::MatrixXcd& A, double rank_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0)
        return 0;
    const double smax = sigma(0);
    if (smax == 0.0)
        return 0;
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > rank_tol * smax)
            ++rank;
    return rank;
}

Polynomial hankel_recurrence(const MomentSequence& M, int s, double rank_tol) {
    const int n = static_cast<int>(M.size());
    if (s < 1)
        fail(errc::length_mismatch, "hankel_recurrence needs s >= 1");
    if (n < 2 * s)
        fail(errc::insufficient_moments,
             "need at least " + std::to_string(2 * s) + " moments, have " + std::to_string(n));

    const int rows = n - s;
    Eigen::MatrixXcd H(rows, s);
    Eigen::VectorXcd rhs(rows);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < s; ++c)
            H(r, c) = M[r + c];
        rhs(r) = -M[r + s];
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    if (smax == 0.0 || sigma(sigma.size() - 1) <= rank_tol * smax)
        fail(errc::singular_hankel,
             "Hankel matrix numerically rank-deficient at s=" + std::to_string(s));

    Eigen::VectorXcd c = svd.solve(rhs);
    std::vector<cplx> coeffs(static_cast<std::size_t>(s) + 1);
    for (int i = 0; i < s; ++i)
        coeffs[i] = c(i);
    coeffs[s] = 1.0;
    return Polynomial(std::move(coeffs));
}

Eigen::VectorXcd vandermonde_solve(std::span<const cplx> nodes,
                                   std::span<const cplx> rhs,
                                   std::span<const int> confluency,
                                   VandermondeInfo* info,
                                   double condition_cap) {
    if (nodes.size() != confluency.size())
        fail(errc::length_mismatch, "one confluency entry per node required");
    int cols = 0;
    for (int m : confluency) {
        if (m < 1)
            fail(errc::length_mismatch, "confluency must be >= 1");
        cols += m;
    }
    const int rows = static_cast<int>(rhs.size());
    if (rows < cols)
        fail(errc::insufficient_moments,
             "Vandermonde needs at least " + std::to_string(cols) + " rows");

    Eigen::MatrixXcd V(rows, cols);
    for (int k = 0; k < rows; ++k) {
        int col = 0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            for (int l = 0; l < confluency[j]; ++l, ++col) {
                const double ff = falling_factorial(k, l);
                if (ff == 0.0) {
                    V(k, col) = 0.0;
                } else {
                    const cplx p = (k == l) ? cplx(1.0)
                                            : std::pow(nodes[j], static_cast<double>(k - l));
                    V(k, col) = ff * p;
                }
            }
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double smin = sigma(sigma.size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (info) {
        info->condition = cond;
        info->ill_conditioned = cond > condition_cap;
    }
    if (cond > condition_cap)
        log_info("vandermonde_solve condition estimate " + std::to_string(cond) +
                 " exceeds cap " + std::to_string(condition_cap));

    Eigen::VectorXcd b(rows);
    for (int k = 0; k < rows; ++k)
        b(k) = rhs[k];
    return svd.solve(b);
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int x, int y) { parent[find(x)] = find(y); }
};

} // namespace

CommonRoots common_roots(const std::vector<Polynomial>& polys, int mult, double tol) {
    if (mult < 1)
        fail(errc::length_mismatch, "multiplicity must be >= 1");

    std::vector<int> nonzero;
    for (std::size_t i = 0; i < polys.size(); ++i)
        if (!polys[i].is_zero())
            nonzero.push_back(static_cast<int>(i));
    if (nonzero.empty())
        fail(errc::zero_polynomial, "common_roots needs at least one nonzero polynomial");

    CommonRoots result;
    result.deflated = polys;

    // A constant polynomial has no roots, so nothing can be common.
    bool any_constant = false;
    std::vector<std::vector<cplx>> all_roots(polys.size());
    for (int idx : nonzero) {
        if (polys[idx].degree() == 0) {
            any_constant = true;
            continue;
        }
        all_roots[idx] = roots(polys[idx]);
    }
    if (any_constant)
        return result;

    // Single-linkage clustering over the union of roots of all polynomials.
    struct Tagged {
        cplx z;
        int poly;
    };
    std::vector<Tagged> pts;
    for (int idx : nonzero)
        for (const cplx& z : all_roots[idx])
            pts.push_back({z, idx});

    UnionFind uf(static_cast<int>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (std::abs(pts[i].z - pts[j].z) <= tol)
                uf.unite(static_cast<int>(i), static_cast<int>(j));

    std::vector<std::vector<int>> clusters(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        clusters[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));

    std::vector<cplx> centers;
    for (const auto& members : clusters) {
        if (members.empty())
            continue;
        // per-polynomial root counts inside this cluster
        bool qualifies = true;
        for (int idx : nonzero) {
            int count = 0;
            for (int m : members)
                if (pts[m].poly == idx)
                    ++count;
            if (count < mult) {
                qualifies = false;
                break;
            }
        }
        if (!qualifies)
            continue;
        // Vieta-stable center: average the per-polynomial cluster means.
        cplx center = 0.0;
        for (int idx : nonzero) {
            cplx sum = 0.0;
            int count = 0;
            for (int m : members)
                if (pts[m].poly == idx) {
                    sum += pts[m].z;
                    ++count;
                }
            center += sum / static_cast<double>(count);
        }
        center /= static_cast<double>(nonzero.size());
        centers.push_back(center);
    }

    std::sort(centers.begin(), centers.end(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });

    double max_residual = 0.0;
    for (int idx : nonzero) {
        Polynomial q = result.deflated[idx];
        const double scale = std::max(q.max_abs_coeff(), 1e-300);
        for (const cplx& c : centers) {
            for (int t = 0; t < mult; ++t) {
                cplx rem;
                q = q.deflated(c, &rem);
                max_residual = std::max(max_residual, std::abs(rem) / scale);
            }
        }
        result.deflated[idx] = q;
    }

    result.roots = std::move(centers);
    result.max_deflation_residual = max_residual;
    return result;
}

double falling_factorial(int n, int j) {
    double acc = 1.0;
    for (int t = 0; t < j; ++t)
        acc *= static_cast<double>(n - t);
    return acc;
}

} // namespace momrec
