#include "momrec/ode_ivp.hpp"

#include <algorithm>
#include <cmath>

#include "momrec/errors.hpp"

namespace momrec {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// embedded 4th order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

struct Stepper {
    const OdeRhs& f;
    const OdeOptions& opts;
    double t;
    Eigen::VectorXd y;
    Eigen::VectorXd k1;
    bool have_k1 = false;
    double h_next = 0.0; // free-running suggestion, signed

    double error_norm(const Eigen::VectorXd& y_new, const Eigen::VectorXd& err) const {
        double norm = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double scale =
                opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            norm = std::max(norm, std::abs(err(i)) / scale);
        }
        return norm;
    }

    /// One accepted step of size at most |h_cap|; updates h_next.
    void step(double h_cap) {
        if (!have_k1) {
            k1 = f(t, y);
            have_k1 = true;
        }
        double h = h_cap;
        for (long attempt = 0; attempt < 64; ++attempt) {
            const Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
            const Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Eigen::VectorXd k5 =
                f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Eigen::VectorXd k6 =
                f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Eigen::VectorXd y_new =
                y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Eigen::VectorXd k7 = f(t + h, y_new);
            const Eigen::VectorXd y_low =
                y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double err = error_norm(y_new, y_new - y_low);
            if (err <= 1.0) {
                t += h;
                y = y_new;
                k1 = k7; // FSAL
                const double grow =
                    err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
                h_next = h * grow;
                return;
            }
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
            if (std::abs(h) < opts.min_step)
                fail(errc::singular_leading_coefficient,
                     "ODE step size underflow near t=" + std::to_string(t));
        }
        fail(errc::singular_leading_coefficient,
             "ODE step control failed near t=" + std::to_string(t));
    }
};

} // namespace

std::vector<Eigen::VectorXd> integrate_to_points(const OdeRhs& f, double t0,
                                                 const Eigen::VectorXd& y0,
                                                 std::span<const double> targets,
                                                 const OdeOptions& opts) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(targets.size());
    if (targets.empty())
        return out;

    const double dir = targets.back() >= t0 ? 1.0 : -1.0;

    Stepper st{f, opts, t0, y0, {}, false, 0.0};
    st.h_next = opts.initial_step != 0.0
                    ? dir * std::abs(opts.initial_step)
                    : dir * std::max(1e-8, std::abs(targets.back() - t0) * 1e-3);

    long steps = 0;
    for (double target : targets) {
        while (dir * (target - st.t) > 1e-15 * std::max(1.0, std::abs(target))) {
            if (++steps > opts.max_steps)
                fail(errc::singular_leading_coefficient, "ODE step budget exhausted");
            double h_try = st.h_next;
            if (dir * (st.t + h_try - target) > 0.0)
                h_try = target - st.t;
            const double saved = st.h_next;
            st.step(h_try);
            // a step clipped to hit the target must not shrink the free-running size
            if (std::abs(st.h_next) < std::abs(saved) && std::abs(h_try) < std::abs(saved))
                st.h_next = saved;
        }
        out.push_back(st.y);
    }
    return out;
}

} // namespace momrec
