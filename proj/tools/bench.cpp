// Benchmark of the OpenMP moment kernels against their serial references.
// Each kernel computes independent integrals per output slot, so the two
// paths must agree bit for bit; the benchmark checks that too.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "momrec/parallel.hpp"
#include "momrec/signals.hpp"

using namespace momrec;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

PiecewiseSpec bench_signal() {
    PiecewiseSpec spec;
    spec.a = 0.0;
    spec.b = 3.0;
    spec.breakpoints = {1.1, 2.2};
    spec.pieces = {Piece::sinusoid(1.0, 5.0, 0.3), Piece::rational({1.0}, {1.0, 0.0, 1.0}),
                   Piece::sinusoid(0.7, 9.0, 1.1)};
    return spec;
}

bool bitwise_equal(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size())
        return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

} // namespace

int main(int argc, char** argv) {
    int k_max = 256;
    if (argc > 1)
        k_max = std::atoi(argv[1]);

    const PiecewiseSpec spec = bench_signal();
    std::printf("threads: %d, k_max: %d\n", hardware_threads(), k_max);

    {
        auto t0 = clock_type::now();
        const MomentSequence serial = quad_moments_serial(spec, k_max, 1e-12);
        const double ts = seconds_since(t0);

        t0 = clock_type::now();
        const MomentSequence par = quad_moments(spec, k_max, 1e-12);
        const double tp = seconds_since(t0);

        std::printf("quad_moments         serial %8.3fs  parallel %8.3fs  speedup %.2fx  %s\n",
                    ts, tp, ts / tp,
                    bitwise_equal(serial.values, par.values) ? "bit-identical" : "MISMATCH");
    }

    {
        auto t0 = clock_type::now();
        const FourierCoefficients serial = fourier_coefficients_serial(spec, k_max / 2, 1e-12);
        const double ts = seconds_since(t0);

        t0 = clock_type::now();
        const FourierCoefficients par = fourier_coefficients(spec, k_max / 2, 1e-12);
        const double tp = seconds_since(t0);

        std::printf("fourier_coefficients serial %8.3fs  parallel %8.3fs  speedup %.2fx  %s\n",
                    ts, tp, ts / tp,
                    bitwise_equal(serial.values, par.values) ? "bit-identical" : "MISMATCH");
    }

    return 0;
}
