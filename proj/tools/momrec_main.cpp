// momrec - batch front-end for moment-based signal reconstruction.
//
// Subcommands: synth | moments | prony | dfinite | verify. All I/O is UTF-8
// JSON; exit codes: 0 success, 1 I/O, 2 schema, 3 quadrature, 4 solver.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momrec/json_io.hpp"
#include "momrec/log.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace momrec;

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case errc::io_error: return 1;
    case errc::schema_error: return 2;
    case errc::quadrature_failure: return 3;
    default: return 4;
    }
}

/// Runs fn(i) for each input file index, fanning across `jobs` workers.
/// Returns the worst exit code.
template <class F>
int run_jobs(int n, int jobs, F&& fn) {
    std::atomic<int> worst{0};
    auto wrapped = [&](int i) {
        try {
            fn(i);
        } catch (const Error& e) {
            log_error(e.what());
            std::cerr << "momrec: " << e.what() << "\n";
            int code = exit_code_for(e);
            int cur = worst.load();
            while (code > cur && !worst.compare_exchange_weak(cur, code)) {
            }
        } catch (const std::exception& e) {
            std::cerr << "momrec: " << e.what() << "\n";
            int cur = worst.load();
            while (4 > cur && !worst.compare_exchange_weak(cur, 4)) {
            }
        }
    };
#if defined(_OPENMP)
    if (jobs > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
        for (int i = 0; i < n; ++i)
            wrapped(i);
        return worst.load();
    }
#endif
    (void)jobs;
    for (int i = 0; i < n; ++i)
        wrapped(i);
    return worst.load();
}

/// Output path for input i: `out` itself for a single input, or a derived
/// name inside the directory `out` for a batch.
std::string output_path(const std::vector<std::string>& inputs, const std::string& out,
                        int i, const std::string& suffix) {
    if (inputs.size() == 1)
        return out;
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path stem = fs::path(inputs[static_cast<std::size_t>(i)]).stem();
    return (dir / (stem.string() + "." + suffix + ".json")).string();
}

SignalFile load_signal(const std::string& path) {
    return signal_from_json(read_file(path));
}

MeasurementFile load_measurement(const std::string& path) {
    return measurement_from_json(read_file(path));
}

std::vector<int> parse_degs(const std::string& s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos)
            next = s.size();
        try {
            out.push_back(std::stoi(s.substr(pos, next - pos)));
        } catch (const std::exception&) {
            fail(errc::schema_error, "--degs expects a comma-separated integer list");
        }
        pos = next + 1;
    }
    if (out.empty())
        fail(errc::schema_error, "--degs expects a comma-separated integer list");
    return out;
}

SignalFile synth_from_spec(const std::string& text, unsigned seed) {
    // a random-template document generates a deterministic fixture
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("type") &&
        j["type"] == "random_piecewise_poly") {
        for (const auto& [key, value] : j.items())
            if (key != "schema_version" && key != "type" && key != "max_degree" &&
                key != "jumps" && key != "interval")
                fail(errc::schema_error, "random template: unknown field '" + key + "'");
        const int max_degree = j.value("max_degree", 3);
        const int jumps = j.value("jumps", 1);
        double a = 0.0, b = 1.0;
        if (j.contains("interval")) {
            a = j["interval"][0].get<double>();
            b = j["interval"][1].get<double>();
        }
        std::mt19937 rng(seed);
        SignalFile out;
        out.signal = random_piecewise_poly(rng, max_degree, jumps, a, b);
        return out;
    }
    return signal_from_json(text);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-based reconstruction of structured signals"};
    app.require_subcommand(1);

    std::vector<std::string> inputs;
    std::string out;
    std::string aux_input;
    int jobs = 1;
    unsigned seed = 0;
    int kmax = 16;
    std::string kind = "poly";
    double tol = 1e-12;
    int s_nodes = 1;
    int r_order = 0;
    std::string kernel = "identity";
    int order = 1;
    std::string degs_str = "0,0";
    int jumps = 0;
    double verify_tol = 1e-8;

    auto* synth = app.add_subcommand("synth", "canonicalize a signal spec");
    synth->add_option("input", inputs, "spec JSON file(s)")->required();
    synth->add_option("-o,--output", out, "output file (or directory for a batch)")
        ->required();
    synth->add_option("--seed", seed, "seed for random templates");
    synth->add_option("--jobs", jobs, "parallel workers for a batch");

    auto* moments = app.add_subcommand("moments", "compute measurements of a signal");
    moments->add_option("input", inputs, "signal JSON file(s)")->required();
    moments->add_option("-o,--output", out, "output file (or directory)")->required();
    moments->add_option("--kmax", kmax, "highest moment order / Fourier frequency")
        ->required();
    moments->add_option("--kind", kind, "poly | fourier")
        ->check(CLI::IsMember({"poly", "fourier"}));
    moments->add_option("--tol", tol, "quadrature tolerance");
    moments->add_option("--jobs", jobs, "parallel workers for a batch");

    auto* prony = app.add_subcommand("prony", "solve a generalized Prony system");
    prony->add_option("input", inputs, "measurement JSON file(s)")->required();
    prony->add_option("-o,--output", out, "output file (or directory)")->required();
    prony->add_option("--s", s_nodes, "number of shifts/nodes")->required();
    prony->add_option("--r", r_order, "highest kernel-derivative order in the model");
    prony->add_option("--kernel", kernel,
                      "identity | gaussian[:sigma] | box | dirac | kernel JSON file");
    prony->add_option("--jobs", jobs, "parallel workers for a batch");

    auto* dfinite = app.add_subcommand("dfinite", "reconstruct a piecewise D-finite model");
    dfinite->add_option("input", inputs, "measurement JSON file(s)")->required();
    dfinite->add_option("-o,--output", out, "output file (or directory)")->required();
    dfinite->add_option("--order", order, "operator order N")->required();
    dfinite->add_option("--degs", degs_str, "coefficient degrees d_0,...,d_N")->required();
    dfinite->add_option("--jumps", jumps, "number of jump points p")->required();
    dfinite->add_option("--jobs", jobs, "parallel workers for a batch");

    auto* verify = app.add_subcommand("verify", "verify a model against measurements");
    verify->add_option("model", aux_input, "model JSON file")->required();
    verify->add_option("input", inputs, "measurement JSON file(s)")->required();
    verify->add_option("-o,--output", out, "report file (or directory)");
    verify->add_option("--tol", verify_tol, "residual tolerance");
    verify->add_option("--jobs", jobs, "parallel workers for a batch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    const int n = static_cast<int>(inputs.size());

    if (synth->parsed()) {
        return run_jobs(n, jobs, [&](int i) {
            const SignalFile sig = synth_from_spec(read_file(inputs[i]), seed);
            write_file(output_path(inputs, out, i, "signal"), signal_to_json(sig));
        });
    }

    if (moments->parsed()) {
        return run_jobs(n, jobs, [&](int i) {
            const SignalFile sig = load_signal(inputs[i]);
            MeasurementFile mf;
            if (kind == "poly") {
                mf.kind = MeasurementFile::Kind::poly;
                if (sig.is_piecewise()) {
                    const PiecewiseSpec& pw = sig.piecewise();
                    bool all_poly = true;
                    for (const Piece& p : pw.pieces)
                        all_poly = all_poly && p.kind == Piece::Kind::polynomial;
                    mf.moments = all_poly ? pp_moments(pw, kmax) : quad_moments(pw, kmax, tol);
                } else {
                    mf.moments = shift_model_moments(sig.shift(), kmax);
                }
            } else {
                mf.kind = MeasurementFile::Kind::fourier;
                mf.fourier = sig.is_piecewise()
                                 ? fourier_coefficients(sig.piecewise(), kmax, tol)
                                 : fourier_coefficients(sig.shift(), kmax, tol);
            }
            write_file(output_path(inputs, out, i, "moments"), measurement_to_json(mf));
        });
    }

    if (prony->parsed()) {
        return run_jobs(n, jobs, [&](int i) {
            const MeasurementFile mf = load_measurement(inputs[i]);
            std::string text;
            if (mf.kind == MeasurementFile::Kind::fourier) {
                const KernelSpec spec = kernel == "identity"
                                            ? KernelSpec::dirac()
                                            : kernel_from_string(kernel);
                const MomentSequence M =
                    fourier_generalized_moments(mf.fourier, spec, mf.fourier.k_range);
                const ShiftModel model = solve_fourier_shifts(M, s_nodes, {}, spec);
                text = prony_solution_to_json(model.solution, MeasurementDomain::fourier,
                                              &model.shifts);
            } else {
                MomentSequence M = mf.moments;
                if (kernel != "identity") {
                    const KernelSpec spec = kernel_from_string(kernel);
                    const DualCoefficients C =
                        dual_coefficients(spec, static_cast<int>(M.size()) - 1);
                    M = generalized_poly_moments(M, C);
                }
                const PronySolution sol = r_order > 0
                                              ? solve_prony_confluent(M, s_nodes, r_order)
                                              : solve_prony(M, s_nodes);
                text = prony_solution_to_json(sol, MeasurementDomain::moments);
            }
            write_file(output_path(inputs, out, i, "solution"), text);
        });
    }

    if (dfinite->parsed()) {
        return run_jobs(n, jobs, [&](int i) {
            const MeasurementFile mf = load_measurement(inputs[i]);
            if (mf.kind != MeasurementFile::Kind::poly)
                fail(errc::schema_error, "dfinite expects polynomial moments");
            const std::vector<int> degs = parse_degs(degs_str);
            if (static_cast<int>(degs.size()) != order + 1)
                fail(errc::schema_error, "--degs needs order+1 entries");
            const PiecewiseDFiniteModel model = reconstruct(
                mf.moments, order, degs, jumps, mf.moments.a, mf.moments.b);
            write_file(output_path(inputs, out, i, "model"),
                       model_to_json(model_file_from(model)));
        });
    }

    if (verify->parsed()) {
        return run_jobs(n, jobs, [&](int i) {
            const ModelFile file = model_from_json(read_file(aux_input));
            const MeasurementFile mf = load_measurement(inputs[i]);
            if (mf.kind != MeasurementFile::Kind::poly)
                fail(errc::schema_error, "verify expects polynomial moments");
            const MomentSequence& m = mf.moments;

            VerifyReport report;
            report.tolerance = verify_tol;
            report.degenerate = m.max_abs() == 0.0;

            // recompose the augmented operator prod (x - xi)^N * reduced
            std::vector<cplx> s_roots;
            for (double xi : file.jumps)
                for (int t = 0; t < file.order; ++t)
                    s_roots.emplace_back(xi, 0.0);
            const Polynomial s = Polynomial::from_roots(s_roots);
            DifferentialOperator augmented;
            for (const Polynomial& q : file.reduced.p)
                augmented.p.push_back(s * q);
            augmented.normalize();

            report.recurrence_residual = recurrence_residual(m, augmented, file.a, file.b);
            const int T = std::max(
                0, static_cast<int>(m.size()) - 1 - 2 * file.order);
            report.pade_hermite_residual =
                pade_hermite_residual(augmented, m, T).residual;

            const PiecewiseDFiniteModel model = rebuild_model(file);
            std::vector<double> cuts{file.a};
            cuts.insert(cuts.end(), file.jumps.begin(), file.jumps.end());
            cuts.push_back(file.b);
            const DenseMatrix C = basis_moment_matrix(
                model.basis, cuts, static_cast<int>(m.size()) - 1);
            Eigen::VectorXd alpha(file.alpha.size());
            int idx = 0;
            for (Eigen::Index col = 0; col < file.alpha.cols(); ++col)
                for (Eigen::Index row = 0; row < file.alpha.rows(); ++row)
                    alpha(idx++) = file.alpha(row, col);
            Eigen::VectorXd rhs(C.rows());
            for (Eigen::Index k = 0; k < C.rows(); ++k)
                rhs(k) = m[static_cast<std::size_t>(k)].real();
            const double defect = (C * alpha - rhs).cwiseAbs().maxCoeff();
            report.moment_residual =
                report.degenerate ? defect : defect / std::max(m.max_abs(), 1e-300);

            report.pass = !report.degenerate &&
                          report.recurrence_residual <= verify_tol &&
                          report.pade_hermite_residual <= verify_tol &&
                          report.moment_residual <= verify_tol;

            const std::string text = verify_report_to_json(report);
            if (!out.empty())
                write_file(output_path(inputs, out, i, "report"), text);
            std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
        });
    }

    return 0;
}
