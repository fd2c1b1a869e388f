#pragma once

#include <string>
#include <variant>

#include "momrec/convdual.hpp"
#include "momrec/dfinite.hpp"
#include "momrec/moments.hpp"
#include "momrec/prony.hpp"
#include "momrec/signals.hpp"

// The vendored single-header nlohmann/json is included from json_io.cpp
// only; this header carries just the declarations the CLI and tests need.

namespace momrec {

inline constexpr int kSchemaVersion = 1;

struct SignalFile {
    std::variant<PiecewiseSpec, ShiftSpec> signal;

    bool is_piecewise() const { return std::holds_alternative<PiecewiseSpec>(signal); }
    const PiecewiseSpec& piecewise() const { return std::get<PiecewiseSpec>(signal); }
    const ShiftSpec& shift() const { return std::get<ShiftSpec>(signal); }
};

struct MeasurementFile {
    enum class Kind { poly, fourier } kind = Kind::poly;
    MomentSequence moments;     // kind == poly
    FourierCoefficients fourier; // kind == fourier
};

/// Serialized reconstruction result; the basis is rebuilt on load.
struct ModelFile {
    double a = 0.0, b = 1.0;
    int order = 0;
    std::vector<double> jumps;
    DifferentialOperator reduced;
    Eigen::MatrixXd alpha; // order x (jumps+1)
    ReconstructDiagnostics diag;
};

std::string signal_to_json(const SignalFile& s);
SignalFile signal_from_json(const std::string& text);

std::string measurement_to_json(const MeasurementFile& m);
MeasurementFile measurement_from_json(const std::string& text);

std::string prony_solution_to_json(const PronySolution& sol, MeasurementDomain domain,
                                   const std::vector<double>* shifts = nullptr);

std::string model_to_json(const ModelFile& m);
ModelFile model_from_json(const std::string& text);

ModelFile model_file_from(const PiecewiseDFiniteModel& model);
PiecewiseDFiniteModel rebuild_model(const ModelFile& file,
                                    const ReconstructOptions& opts = {});

/// Builtin kernel names ("gaussian", "gaussian:sigma", "box", "dirac") or a
/// kernel JSON document.
KernelSpec kernel_from_string(const std::string& name_or_json);

struct VerifyReport {
    double recurrence_residual = 0.0;
    double pade_hermite_residual = 0.0;
    double moment_residual = 0.0;
    double tolerance = 1e-8;
    bool pass = false;
    bool degenerate = false; // zero-moment input
};

std::string verify_report_to_json(const VerifyReport& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace momrec
