#include "momrec/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace momrec {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
    if (!j.is_object())
        fail(errc::schema_error, context + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            fail(errc::schema_error, context + ": unknown field '" + key + "'");
}

void check_version(const json& j, const std::string& context) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion)
        fail(errc::schema_error, context + ": missing or unsupported schema_version");
}

json require(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key))
        fail(errc::schema_error, context + ": missing field '" + key + "'");
    return j[key];
}

json cplx_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j, const std::string& context) {
    if (j.is_number())
        return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cplx(j[0].get<double>(), j[1].get<double>());
    fail(errc::schema_error, context + ": expected a number or [re, im] pair");
}

std::vector<double> doubles_from_json(const json& j, const std::string& context) {
    if (!j.is_array())
        fail(errc::schema_error, context + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number())
            fail(errc::schema_error, context + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

json parse(const std::string& text, const std::string& context) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        fail(errc::schema_error, context + ": malformed JSON");
    return j;
}

json piece_to_json(const Piece& p) {
    json j;
    switch (p.kind) {
    case Piece::Kind::polynomial:
        j["kind"] = "polynomial";
        j["coeffs"] = p.poly;
        break;
    case Piece::Kind::sinusoid:
        j["kind"] = "sinusoid";
        j["amp"] = p.amp;
        j["freq"] = p.freq;
        j["phase"] = p.phase;
        break;
    case Piece::Kind::rational:
        j["kind"] = "rational";
        j["num"] = p.num;
        j["den"] = p.den;
        break;
    case Piece::Kind::callable:
        fail(errc::schema_error, "callable pieces are not serializable");
    }
    return j;
}

Piece piece_from_json(const json& j) {
    const std::string kind = require(j, "kind", "piece").get<std::string>();
    if (kind == "polynomial") {
        check_keys(j, {"kind", "coeffs"}, "piece");
        return Piece::polynomial(doubles_from_json(require(j, "coeffs", "piece"), "piece"));
    }
    if (kind == "sinusoid") {
        check_keys(j, {"kind", "amp", "freq", "phase"}, "piece");
        return Piece::sinusoid(require(j, "amp", "piece").get<double>(),
                               require(j, "freq", "piece").get<double>(),
                               require(j, "phase", "piece").get<double>());
    }
    if (kind == "rational") {
        check_keys(j, {"kind", "num", "den"}, "piece");
        return Piece::rational(doubles_from_json(require(j, "num", "piece"), "piece"),
                               doubles_from_json(require(j, "den", "piece"), "piece"));
    }
    fail(errc::schema_error, "piece: unknown kind '" + kind + "'");
}

} // namespace

std::string signal_to_json(const SignalFile& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    if (s.is_piecewise()) {
        const PiecewiseSpec& pw = s.piecewise();
        j["type"] = "piecewise";
        j["interval"] = {pw.a, pw.b};
        j["breakpoints"] = pw.breakpoints;
        json pieces = json::array();
        for (const Piece& p : pw.pieces)
            pieces.push_back(piece_to_json(p));
        j["pieces"] = pieces;
    } else {
        const ShiftSpec& sh = s.shift();
        j["type"] = "shift";
        j["kernel"] = sh.kernel;
        if (sh.kernel == "gaussian")
            j["sigma"] = sh.sigma;
        if (sh.kernel == "custom")
            j["custom_moments"] = sh.custom_moments;
        j["shifts"] = sh.shifts;
        j["amplitudes"] = sh.amplitudes;
        j["period"] = {sh.a, sh.b};
    }
    return j.dump(2) + "\n";
}

SignalFile signal_from_json(const std::string& text) {
    const json j = parse(text, "signal");
    check_version(j, "signal");
    const std::string type = require(j, "type", "signal").get<std::string>();
    SignalFile out;
    if (type == "piecewise") {
        check_keys(j, {"schema_version", "type", "interval", "breakpoints", "pieces"},
                   "signal");
        PiecewiseSpec pw;
        const auto iv = doubles_from_json(require(j, "interval", "signal"), "signal");
        if (iv.size() != 2)
            fail(errc::schema_error, "signal: interval must be [a, b]");
        pw.a = iv[0];
        pw.b = iv[1];
        pw.breakpoints = doubles_from_json(require(j, "breakpoints", "signal"), "signal");
        for (const auto& pj : require(j, "pieces", "signal"))
            pw.pieces.push_back(piece_from_json(pj));
        pw.validate();
        out.signal = std::move(pw);
    } else if (type == "shift") {
        check_keys(j,
                   {"schema_version", "type", "kernel", "sigma", "custom_moments", "shifts",
                    "amplitudes", "period"},
                   "signal");
        ShiftSpec sh;
        sh.kernel = require(j, "kernel", "signal").get<std::string>();
        if (j.contains("sigma"))
            sh.sigma = j["sigma"].get<double>();
        if (j.contains("custom_moments"))
            sh.custom_moments = doubles_from_json(j["custom_moments"], "signal");
        sh.shifts = doubles_from_json(require(j, "shifts", "signal"), "signal");
        for (const auto& aj : require(j, "amplitudes", "signal"))
            sh.amplitudes.push_back(doubles_from_json(aj, "signal"));
        if (j.contains("period")) {
            const auto iv = doubles_from_json(j["period"], "signal");
            if (iv.size() != 2)
                fail(errc::schema_error, "signal: period must be [a, b]");
            sh.a = iv[0];
            sh.b = iv[1];
        }
        sh.validate();
        out.signal = std::move(sh);
    } else {
        fail(errc::schema_error, "signal: unknown type '" + type + "'");
    }
    return out;
}

std::string measurement_to_json(const MeasurementFile& m) {
    json j;
    j["schema_version"] = kSchemaVersion;
    if (m.kind == MeasurementFile::Kind::poly) {
        j["kind"] = "poly";
        j["interval"] = {m.moments.a, m.moments.b};
        j["provenance"] = provenance_name(m.moments.provenance);
        json values = json::array();
        for (const cplx& v : m.moments.values) {
            if (v.imag() == 0.0)
                values.push_back(v.real());
            else
                values.push_back(cplx_to_json(v));
        }
        j["values"] = values;
    } else {
        j["kind"] = "fourier";
        j["interval"] = {m.fourier.a, m.fourier.b};
        j["provenance"] = provenance_name(m.fourier.provenance);
        j["k_range"] = m.fourier.k_range;
        json values = json::array();
        for (const cplx& v : m.fourier.values)
            values.push_back(cplx_to_json(v));
        j["values"] = values;
    }
    return j.dump(2) + "\n";
}

MeasurementFile measurement_from_json(const std::string& text) {
    const json j = parse(text, "measurement");
    check_version(j, "measurement");
    check_keys(j, {"schema_version", "kind", "interval", "values", "provenance", "k_range"},
               "measurement");
    MeasurementFile out;
    const std::string kind = require(j, "kind", "measurement").get<std::string>();
    const auto iv = doubles_from_json(require(j, "interval", "measurement"), "measurement");
    if (iv.size() != 2)
        fail(errc::schema_error, "measurement: interval must be [a, b]");
    const Provenance prov =
        provenance_from_name(require(j, "provenance", "measurement").get<std::string>());
    if (kind == "poly") {
        out.kind = MeasurementFile::Kind::poly;
        out.moments.a = iv[0];
        out.moments.b = iv[1];
        out.moments.provenance = prov;
        for (const auto& v : require(j, "values", "measurement"))
            out.moments.values.push_back(cplx_from_json(v, "measurement"));
    } else if (kind == "fourier") {
        out.kind = MeasurementFile::Kind::fourier;
        const int k_range = require(j, "k_range", "measurement").get<int>();
        out.fourier = FourierCoefficients(k_range, iv[0], iv[1], prov);
        const json values = require(j, "values", "measurement");
        if (static_cast<int>(values.size()) != 2 * k_range + 1)
            fail(errc::schema_error, "measurement: need 2*k_range+1 Fourier values");
        for (int i = 0; i < static_cast<int>(values.size()); ++i)
            out.fourier.values[static_cast<std::size_t>(i)] =
                cplx_from_json(values[i], "measurement");
    } else {
        fail(errc::schema_error, "measurement: unknown kind '" + kind + "'");
    }
    return out;
}

std::string prony_solution_to_json(const PronySolution& sol, MeasurementDomain domain,
                                   const std::vector<double>* shifts) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "prony_solution";
    j["domain"] = domain == MeasurementDomain::fourier ? "fourier" : "moments";
    json nodes = json::array();
    for (const cplx& z : sol.nodes)
        nodes.push_back(cplx_to_json(z));
    j["nodes"] = nodes;
    json amps = json::array();
    for (const auto& per_node : sol.amplitudes) {
        json a = json::array();
        for (const cplx& z : per_node)
            a.push_back(cplx_to_json(z));
        amps.push_back(a);
    }
    j["amplitudes"] = amps;
    j["residual"] = sol.residual;
    if (shifts)
        j["shifts"] = *shifts;
    return j.dump(2) + "\n";
}

namespace {

json operator_to_json(const DifferentialOperator& op) {
    json coeffs = json::array();
    for (const Polynomial& q : op.p)
        coeffs.push_back(q.real_coeffs());
    return coeffs;
}

DifferentialOperator operator_from_json(const json& j, const std::string& context) {
    DifferentialOperator op;
    if (!j.is_array() || j.empty())
        fail(errc::schema_error, context + ": operator must be an array of coefficient rows");
    for (const auto& row : j) {
        std::vector<double> c = doubles_from_json(row, context);
        op.p.emplace_back(std::span<const double>(c));
    }
    return op;
}

} // namespace

std::string model_to_json(const ModelFile& m) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "dfinite_model";
    j["interval"] = {m.a, m.b};
    j["order"] = m.order;
    j["jumps"] = m.jumps;
    j["reduced_operator"] = operator_to_json(m.reduced);
    json alpha = json::array();
    for (Eigen::Index n = 0; n < m.alpha.cols(); ++n) {
        json col = json::array();
        for (Eigen::Index i = 0; i < m.alpha.rows(); ++i)
            col.push_back(m.alpha(i, n));
        alpha.push_back(col);
    }
    j["alpha"] = alpha;
    j["diagnostics"] = {
        {"rows_used", m.diag.rows_used},
        {"nullspace_dim", m.diag.nullspace_dim},
        {"sigma_ratio", m.diag.sigma_ratio},
        {"jump_residual", m.diag.jump_residual},
        {"moment_residual", m.diag.moment_residual},
        {"recurrence_residual", m.diag.recurrence_residual},
        {"ambiguous", m.diag.ambiguous},
        {"disambiguated", m.diag.disambiguated},
    };
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    const json j = parse(text, "model");
    check_version(j, "model");
    check_keys(j,
               {"schema_version", "type", "interval", "order", "jumps", "reduced_operator",
                "alpha", "diagnostics"},
               "model");
    if (require(j, "type", "model").get<std::string>() != "dfinite_model")
        fail(errc::schema_error, "model: wrong type");
    ModelFile out;
    const auto iv = doubles_from_json(require(j, "interval", "model"), "model");
    if (iv.size() != 2)
        fail(errc::schema_error, "model: interval must be [a, b]");
    out.a = iv[0];
    out.b = iv[1];
    out.order = require(j, "order", "model").get<int>();
    out.jumps = doubles_from_json(require(j, "jumps", "model"), "model");
    out.reduced = operator_from_json(require(j, "reduced_operator", "model"), "model");
    const json alpha = require(j, "alpha", "model");
    const Eigen::Index cols = static_cast<Eigen::Index>(alpha.size());
    out.alpha.resize(out.order, cols);
    for (Eigen::Index n = 0; n < cols; ++n) {
        const auto col = doubles_from_json(alpha[static_cast<std::size_t>(n)], "model");
        if (static_cast<int>(col.size()) != out.order)
            fail(errc::schema_error, "model: alpha column has wrong length");
        for (Eigen::Index i = 0; i < out.order; ++i)
            out.alpha(i, n) = col[static_cast<std::size_t>(i)];
    }
    if (j.contains("diagnostics")) {
        const json d = j["diagnostics"];
        check_keys(d,
                   {"rows_used", "nullspace_dim", "sigma_ratio", "jump_residual",
                    "moment_residual", "recurrence_residual", "ambiguous", "disambiguated"},
                   "model.diagnostics");
        out.diag.rows_used = d.value("rows_used", 0);
        out.diag.nullspace_dim = d.value("nullspace_dim", 0);
        out.diag.sigma_ratio = d.value("sigma_ratio", 0.0);
        out.diag.jump_residual = d.value("jump_residual", 0.0);
        out.diag.moment_residual = d.value("moment_residual", 0.0);
        out.diag.recurrence_residual = d.value("recurrence_residual", 0.0);
        out.diag.ambiguous = d.value("ambiguous", false);
        out.diag.disambiguated = d.value("disambiguated", false);
    }
    return out;
}

ModelFile model_file_from(const PiecewiseDFiniteModel& model) {
    ModelFile f;
    f.a = model.a;
    f.b = model.b;
    f.order = model.order;
    f.jumps = model.jumps;
    f.reduced = model.reduced;
    f.alpha = model.alpha;
    f.diag = model.diag;
    return f;
}

PiecewiseDFiniteModel rebuild_model(const ModelFile& file, const ReconstructOptions& opts) {
    PiecewiseDFiniteModel model;
    model.a = file.a;
    model.b = file.b;
    model.order = file.order;
    model.jumps = file.jumps;
    model.reduced = file.reduced;
    model.alpha = file.alpha;
    model.diag = file.diag;
    std::vector<double> cuts{file.a};
    cuts.insert(cuts.end(), file.jumps.begin(), file.jumps.end());
    cuts.push_back(file.b);
    for (std::size_t n = 0; n + 1 < cuts.size(); ++n)
        model.basis.push_back(
            fundamental_basis(file.reduced, cuts[n], cuts[n + 1], opts.basis_nodes, opts.ode));
    return model;
}

KernelSpec kernel_from_string(const std::string& name_or_json) {
    if (name_or_json == "gaussian")
        return KernelSpec::gaussian();
    if (name_or_json.rfind("gaussian:", 0) == 0)
        return KernelSpec::gaussian(std::stod(name_or_json.substr(9)));
    if (name_or_json == "box")
        return KernelSpec::box();
    if (name_or_json == "dirac")
        return KernelSpec::dirac();
    // otherwise: a kernel JSON document
    const json j = parse(name_or_json, "kernel");
    check_version(j, "kernel");
    check_keys(j, {"schema_version", "name", "sigma", "fhat_taylor", "convention_scale"},
               "kernel");
    const std::string name = require(j, "name", "kernel").get<std::string>();
    KernelSpec spec;
    if (name == "gaussian")
        spec = KernelSpec::gaussian(j.value("sigma", 1.0));
    else if (name == "box")
        spec = KernelSpec::box();
    else if (name == "dirac")
        spec = KernelSpec::dirac();
    else if (name == "custom") {
        std::vector<cplx> taylor;
        for (const auto& v : require(j, "fhat_taylor", "kernel"))
            taylor.push_back(cplx_from_json(v, "kernel"));
        spec = KernelSpec::custom(std::move(taylor));
    } else {
        fail(errc::schema_error, "kernel: unknown name '" + name + "'");
    }
    if (j.contains("convention_scale"))
        spec.convention_scale = j["convention_scale"].get<double>();
    return spec;
}

std::string verify_report_to_json(const VerifyReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "verify_report";
    j["recurrence_residual"] = r.recurrence_residual;
    j["pade_hermite_residual"] = r.pade_hermite_residual;
    j["moment_residual"] = r.moment_residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["degenerate"] = r.degenerate;
    j["result"] = r.pass ? "PASS" : "FAIL";
    return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io_error, "cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        fail(errc::io_error, "failed writing '" + path + "'");
}

} // namespace momrec
