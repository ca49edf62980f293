#include "cli.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "anop/gallery.hpp"
#include "anop/serialize.hpp"
#include "anop/spectral.hpp"
#include "anop/version.hpp"

namespace anop::cli {

void RunConfig::validate() const
{
    if (!(tol > 0.0)) throw Error(ErrorCode::BadParams, "--tol must be positive");
    if (trunc == 0) throw Error(ErrorCode::BadParams, "--trunc must be positive");
    if (samples == 0) throw Error(ErrorCode::BadParams, "--samples must be positive");
    if (k_grid == 0) throw Error(ErrorCode::BadParams, "--k-grid must be positive");
    if (max_peel == 0) throw Error(ErrorCode::BadParams, "--max-peel must be positive");
}

PredicateOptions RunConfig::predicate() const
{
    PredicateOptions o;
    o.tol = tol;
    o.trunc = trunc;
    o.samples = samples;
    o.seed = seed;
    o.k_grid = k_grid;
    return o;
}

DecomposeOptions RunConfig::decompose() const
{
    DecomposeOptions o;
    o.predicate = predicate();
    o.max_peel = max_peel;
    return o;
}

nlohmann::json RunConfig::to_json() const
{
    return {{"tol", tol},       {"trunc", trunc},       {"samples", samples},           {"seed", seed},
            {"k_grid", k_grid}, {"max_peel", max_peel}, {"output", json ? "json" : "text"}};
}

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SchemaError: return kParse;
    case ErrorCode::BadParams: return kUsage;
    case ErrorCode::NotSelfAdjoint: return kNotSelfAdjoint;
    case ErrorCode::StructureViolation: return kStructureViolation;
    case ErrorCode::NotAN:
    case ErrorCode::StarParanormalRefuted:
    case ErrorCode::NotInvertible:
    case ErrorCode::NotNormAttaining: return kRefuted;
    default: return kInconclusive;
    }
}

int exit_code(VerdictStatus status)
{
    switch (status) {
    case VerdictStatus::Proven: return kProven;
    case VerdictStatus::Refuted: return kRefuted;
    default: return kInconclusive;
    }
}

namespace {

void render(const nlohmann::json& j, const std::string& pad, std::ostream& os)
{
    for (const auto& [key, v] : j.items()) {
        const bool nested_object = v.is_object() && !v.empty();
        const bool object_list = v.is_array() && !v.empty() && v.front().is_object();
        if (nested_object) {
            os << pad << key << ":\n";
            render(v, pad + "  ", os);
        } else if (object_list) {
            os << pad << key << ":\n";
            for (const auto& item : v) {
                os << pad << "  -\n";
                render(item, pad + "    ", os);
            }
        } else {
            os << pad << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        }
    }
}

struct Invocation {
    std::string command;
    std::string file;
    RunConfig cfg;
};

nlohmann::json envelope(const Invocation& inv)
{
    nlohmann::json j = {{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"command", inv.command}, {"config", inv.cfg.to_json()}};
    if (!inv.file.empty()) j["input"] = inv.file;
    return j;
}

void emit(const Invocation& inv, const nlohmann::json& report, std::ostream& out)
{
    if (inv.cfg.json) out << report.dump(2) << "\n";
    else out << render_text(report);
}

OperatorExpr load(const std::string& path)
{
    try {
        return load_operator(path);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
}

int cmd_check(const Invocation& inv, const std::string& predicate, std::ostream& out)
{
    const OperatorExpr t = load(inv.file);
    const PredicateVerdict v = run_predicate(predicate, t, inv.cfg.predicate());
    nlohmann::json rep = envelope(inv);
    rep["result"] = v.to_json();
    emit(inv, rep, out);
    return exit_code(v.status);
}

int cmd_spectrum(const Invocation& inv, const std::string& of, std::ostream& out)
{
    const OperatorExpr t = load(inv.file);
    const SpectralOptions so = inv.cfg.predicate().spectral();
    SpectralSummary s;
    if (of == "T*T") s = positive_spectral_summary(adjoint(t) * t, so);
    else if (of == "TT*") s = positive_spectral_summary(t * adjoint(t), so);
    else s = modulus_summary(t, so);
    nlohmann::json rep = envelope(inv);
    rep["of"] = of;
    rep["result"] = s.to_json(true);
    emit(inv, rep, out);
    return kProven;
}

int cmd_decompose(const Invocation& inv, std::ostream& out)
{
    const OperatorExpr t = load(inv.file);
    const DecompositionCertificate c = peel_decompose(t, inv.cfg.decompose());
    nlohmann::json rep = envelope(inv);
    rep["result"] = c.to_json();
    rep["u_plus_d"] = u_plus_d_view(c).to_json();
    emit(inv, rep, out);
    return kProven;
}

int cmd_certify(const Invocation& inv, std::ostream& out)
{
    const OperatorExpr t = load(inv.file);
    const NormalityCertificate c = certify_normal(t, inv.cfg.decompose());
    nlohmann::json rep = envelope(inv);
    rep["result"] = c.to_json();
    emit(inv, rep, out);
    if (c.route == NormalityRoute::RefutedNormality) return kRefuted;
    if (c.route == NormalityRoute::NotApplicable) return kInconclusive;
    return c.normal && c.commutator_exact_zero ? kProven : kInconclusive;
}

int cmd_audit(const Invocation& inv, std::ostream& out)
{
    const AuditReport a = audit(inv.cfg.predicate());
    if (inv.cfg.json) {
        nlohmann::json rep = envelope(inv);
        rep["result"] = a.to_json();
        out << rep.dump(2) << "\n";
    } else {
        out << render_text(envelope(inv)) << "\n" << a.to_text();
    }
    return kProven;
}

int cmd_gallery(const std::string& name, const std::string& params, std::ostream& out)
{
    nlohmann::json p = nlohmann::json::object();
    if (!params.empty()) {
        try {
            p = nlohmann::json::parse(params);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::BadParams, std::string("gallery parameters: ") + e.what());
        }
    }
    out << serialize_operator(build(name, p)) << "\n";
    return kProven;
}

bool seed_from_env(std::uint64_t& seed)
{
    const char* env = std::getenv("ANOP_SEED");
    if (env == nullptr) return true;
    const std::string s(env);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
    try {
        seed = std::stoull(s);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

} // namespace

std::string render_text(const nlohmann::json& j)
{
    std::ostringstream os;
    render(j, "", os);
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exact toolkit for absolutely norm attaining and *-paranormal operators on l2", kToolName};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Invocation inv;
    RunConfig& cfg = inv.cfg;
    app.add_option("--tol", cfg.tol, "Numerical tolerance")->capture_default_str();
    app.add_option("--trunc", cfg.trunc, "Section size for numerical stages")->capture_default_str();
    app.add_option("--samples", cfg.samples, "Random vectors for sampling refuters")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed (ANOP_SEED overrides)")->capture_default_str();
    app.add_option("--k-grid", cfg.k_grid, "Grid points for the k-family check")->capture_default_str();
    app.add_option("--max-peel", cfg.max_peel, "Peeling budget")->capture_default_str();
    app.add_flag("--json", cfg.json, "JSON output");

    std::string predicate, of = "T*T", name, params;
    CLI::App* check = app.add_subcommand("check", "Decide an operator-class predicate");
    check->add_option("file", inv.file, "Operator file")->required();
    check->add_option("--predicate", predicate, "normal, hyponormal, paranormal, star-paranormal, norm-attaining, an")
        ->required()
        ->check(CLI::IsMember({"normal", "hyponormal", "paranormal", "star-paranormal", "norm-attaining", "an"}));
    CLI::App* spectrum = app.add_subcommand("spectrum", "Spectral summary of T*T, TT* or |T|");
    spectrum->add_option("file", inv.file, "Operator file")->required();
    spectrum->add_option("--of", of, "T*T, TT* or modulus")->check(CLI::IsMember({"T*T", "TT*", "modulus"}))->capture_default_str();
    CLI::App* decompose = app.add_subcommand("decompose", "Certified U + D decomposition");
    decompose->add_option("file", inv.file, "Operator file")->required();
    CLI::App* certify = app.add_subcommand("certify", "Normality certificate");
    certify->add_option("file", inv.file, "Operator file")->required();
    CLI::App* audit_cmd = app.add_subcommand("audit", "Re-derive the checkable claims about the named examples");
    CLI::App* gallery = app.add_subcommand("gallery", "Write a named operator as an operator file");
    gallery->add_option("name", name, "example1, example2, right_shift, scaled_shift, jacobi, theorem_form")->required();
    gallery->add_option("params", params, "Builder parameters as a JSON object");
    for (CLI::App* sub : {check, spectrum, decompose, certify, audit_cmd, gallery}) sub->fallthrough();

    std::vector<std::string> argv_store{kToolName};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        // --help or --version
        std::ostringstream o, d;
        app.exit(e, o, d);
        out << o.str();
        return kProven;
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, d;
        app.exit(e, o, d);
        err << d.str() << o.str();
        return kUsage;
    }

    if (!seed_from_env(cfg.seed)) {
        err << "anop: ANOP_SEED must be a nonnegative integer\n";
        return kUsage;
    }

    inv.command = app.get_subcommands().front()->get_name();
    try {
        cfg.validate();
        if (inv.command == "check") return cmd_check(inv, predicate, out);
        if (inv.command == "spectrum") return cmd_spectrum(inv, of, out);
        if (inv.command == "decompose") return cmd_decompose(inv, out);
        if (inv.command == "certify") return cmd_certify(inv, out);
        if (inv.command == "audit") return cmd_audit(inv, out);
        return cmd_gallery(name, params, out);
    } catch (const Error& e) {
        err << "anop: " << e.what() << "\n";
        if (cfg.json && inv.command != "gallery") {
            nlohmann::json rep = envelope(inv);
            rep["error"] = {{"code", std::string(error_name(e.code()))}, {"message", e.what()}};
            out << rep.dump(2) << "\n";
        }
        return exit_code(e.code());
    }
}

} // namespace anop::cli
