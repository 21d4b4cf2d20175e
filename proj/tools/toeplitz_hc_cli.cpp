#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/examples.hpp"
#include "toeplitz_hc/operator.hpp"
#include "toeplitz_hc/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

using namespace toeplitz_hc;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;
constexpr int kExitInconclusive = 3;

/// Every knob of a run; echoed into each report.
struct RunConfig {
    std::string command;
    std::string symbol_file;
    std::string example;
    json params = json::object();
    int grid = 512;
    double mesh = 1e-3;
    double rho = 1.0;
    std::optional<std::string> lambda, lambda0, lambda1;
    std::string condition = "all";
    int size = 512;
    int steps = 200;
    std::uint64_t seed = 1;
    double net_eps = 0.25;
    std::string out;

    [[nodiscard]] json to_json() const
    {
        const auto opt = [](const std::optional<std::string> &s) { return s ? json(*s) : json(nullptr); };
        return {{"command", command},
                {"symbol_file", symbol_file.empty() ? json(nullptr) : json(symbol_file)},
                {"example", example.empty() ? json(nullptr) : json(example)},
                {"params", params},
                {"grid", grid},
                {"mesh", mesh},
                {"rho", rho},
                {"lambda", opt(lambda)},
                {"lambda0", opt(lambda0)},
                {"lambda1", opt(lambda1)},
                {"condition", condition},
                {"size", size},
                {"steps", steps},
                {"seed", seed},
                {"net_eps", net_eps},
                {"out", out.empty() ? json(nullptr) : json(out)},
                {"threads", thread_count()}};
    }
};

/// Preset parameters that have their own flags.
struct ParamFlags {
    std::map<std::string, double> values;
    std::string json_text;
};

cplx parse_complex(const std::string &s)
{
    std::istringstream in(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    in >> re;
    THC_FAIL_IF(in.fail(), ParamInvalid, "cannot parse complex value '" + s + "' (expected RE or RE,IM)");
    if (in >> comma) {
        THC_FAIL_IF(comma != ',' || !(in >> im), ParamInvalid, "cannot parse complex value '" + s + "'");
    }
    std::string rest;
    THC_FAIL_IF(static_cast<bool>(in >> rest), ParamInvalid, "trailing characters in '" + s + "'");
    return {re, im};
}

json read_json_file(const std::string &path)
{
    std::ifstream f(path);
    THC_FAIL_IF(!f, SchemaError, "cannot open " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::SchemaError,
                    path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

struct Loaded {
    Symbol phi;
    std::optional<Symbol> h;
    json source;
};

Loaded load_symbol(RunConfig &cfg, const ParamFlags &flags)
{
    THC_FAIL_IF(cfg.symbol_file.empty() == cfg.example.empty(), ParamInvalid,
                "give exactly one of --symbol FILE or --example ID");
    if (!flags.json_text.empty()) {
        try {
            cfg.params = json::parse(flags.json_text);
        } catch (const json::parse_error &e) {
            throw Error(ErrorCode::SchemaError, std::string("--params: ") + e.what());
        }
        THC_FAIL_IF(!cfg.params.is_object(), SchemaError, "--params must be a JSON object");
    }
    for (const auto &[k, v] : flags.values) {
        cfg.params[k] = v;
    }
    // Integral keys stay integers.
    for (const char *k : {"n", "N"}) {
        if (cfg.params.contains(k) && cfg.params[k].is_number_float()) {
            cfg.params[k] = static_cast<int>(std::lround(cfg.params[k].get<double>()));
        }
    }
    if (!cfg.example.empty()) {
        examples::Fixture f = examples::example_symbol(cfg.example, cfg.params);
        return {f.phi, f.h, {{"example", cfg.example}, {"params", f.params}}};
    }
    THC_FAIL_IF(!cfg.params.empty(), ParamInvalid, "preset parameters need --example");
    json j = read_json_file(cfg.symbol_file);
    // Accept a fixture dump from the example subcommand as well.
    const json &sj = j.contains("symbol") ? j.at("symbol") : j;
    try {
        Symbol s = Symbol::from_json(sj);
        std::optional<Symbol> h;
        if (j.contains("h") && !j.at("h").is_null()) {
            h = Symbol::from_json(j.at("h"));
        }
        return {s, h, {{"symbol_file", cfg.symbol_file}}};
    } catch (const json::exception &e) {
        throw Error(ErrorCode::SchemaError, cfg.symbol_file + ": " + e.what());
    }
}

conditions::PlaneOptions plane_options(const RunConfig &cfg)
{
    conditions::PlaneOptions po;
    po.region.grid_n = cfg.grid;
    po.region.curve.mesh = cfg.mesh;
    return po;
}

void write_file(const RunConfig &cfg, const std::string &name, const std::string &content)
{
    fs::create_directories(cfg.out);
    std::ofstream f(fs::path(cfg.out) / name, std::ios::binary);
    THC_FAIL_IF(!f, SchemaError, "cannot write " + (fs::path(cfg.out) / name).string());
    f << content;
}

void emit_json(const RunConfig &cfg, json report, const std::string &name)
{
    report["config"] = cfg.to_json();
    const std::string text = report.dump(2) + "\n";
    if (!cfg.out.empty()) {
        write_file(cfg, name, text);
    }
    std::cout << text;
}

int tri_exit(conditions::Tri t)
{
    switch (t) {
    case conditions::Tri::Pass:
        return kExitPass;
    case conditions::Tri::Fail:
        return kExitFail;
    case conditions::Tri::Inconclusive:
        break;
    }
    return kExitInconclusive;
}

int verdict_exit(conditions::Verdict v)
{
    switch (v) {
    case conditions::Verdict::CertifiedMVC:
    case conditions::Verdict::CertifiedIAC:
    case conditions::Verdict::CertifiedDVC:
        return kExitPass;
    case conditions::Verdict::NecessaryFailed:
        return kExitFail;
    case conditions::Verdict::Inconclusive:
        break;
    }
    return kExitInconclusive;
}

std::string curve_csv(const valence::BoundaryCurve &c)
{
    std::string out = "t,re,im\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        out += valence::fmt17(c.t[i]) + ',' + valence::fmt17(c.value[i].real()) + ',' +
               valence::fmt17(c.value[i].imag()) + '\n';
    }
    return out;
}

json curve_summary(const valence::BoundaryCurve &c)
{
    json si = json::array();
    for (const valence::SelfIntersection &s : c.self_intersections) {
        si.push_back({{"t1", s.t1}, {"t2", s.t2}, {"point", complex_to_json(s.point)}, {"angle_deg", s.angle_deg}});
    }
    return {{"radius", c.radius},
            {"samples", c.size()},
            {"diameter", c.diameter},
            {"max_spacing", c.max_spacing},
            {"band", c.band()},
            {"multiplicity", c.multiplicity},
            {"intersections_truncated", c.intersections_truncated},
            {"self_intersections", si}};
}

json eigen_table(const Symbol &phi, const std::vector<cplx> &lambdas, int n)
{
    json rows = json::array();
    std::optional<op::ToeplitzSection> section;
    try {
        section = op::ToeplitzSection::from_symbol(phi, n);
    } catch (const Error &e) {
        return {{"n", n}, {"rows", rows}, {"error", e.what()}};
    }
    for (const cplx lam : lambdas) {
        int index = 0;
        for (const op::EigenvectorSpec &spec : op::monomial_specs(phi, lam)) {
            json row{{"lambda", complex_to_json(lam)}, {"basis", index++}};
            try {
                const op::EigenvectorResult r = op::eigenvector(phi, spec, *section);
                row["residual"] = r.residual;
                row["tail_bound"] = r.tail_bound;
            } catch (const Error &e) {
                row["error"] = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return {{"n", n}, {"rows", rows}};
}

int cmd_analyze(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    conditions::ClassifyOptions co;
    co.plane = plane_options(cfg);
    if (cfg.lambda) {
        co.lambda_iac = parse_complex(*cfg.lambda);
    }
    if (cfg.lambda0) {
        co.lambda0 = parse_complex(*cfg.lambda0);
    }
    if (cfg.lambda1) {
        co.lambda1 = parse_complex(*cfg.lambda1);
    }
    const conditions::ConditionReport rep = conditions::classify(s.phi, co);
    const conditions::Plane plane = conditions::Plane::build(s.phi, 1.0, co.plane);

    json report{{"source", s.source}, {"report", rep.to_json()}, {"options", co.to_json()}};
    json regions = plane.to_json();
    regions.erase("map");
    regions["legend"] = plane.map().to_json().at("legend");
    regions["components"] = plane.map().components.size();
    regions["edges"] = plane.map().edges.size();
    report["regions"] = regions;

    if (rep.necessary.ok) {
        const conditions::SpectrumMask mask = conditions::spectrum_estimate(plane, s.phi.degree());
        json sp{{"cells", mask.count()}, {"grid_n", mask.grid_n}, {"path", nullptr}};
        if (!cfg.out.empty()) {
            write_file(cfg, "spectrum.csv", mask.to_csv());
            sp["path"] = (fs::path(cfg.out) / "spectrum.csv").string();
        }
        report["spectrum"] = sp;
    } else {
        report["spectrum"] = {{"skipped", "symbol is not N-valent"}};
    }
    report["eigen"] = eigen_table(s.phi, conditions::lambda_lattice(plane, rep.spe, 4), cfg.size);
    emit_json(cfg, report, "analyze.json");
    return verdict_exit(rep.verdict);
}

int cmd_regions(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    const conditions::Plane plane = conditions::Plane::build(s.phi, cfg.rho, plane_options(cfg));
    json report{{"source", s.source}, {"plane", plane.to_json()}};
    if (plane.labeled()) {
        report["regions"] = plane.map().to_json();
        if (!cfg.out.empty()) {
            write_file(cfg, "regions.csv", plane.map().to_csv());
        }
    }
    emit_json(cfg, report, "regions.json");
    return kExitPass;
}

int cmd_curve(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    valence::CurveOptions co;
    co.mesh = cfg.mesh;
    const valence::BoundaryCurve c = valence::build_curve(s.phi, cfg.rho, co);
    const std::string csv = curve_csv(c);
    if (cfg.out.empty()) {
        std::cout << csv;
        return kExitPass;
    }
    write_file(cfg, "curve.csv", csv);
    json report{{"source", s.source}, {"curve", curve_summary(c)}, {"csv", (fs::path(cfg.out) / "curve.csv").string()}};
    report["config"] = cfg.to_json();
    write_file(cfg, "curve.json", report.dump(2) + "\n");
    return kExitPass;
}

int cmd_check(RunConfig &cfg, const ParamFlags &flags)
{
    using namespace conditions;
    const Loaded s = load_symbol(cfg, flags);
    const PlaneOptions po = plane_options(cfg);
    const std::string &c = cfg.condition;
    json result;
    int code = kExitInconclusive;
    if (c == "all") {
        ClassifyOptions co;
        co.plane = po;
        if (cfg.lambda) {
            co.lambda_iac = parse_complex(*cfg.lambda);
        }
        const ConditionReport rep = classify(s.phi, co);
        result = rep.to_json();
        code = verdict_exit(rep.verdict);
    } else if (c == "necessary") {
        const NecessaryResult r = check_necessary(Plane::build(s.phi, 1.0, po), s.phi.degree());
        result = r.to_json();
        code = r.ok ? kExitPass : kExitFail;
    } else if (c == "spe") {
        const SpeResult r = check_spe(Plane::build(s.phi, 1.0, po));
        result = r.to_json();
        code = r.ok ? kExitPass : kExitFail;
    } else if (c == "mvc") {
        const MvcResult r = check_mvc(s.phi, po);
        result = r.to_json();
        code = tri_exit(r.verdict);
    } else if (c == "iac") {
        cplx lam;
        if (cfg.lambda) {
            lam = parse_complex(*cfg.lambda);
        } else if (cfg.example == "ex3") {
            lam = complex_from_json(examples::example_symbol("ex3", cfg.params).params.at("lambda"));
        } else {
            const Plane p = Plane::build(s.phi, 1.0, po);
            const auto lat = lambda_lattice(p, check_spe(p), 1);
            THC_FAIL_IF(lat.empty(), LambdaInRange, "no admissible lambda; pass --lambda");
            lam = lat.front();
        }
        const IacResult r = check_iac(s.phi, lam);
        result = r.to_json();
        code = tri_exit(r.verdict);
    } else if (c == "dvc") {
        const Plane p = Plane::build(s.phi, 1.0, po);
        const SpeResult spe = check_spe(p);
        const std::optional<cplx> l0 = cfg.lambda0 ? std::optional(parse_complex(*cfg.lambda0)) : spe.lambda0;
        const std::optional<cplx> l1 = cfg.lambda1 ? std::optional(parse_complex(*cfg.lambda1)) : spe.lambda1;
        THC_FAIL_IF(!l0 || !l1, LambdaNotInHole, "no hole witnesses; pass --lambda0 and --lambda1");
        const auto gp = valence::general_position(p.plane_symbol(), p.curve());
        const DvcResult r = check_dvc(p, gp, *l0, *l1);
        result = r.to_json();
        code = tri_exit(r.verdict);
    } else if (c == "dvcprime") {
        const std::optional<Symbol> h = s.h ? s.h : (s.phi.degree() == 0 ? std::optional(s.phi) : std::nullopt);
        THC_FAIL_IF(!h, ParamInvalid, "dvcprime needs an analytic map h; the symbol has poles in the disk");
        valence::RegionOptions ro = po.region;
        ro.check_face_count = false;
        const valence::RegionMap m = valence::region_map(*h, 1.0, ro);
        const DvcResult r = check_dvc_prime(m, valence::general_position(*h, m.curve));
        result = r.to_json();
        code = tri_exit(r.verdict);
    } else {
        throw Error(ErrorCode::ParamInvalid, "unknown condition '" + c + "'");
    }
    emit_json(cfg, {{"source", s.source}, {"condition", c}, {"result", result}}, "check.json");
    return code;
}

int cmd_spectrum(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    const conditions::Plane plane = conditions::Plane::build(s.phi, 1.0, plane_options(cfg));
    const conditions::NecessaryResult nec = conditions::check_necessary(plane, s.phi.degree());
    const conditions::SpectrumMask mask = conditions::spectrum_estimate(plane, s.phi.degree());
    json report{{"source", s.source}, {"mask", mask.to_json()}, {"n_valent", nec.to_json()}};
    if (!nec.ok) {
        report["notes"] = {"the spectrum formula assumes an N-valent symbol; the mask is shown anyway"};
    }
    if (!cfg.out.empty()) {
        write_file(cfg, "spectrum.csv", mask.to_csv());
    }
    emit_json(cfg, report, "spectrum.json");
    return kExitPass;
}

int cmd_orbit(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    op::OrbitOptions oo;
    oo.steps = cfg.steps;
    oo.seed = cfg.seed;
    oo.eps = cfg.net_eps;
    const op::OrbitStats st = op::orbit_simulate(op::ToeplitzSection::from_symbol(s.phi, cfg.size), oo);
    if (cfg.out.empty()) {
        std::cout << st.to_csv();
        return kExitPass;
    }
    write_file(cfg, "orbit.csv", st.to_csv());
    json report{{"source", s.source}, {"orbit", st.to_json()}};
    report["config"] = cfg.to_json();
    write_file(cfg, "orbit.json", report.dump(2) + "\n");
    return kExitPass;
}

int cmd_eigen(RunConfig &cfg, const ParamFlags &flags)
{
    const Loaded s = load_symbol(cfg, flags);
    cplx lam;
    if (cfg.lambda) {
        lam = parse_complex(*cfg.lambda);
    } else {
        const conditions::Plane p = conditions::Plane::build(s.phi, 1.0, plane_options(cfg));
        const auto lat = conditions::lambda_lattice(p, conditions::check_spe(p), 1);
        THC_FAIL_IF(lat.empty(), LambdaInRange, "no admissible lambda; pass --lambda");
        lam = lat.front();
    }
    const op::ToeplitzSection sec = op::ToeplitzSection::from_symbol(s.phi, cfg.size);
    json rows = json::array();
    int index = 0;
    for (const op::EigenvectorSpec &spec : op::monomial_specs(s.phi, lam)) {
        const op::EigenvectorResult r = op::eigenvector(s.phi, spec, sec);
        rows.push_back({{"basis", index++},
                        {"lambda", complex_to_json(r.lambda)},
                        {"n", r.n},
                        {"residual", r.residual},
                        {"tail_bound", r.tail_bound}});
    }
    emit_json(cfg, {{"source", s.source}, {"lambda", complex_to_json(lam)}, {"eigenvectors", rows}}, "eigen.json");
    return kExitPass;
}

int cmd_example(RunConfig &cfg, const ParamFlags &flags)
{
    if (cfg.example.empty()) {
        json list = json::object();
        for (const std::string &id : examples::example_ids()) {
            list[id] = examples::default_params(id);
        }
        std::cout << list.dump(2) << "\n";
        return kExitPass;
    }
    (void)load_symbol(cfg, flags);
    const examples::Fixture f = examples::example_symbol(cfg.example, cfg.params);
    const std::string text = f.to_json().dump(2) + "\n";
    if (!cfg.out.empty()) {
        write_file(cfg, cfg.example + ".json", text);
    }
    std::cout << text;
    return kExitPass;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Hypercyclicity checks for Toeplitz operators with rational-plus-analytic symbols"};
    app.require_subcommand(1);
    RunConfig cfg;
    ParamFlags flags;

    using Handler = int (*)(RunConfig &, const ParamFlags &);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"analyze", "classify a symbol and report regions, spectrum and eigenvector residuals", cmd_analyze},
        {"regions", "region map with adjacency graph", cmd_regions},
        {"curve", "boundary curve samples and self-intersections", cmd_curve},
        {"check", "run one condition check", cmd_check},
        {"spectrum", "spectrum estimate mask", cmd_spectrum},
        {"orbit", "orbit statistics of a finite section", cmd_orbit},
        {"eigen", "eigenvector residuals at one lambda", cmd_eigen},
        {"example", "dump a preset symbol, or list presets", cmd_example},
    };
    std::vector<std::pair<CLI::App *, Handler>> subs;
    for (const auto &[name, help, fn] : commands) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--symbol", cfg.symbol_file, "symbol JSON file");
        sub->add_option("--example", cfg.example, "preset id");
        sub->add_option("--params", flags.json_text, "preset parameters as a JSON object");
        for (const char *p : {"alpha", "a", "b", "n", "N", "eps", "beta", "rho-param"}) {
            const std::string key = std::string(p) == "rho-param" ? "rho" : p;
            sub->add_option_function<double>(
                std::string("--") + p, [&flags, key](const double &v) { flags.values[key] = v; },
                "preset parameter '" + key + "'");
        }
        sub->add_option("--grid", cfg.grid, "region grid size")->check(CLI::Range(16, 8192));
        sub->add_option("--mesh", cfg.mesh, "curve mesh as a fraction of the diameter")->check(CLI::PositiveNumber);
        sub->add_option("--rho", cfg.rho, "radius for curve and regions")->check(CLI::PositiveNumber);
        sub->add_option("--lambda", cfg.lambda, "lambda as RE,IM");
        sub->add_option("--lambda0", cfg.lambda0, "hole witness inside the disk, RE,IM");
        sub->add_option("--lambda1", cfg.lambda1, "hole witness outside the disk, RE,IM");
        sub->add_option("--size", cfg.size, "finite section size")->check(CLI::Range(1, 1 << 20));
        sub->add_option("--steps", cfg.steps, "orbit steps")->check(CLI::Range(1, 1 << 24));
        sub->add_option("--net-eps", cfg.net_eps, "orbit net spacing");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out, "output directory");
        if (name == "check") {
            sub->add_option("--condition", cfg.condition, "necessary|spe|mvc|iac|dvc|dvcprime|all")
                ->check(CLI::IsMember({"necessary", "spe", "mvc", "iac", "dvc", "dvcprime", "all"}));
        }
        subs.emplace_back(sub, fn);
    }

    CLI11_PARSE(app, argc, argv);
    for (const auto &[sub, fn] : subs) {
        if (!sub->parsed()) {
            continue;
        }
        cfg.command = sub->get_name();
        try {
            return fn(cfg, flags);
        } catch (const Error &e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitError;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitError;
        }
    }
    return kExitError;
}
