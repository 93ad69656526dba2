#include "nehari/run.hpp"

#include "nehari/errors.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace nehari {

using nlohmann::json;

namespace {

const std::set<std::string> kModes = {"solve", "constants", "expansion", "gap", "sharp-sweep"};

// Reads one JSON object and rejects keys nobody asked for.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigurationError(path_ + " must be a JSON object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        if (!node_.contains(key)) return fallback;
        return convert<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        used_.insert(key);
        if (!node_.contains(key)) throw ConfigurationError("missing required key " + path_ + "." + key);
        return convert<T>(key);
    }

    Reader child(const std::string& key) {
        used_.insert(key);
        static const json empty = json::object();
        return Reader(node_.contains(key) ? node_.at(key) : empty, path_ + "." + key);
    }

    void finish() const {
        for (const auto& item : node_.items())
            if (!used_.count(item.key())) throw ConfigurationError("unknown key " + path_ + "." + item.key());
    }

private:
    template <typename T>
    T convert(const std::string& key) {
        const json& v = node_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigurationError("");
            } else if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw ConfigurationError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigurationError("");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigurationError("");
            }
            return v.get<T>();
        } catch (const std::exception&) {
            throw ConfigurationError("bad value for " + path_ + "." + key + ": " + v.dump());
        }
    }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

RadialProfile read_profile(Reader& parent, const std::string& key, RadialProfile fallback) {
    if (!parent.has(key)) {
        (void)parent.child(key);
        return fallback;
    }
    Reader r = parent.child(key);
    RadialProfile p;
    p.center = r.get<double>("center", fallback.center);
    p.laplacian_ratio = r.get<double>("laplacian_ratio", fallback.laplacian_ratio);
    r.finish();
    return p;
}

std::vector<double> read_list(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty()) throw ConfigurationError(path + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : node) {
        if (!v.is_number()) throw ConfigurationError(path + " must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

json solve_report_json(const SolveReport& r, bool with_field) {
    json j = {{"branch", to_string(r.branch)},
              {"J_value", r.J_value},
              {"phi_residual", r.phi_residual},
              {"grad_residual", r.grad_residual},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"status", r.status},
              {"sign_ok", r.sign_ok},
              {"small_lambda", r.small_lambda}};
    if (with_field) j["u"] = std::vector<double>(r.u.data(), r.u.data() + r.u.size());
    return j;
}

json both_json(const BothReport& b, bool with_field) {
    return {{"plus", solve_report_json(b.plus, with_field)},
            {"minus", solve_report_json(b.minus, with_field)},
            {"distance_h", b.distance_h},
            {"collinearity", b.collinearity},
            {"distinct", b.distinct},
            {"ordering", b.ordering},
            {"converged", b.converged}};
}

json constants_json(const ConstantsReport& c) {
    return {{"Lambda", c.Lambda}, {"K0_estimate", c.K0}, {"A_eps_estimate", c.A_eps}, {"lambda0", c.lambda0},
            {"lambda2", c.lambda2}, {"xi", c.xi},          {"theta", c.theta},          {"volume", c.volume},
            {"f_max", c.f_max},     {"eps", c.eps},       {"coercive", c.coercive}};
}

void write_trace(std::ostream& os, const std::string& label, const SolveReport& r) {
    for (const auto& row : r.step_trace)
        os << label << ',' << row.iter << ',' << fmt(row.t_projection) << ',' << fmt(row.J) << ','
           << fmt(row.phi_residual) << ',' << fmt(row.grad_residual) << ',' << fmt(row.step) << '\n';
}

double resolve_lambda(const RunConfig& cfg, const ConstantsReport& c) {
    if (cfg.lambda) return *cfg.lambda;
    if (cfg.lambda_factor) {
        if (!c.coercive) throw NumericalError("lambda_factor needs a coercive quadratic form");
        return *cfg.lambda_factor * c.lambda0;
    }
    return cfg.spec.lambda;
}

std::string resolve_out_dir(const std::optional<std::string>& out_override, const std::string& from_config) {
    if (out_override) return *out_override;
    if (const char* env = std::getenv("NEHARI_OUT_DIR"); env && *env) return env;
    return from_config;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

RunConfig parse_config(const std::string& text, const std::optional<std::string>& mode_override) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigurationError("empty configuration");
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigurationError("configuration must be a JSON object");
    if (mode_override) root["mode"] = *mode_override;

    RunConfig cfg;
    Reader top(root, "config");
    cfg.mode = top.require<std::string>("mode");
    if (!kModes.count(cfg.mode)) throw ConfigurationError("unknown mode '" + cfg.mode + "'");

    {
        Reader spec = top.child("spec");
        if (!root.contains("spec")) throw ConfigurationError("missing required key config.spec");
        Reader geom = spec.child("geometry");
        if (!root["spec"].contains("geometry")) throw ConfigurationError("missing required key config.spec.geometry");
        cfg.spec.geom.kind = geometry_kind_from_string(geom.require<std::string>("kind"));
        cfg.spec.geom.n = geom.require<int>("n");
        cfg.spec.geom.R = geom.get<double>("R", 1.0);
        geom.finish();
        cfg.spec.a = read_profile(spec, "a", {});
        cfg.spec.b = read_profile(spec, "b", {});
        cfg.spec.f = read_profile(spec, "f", {1.0, 0.0});
        cfg.spec.q = spec.get<double>("q", cfg.spec.q);
        cfg.spec.sigma = spec.get<double>("sigma", cfg.spec.sigma);
        cfg.spec.mu = spec.get<double>("mu", cfg.spec.mu);
        cfg.spec.r = spec.get<double>("r", cfg.spec.r);
        cfg.spec.s = spec.get<double>("s", cfg.spec.s);
        cfg.spec.sobolev_eps = spec.get<double>("sobolev_eps", cfg.spec.sobolev_eps);
        if (spec.has("lambda") && spec.has("lambda_factor"))
            throw ConfigurationError("give either spec.lambda or spec.lambda_factor, not both");
        if (spec.has("lambda")) cfg.lambda = spec.get<double>("lambda", 0.0);
        if (spec.has("lambda_factor")) {
            cfg.lambda_factor = spec.get<double>("lambda_factor", 0.0);
            if (!(*cfg.lambda_factor >= 0.0)) throw ConfigurationError("spec.lambda_factor must be >= 0");
        }
        (void)spec.get<double>("lambda", 0.0);
        (void)spec.get<double>("lambda_factor", 0.0);
        spec.finish();
        cfg.spec.lambda = cfg.lambda.value_or(0.0);
        cfg.spec.validate();
    }
    {
        Reader grid = top.child("grid");
        cfg.m = grid.get<int>("m", cfg.m);
        cfg.grading = grid.get<double>("grading", cfg.grading);
        grid.finish();
        if (cfg.m < 16) throw ConfigurationError("grid.m must be >= 16");
        if (!(cfg.grading >= 1.0)) throw ConfigurationError("grid.grading must be >= 1");
    }
    {
        Reader s = top.child("solver");
        auto& o = cfg.solver;
        o.tol = s.get<double>("tol", o.tol);
        o.max_iter = s.get<int>("max_iter", o.max_iter);
        o.armijo = s.get<double>("armijo", o.armijo);
        o.shrink = s.get<double>("shrink", o.shrink);
        o.min_step = s.get<double>("min_step", o.min_step);
        o.initial_step = s.get<double>("initial_step", o.initial_step);
        o.distinct_tol = s.get<double>("distinct_tol", o.distinct_tol);
        o.class_tol = s.get<double>("class_tol", o.class_tol);
        o.init_eps = s.get<double>("init_eps", o.init_eps);
        o.init_delta = s.get<double>("init_delta", o.init_delta);
        o.keep_trace = s.get<bool>("keep_trace", o.keep_trace);
        const int seed = s.get<int>("seed", 1);
        cfg.probes = s.get<int>("probes", 0);
        s.finish();
        if (seed < 0) throw ConfigurationError("solver.seed must be >= 0");
        cfg.seed = std::uint64_t(seed);
        if (!(o.tol > 0.0) || o.max_iter < 0 || !(o.armijo > 0.0 && o.armijo < 1.0) || !(o.shrink > 0.0 && o.shrink < 1.0) ||
            !(o.min_step > 0.0) || !(o.initial_step > 0.0) || !(o.class_tol > 0.0) || o.init_eps < 0.0 || o.init_delta < 0.0 ||
            cfg.probes < 0)
            throw ConfigurationError("solver options out of range");
    }
    {
        Reader e = top.child("expansion");
        auto& x = cfg.expansion;
        if (root.contains("expansion") && root["expansion"].contains("eps"))
            x.eps = read_list(root["expansion"]["eps"], "config.expansion.eps");
        (void)e.get<json>("eps", json());
        x.m = e.get<int>("m", x.m);
        x.grading = e.get<double>("grading", x.grading);
        x.delta = e.get<double>("delta", x.delta);
        x.model_ratio = e.get<double>("model_ratio", x.model_ratio);
        e.finish();
        if (x.m < 16 || !(x.grading >= 1.0) || x.delta < 0.0 || !(x.model_ratio > 0.0))
            throw ConfigurationError("expansion options out of range");
    }
    {
        Reader g = top.child("gap");
        if (root.contains("gap") && root["gap"].contains("eps")) cfg.gap_eps = read_list(root["gap"]["eps"], "config.gap.eps");
        (void)g.get<json>("eps", json());
        cfg.gap_delta = g.get<double>("delta", 0.0);
        cfg.gap_resolvable_steps = g.get<int>("resolvable_steps", 0);
        g.finish();
        if (cfg.gap_delta < 0.0) throw ConfigurationError("gap.delta must be >= 0");
        if (cfg.gap_resolvable_steps < 0) throw ConfigurationError("gap.resolvable_steps must be >= 0");
        if (!cfg.gap_eps.empty() && cfg.gap_resolvable_steps > 0)
            throw ConfigurationError("give either gap.eps or gap.resolvable_steps, not both");
    }
    {
        Reader w = top.child("sweep");
        cfg.sweep_levels = w.get<int>("levels", cfg.sweep_levels);
        cfg.sweep_lambda_factor = w.get<double>("lambda_factor", cfg.sweep_lambda_factor);
        w.finish();
        if (cfg.sweep_levels < 1 || !(cfg.sweep_lambda_factor > 0.0)) throw ConfigurationError("sweep options out of range");
    }
    {
        Reader o = top.child("output");
        cfg.out_dir = o.get<std::string>("dir", cfg.out_dir);
        cfg.write_json = true;
        cfg.write_csv = true;
        if (root.contains("output") && root["output"].contains("formats")) {
            const auto& f = root["output"]["formats"];
            if (!f.is_array()) throw ConfigurationError("output.formats must be an array");
            cfg.write_json = cfg.write_csv = false;
            for (const auto& v : f) {
                if (v == "json") cfg.write_json = true;
                else if (v == "csv") cfg.write_csv = true;
                else throw ConfigurationError("unknown output format " + v.dump());
            }
        }
        (void)o.get<json>("formats", json());
        o.finish();
    }
    top.finish();
    if (cfg.mode == "gap" && cfg.gap_eps.empty() && cfg.gap_resolvable_steps == 0)
        throw ConfigurationError("gap mode needs gap.eps or gap.resolvable_steps");
    if (cfg.mode == "expansion" && cfg.expansion.eps.empty()) throw ConfigurationError("expansion mode needs expansion.eps");
    cfg.canonical = root.dump();
    return cfg;
}

RunOutcome run(const RunConfig& cfg, bool quiet) {
    namespace fs = std::filesystem;
    RunOutcome outcome;
    const std::string hash = sha256_hex(cfg.canonical);
    json result;
    std::string csv_name;
    std::ostringstream csv;

    auto say = [&](const std::string& line) {
        if (!quiet) std::cout << line << '\n';
    };

    if (cfg.mode == "expansion") {
        const auto rep = expansion_check(cfg.spec, cfg.expansion);
        json rows = json::array();
        csv_name = "expansion.csv";
        csv << "eps,int_bilap,int_fN,fit_model,coeff_fit,coeff_closed,rel_dev\n";
        for (const auto& r : rep.rows) {
            rows.push_back({{"eps", r.eps}, {"int_bilap", r.int_bilap}, {"int_fN", r.int_fN},
                            {"norm_bilap", r.norm_bilap}, {"norm_fN", r.norm_fN}});
            csv << fmt(r.eps) << ',' << fmt(r.int_bilap) << ',' << fmt(r.int_fN) << ',' << rep.fit_model << ','
                << fmt(rep.coeff_bilap_fit) << ',' << fmt(rep.coeff_bilap_closed) << ',' << fmt(rep.rel_dev_bilap) << '\n';
        }
        result = {{"rows", rows},
                  {"normalization", rep.normalization},
                  {"fit_model", rep.fit_model},
                  {"S_center", rep.S},
                  {"theta", rep.theta},
                  {"coeff_bilap_fit", rep.coeff_bilap_fit},
                  {"coeff_bilap_closed", rep.coeff_bilap_closed},
                  {"rel_dev_bilap", rep.rel_dev_bilap},
                  {"coeff_fN_fit", rep.coeff_fN_fit},
                  {"coeff_fN_closed", rep.coeff_fN_closed},
                  {"rel_dev_fN", rep.rel_dev_fN},
                  {"lead_bilap", rep.lead_bilap},
                  {"lead_fN", rep.lead_fN},
                  {"lead_ratio", rep.lead_ratio},
                  {"residual_ratio", rep.residual_ratio},
                  {"log_preferred", rep.log_preferred},
                  {"flagged", rep.flagged},
                  {"note", rep.note}};
        say("bilaplacian eps^2-coefficient " + fmt(rep.coeff_bilap_fit) + " (formula " + fmt(rep.coeff_bilap_closed) + ")");
        if (rep.flagged) outcome.code = ExitCode::Numerical;
    } else if (cfg.mode == "sharp-sweep") {
        const auto grid = build_grid(cfg.spec.geom, cfg.m, cfg.grading);
        SweepOptions so;
        so.levels = cfg.sweep_levels;
        so.lambda_factor = cfg.sweep_lambda_factor;
        so.solver = cfg.solver;
        const auto points = sharp_sweep(cfg.spec, grid, so);
        json table = json::array();
        csv_name = "trace.csv";
        csv << "branch,iter,t_projection,J,phi_residual,grad_residual,step\n";
        bool all_ok = true;
        for (const auto& pt : points) {
            table.push_back({{"level", pt.level}, {"sigma", pt.sigma}, {"mu", pt.mu}, {"Lambda", pt.constants.Lambda},
                             {"lambda0", pt.constants.lambda0}, {"lambda", pt.lambda}, {"solve", both_json(pt.both, false)}});
            write_trace(csv, "L" + std::to_string(pt.level) + ":Nplus", pt.both.plus);
            write_trace(csv, "L" + std::to_string(pt.level) + ":Nminus", pt.both.minus);
            all_ok = all_ok && pt.both.converged && pt.both.ordering;
            say("level " + std::to_string(pt.level) + ": Lambda = " + fmt(pt.constants.Lambda));
        }
        const auto sc = sharp_condition(cfg.spec, 1.0, 0.0, 1.0, 0.0);
        result = {{"levels", table}, {"sharp_condition_trivial", cfg.spec.a.min_on(cfg.spec.geom.R, cfg.spec.geom.n) >= 0.0 &&
                                                                         cfg.spec.b.min_on(cfg.spec.geom.R, cfg.spec.geom.n) >= 0.0},
                  {"sharp_condition_value_unit_constants", sc.value}};
        if (!all_ok) outcome.code = ExitCode::NonConvergence;
    } else {
        const auto grid = build_grid(cfg.spec.geom, cfg.m, cfg.grading);
        const Problem base(cfg.spec, grid);
        const auto constants = estimate_constants(base);
        const double lambda = resolve_lambda(cfg, constants);
        const Problem problem = base.with_lambda(lambda);
        result["constants"] = constants_json(constants);
        result["lambda"] = lambda;

        if (cfg.mode == "constants") {
            if (cfg.spec.geom.n >= 6) {
                const auto cc = condition_C(problem);
                result["condition_C"] = {{"holds", cc.holds}, {"margin", cc.margin}};
            }
            const auto ab = constants_AB(cfg.spec.geom.n, std::max(cfg.spec.r, 1.0 + 1e-12), std::max(cfg.spec.s, 1.0 + 1e-12),
                                         constants.K0);
            result["constants_AB"] = {{"A", ab.A}, {"B", ab.B}};
            if (cfg.probes > 0) {
                const auto pr = nzero_probe(problem, cfg.probes, cfg.seed, cfg.solver.class_tol);
                result["nzero_probe"] = {{"probes", pr.probes}, {"in_band", pr.in_band}, {"infeasible", pr.infeasible},
                                         {"min_rel_second", pr.min_rel_second}};
            }
            say("lambda0 = " + fmt(constants.lambda0) + ", lambda2 = " + fmt(constants.lambda2));
        } else if (cfg.mode == "gap") {
            json rows = json::array();
            GapOptions go;
            go.delta = cfg.gap_delta;
            std::vector<double> ladder = cfg.gap_eps;
            if (ladder.empty()) {
                const double e0 = gap_resolution_limit(problem, go);
                for (int k = 0; k < cfg.gap_resolvable_steps; ++k) ladder.push_back(e0 * std::ldexp(1.0, k));
                result["gap_resolution_limit"] = e0;
            }
            for (double eps : ladder) {
                const auto g = energy_gap(problem, eps, go);
                rows.push_back({{"eps", g.eps}, {"sup_J", g.sup_J},
                                {"sup_J_extrapolated", g.sup_J_extrapolated}, {"t_max", g.t_max}, {"threshold", g.threshold},
                                {"margin", g.margin}, {"error_estimate", g.error_estimate}, {"certified", g.certified}});
                say("eps " + fmt(eps) + ": margin " + fmt(g.margin) + (g.certified ? " (certified)" : ""));
            }
            result["gap"] = rows;
            if (cfg.spec.geom.n >= 6) {
                const auto cc = condition_C(problem);
                result["condition_C"] = {{"holds", cc.holds}, {"margin", cc.margin}};
            }
        } else {  // solve
            const auto both = solve_both(problem, cfg.solver, constants.lambda_small());
            result["solve"] = both_json(both, true);
            result["rho"] = std::vector<double>(grid->nodes.data(), grid->nodes.data() + grid->size());
            csv_name = "trace.csv";
            csv << "branch,iter,t_projection,J,phi_residual,grad_residual,step\n";
            write_trace(csv, "Nplus", both.plus);
            write_trace(csv, "Nminus", both.minus);
            say("J(u+) = " + fmt(both.plus.J_value) + ", J(u-) = " + fmt(both.minus.J_value));
            if (!both.converged || !both.ordering || !both.distinct) outcome.code = ExitCode::NonConvergence;
        }
    }

    fs::create_directories(cfg.out_dir);
    if (cfg.write_json) {
        json report = {{"schema", kReportSchema},
                       {"mode", cfg.mode},
                       {"config", json::parse(cfg.canonical)},
                       {"config_hash", hash},
                       {"status", outcome.code == ExitCode::Success ? "ok" : "non-converged"},
                       {"result", result}};
        const auto path = (fs::path(cfg.out_dir) / "report.json").string();
        std::ofstream(path) << report.dump(2) << '\n';
        outcome.files.push_back(path);
    }
    if (cfg.write_csv && !csv_name.empty()) {
        const auto path = (fs::path(cfg.out_dir) / csv_name).string();
        std::ofstream(path) << "# config_hash=" << hash << '\n' << csv.str();
        outcome.files.push_back(path);
    }
    return outcome;
}

RunOutcome run_text(const std::string& text, const std::optional<std::string>& mode_override,
                    const std::optional<std::string>& out_override, bool quiet) {
    namespace fs = std::filesystem;
    RunOutcome outcome;
    std::string out_dir = resolve_out_dir(out_override, "nehari_out");
    std::string kind;
    try {
        RunConfig cfg = parse_config(text, mode_override);
        cfg.out_dir = resolve_out_dir(out_override, cfg.out_dir);
        out_dir = cfg.out_dir;
        return run(cfg, quiet);
    } catch (const ConfigurationError& e) {
        outcome = {ExitCode::Validation, e.what(), {}};
        kind = "validation";
    } catch (const DomainError& e) {
        outcome = {ExitCode::Validation, e.what(), {}};
        kind = "validation";
    } catch (const std::exception& e) {
        outcome = {ExitCode::Numerical, e.what(), {}};
        kind = "numerical";
    }
    const json record = {{"schema", kReportSchema}, {"status", "error"},
                         {"error", {{"kind", kind}, {"exit_code", int(outcome.code)}, {"message", outcome.message}}}};
    std::cerr << record.dump() << '\n';
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) {
        const auto path = (fs::path(out_dir) / "report.json").string();
        std::ofstream os(path);
        if (os) {
            os << record.dump(2) << '\n';
            outcome.files.push_back(path);
        }
    }
    return outcome;
}

}  // namespace nehari
