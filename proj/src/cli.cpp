#include "regdp/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "regdp/models.hpp"
#include "regdp/regularity.hpp"

namespace regdp {

json ExperimentConfig::to_json() const {
    return {{"algo", algo},         {"tol", tol},           {"max_iter", max_iter},   {"tie", tie},
            {"eval", eval},         {"m_schedule", m_schedule}, {"deltas", deltas},   {"box_lo", box_lo},
            {"box_hi", box_hi},     {"beta", beta},         {"region", region},       {"seed", seed},
            {"n_probes", n_probes}, {"start", start},       {"policy", policy},       {"grid_lo", grid_lo},
            {"grid_hi", grid_hi},   {"grid_step", grid_step}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "algo") c.algo = value.get<std::string>();
        else if (key == "tol") c.tol = value.get<double>();
        else if (key == "max_iter") c.max_iter = value.get<std::size_t>();
        else if (key == "tie") c.tie = value.get<std::string>();
        else if (key == "eval") c.eval = value.get<std::string>();
        else if (key == "m_schedule") c.m_schedule = value.get<std::vector<std::size_t>>();
        else if (key == "deltas") c.deltas = value.get<std::vector<double>>();
        else if (key == "box_lo") c.box_lo = value.get<double>();
        else if (key == "box_hi") c.box_hi = value.get<double>();
        else if (key == "beta") c.beta = value.get<std::vector<double>>();
        else if (key == "region") c.region = value.get<std::string>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "n_probes") c.n_probes = value.get<std::size_t>();
        else if (key == "start") c.start = value.get<std::string>();
        else if (key == "policy") c.policy = value.get<std::string>();
        else if (key == "grid_lo") c.grid_lo = value.get<double>();
        else if (key == "grid_hi") c.grid_hi = value.get<double>();
        else if (key == "grid_step") c.grid_step = value.get<double>();
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
    return c;
}

int exit_code(Outcome o) {
    switch (o) {
        case Outcome::Converged: return 0;
        case Outcome::Stalled: return 2;
        case Outcome::Oscillating: return 3;
        case Outcome::Diverged: return 4;
        case Outcome::IterationLimit: return 5;
    }
    return 6;
}

namespace {

constexpr int kUsageError = 1;
constexpr int kSolverError = 6;

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("'" + text + "' is not a number");
    }
}

struct ModelSource {
    std::string model_path;
    std::string builder;
    std::vector<std::string> params;
};

struct LoadedModel {
    FiniteModel model;
    std::string hash;
};

BuilderSpec builder_spec(const ModelSource& src) {
    BuilderSpec spec;
    spec.name = src.builder;
    for (const std::string& kv : src.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
        spec.params[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1));
    }
    return spec;
}

LoadedModel load(const ModelSource& src) {
    if (!src.model_path.empty() && !src.builder.empty())
        throw UsageError("give either --model or --builder, not both");
    if (!src.model_path.empty()) {
        FiniteModel m = load_model(src.model_path);
        return {std::move(m), content_hash(read_file(src.model_path))};
    }
    if (src.builder.empty()) throw UsageError("a model is required: --model FILE or --builder NAME");
    FiniteModel m = build_from_spec(builder_spec(src));
    return {m, content_hash(model_to_json(m).dump())};
}

CostFunction parse_start(const std::string& text, const FiniteModel& model) {
    const std::size_t n = model.n_states();
    if (text == "terminal") return model.terminal();
    const auto parts = split(text, ',');
    if (parts.size() == 1) {
        CostFunction J(n, 0.0);
        const ExtReal v = parse_ext_real(parts[0]);
        for (StateId x = 0; x < n; ++x)
            if (!(model.has_stop_set() && model.is_stop(x))) J[x] = v;
        return J;
    }
    if (parts.size() != n) throw UsageError("--start needs 1 or " + std::to_string(n) + " values");
    CostFunction J(n);
    for (StateId x = 0; x < n; ++x) J[x] = parse_ext_real(parts[x]);
    return J;
}

StationaryPolicy parse_policy(const std::string& text, const FiniteModel& model) {
    StationaryPolicy mu;
    for (const std::string& p : split(text, ',')) {
        const double v = parse_double(p);
        if (v < 0 || v != std::floor(v)) throw UsageError("policy entries must be control ids");
        mu.choice.push_back(static_cast<ControlId>(v));
    }
    check_policy(model, mu);
    return mu;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty())
        out << content;
    else
        write_file_atomic(path, content);
}

json envelope(const ExperimentConfig& cfg, const LoadedModel& lm, const std::string& verb) {
    return {{"verb", verb}, {"config", cfg.to_json()}, {"model_hash", lm.hash}};
}

SRegion region_for(const FiniteModel& model, const ExperimentConfig& cfg) {
    RegionOptions ro;
    ro.n_probes = cfg.n_probes;
    ro.seed = cfg.seed;
    return make_region(model, parse_region_kind(cfg.region), ro);
}

StationaryPolicy initial_policy(const FiniteModel& model, const ExperimentConfig& cfg) {
    if (!cfg.policy.empty()) return parse_policy(cfg.policy, model);
    return attractor_proper_policy(model).value_or(first_control_policy(model));
}

struct SolveOutput {
    json summary;
    std::string csv;
    int code = 0;
};

SolveOutput solve(const FiniteModel& model, const ExperimentConfig& cfg) {
    SolveOutput o;
    const TieBreakRule rule = parse_tie_break(cfg.tie);
    if (cfg.algo == "vi" || cfg.algo == "pi" || cfg.algo == "opi") {
        SolveTrace tr;
        if (cfg.algo == "vi") {
            ViOptions vo;
            vo.tol = cfg.tol;
            vo.max_iter = cfg.max_iter;
            tr = value_iteration(model, parse_start(cfg.start, model), vo);
        } else if (cfg.algo == "pi") {
            PiOptions po;
            po.rule = rule;
            po.eval = parse_eval_mode(cfg.eval);
            po.max_iter = cfg.max_iter;
            tr = policy_iteration(model, initial_policy(model, cfg), po);
        } else {
            OptimisticPiOptions oo;
            oo.m_schedule = cfg.m_schedule;
            oo.tol = cfg.tol;
            oo.max_iter = cfg.max_iter;
            oo.rule = rule;
            tr = optimistic_pi(model, parse_start(cfg.start, model), oo);
        }
        o.summary = trace_summary(tr);
        o.csv = trace_csv(tr);
        o.code = exit_code(tr.outcome);
        return o;
    }
    if (cfg.algo == "lp") {
        const LpResult r = lp_solve(model, cfg.beta, LpBox{cfg.box_lo, cfg.box_hi});
        o.summary = {{"outcome", to_string(Outcome::Converged)}, {"final_value", to_json(r.J)},
                     {"objective", r.objective},                {"pivots", r.pivots},
                     {"box_active_lower", r.at_lower},          {"box_active_upper", r.at_upper}};
        return o;
    }
    if (cfg.algo == "perturb") {
        PerturbationOptions po;
        po.schedule.deltas = cfg.deltas;
        po.inner_tol = cfg.tol;
        po.max_iter = cfg.max_iter;
        const PerturbationResult r = perturbation_solve(model, po);
        json curve = json::array();
        std::ostringstream csv;
        csv << "delta";
        for (StateId x = 0; x < model.n_states(); ++x) csv << ",J_" << x;
        csv << '\n';
        for (std::size_t i = 0; i < r.deltas.size(); ++i) {
            curve.push_back({{"delta", r.deltas[i]}, {"value", to_json(r.values[i])}, {"policy", to_json(r.policies[i])}});
            csv << to_string(ExtReal(r.deltas[i]));
            for (ExtReal v : r.values[i]) csv << ',' << to_string(v);
            csv << '\n';
        }
        o.summary = {{"outcome", to_string(Outcome::Converged)}, {"final_value", to_json(r.limit)},
                     {"extrapolated", r.extrapolated},          {"affine_tail", r.converged},
                     {"curve", std::move(curve)}};
        o.csv = csv.str();
        return o;
    }
    throw UsageError("unknown --algo '" + cfg.algo + "' (vi, pi, opi, lp, perturb)");
}

std::vector<std::vector<double>> scan_axes(const FiniteModel& model, const ExperimentConfig& cfg) {
    if (!(cfg.grid_step > 0.0) || !(cfg.grid_lo <= cfg.grid_hi))
        throw UsageError("grid needs --grid-lo <= --grid-hi and a positive --grid-step");
    std::vector<double> axis;
    const auto steps = static_cast<std::size_t>(std::floor((cfg.grid_hi - cfg.grid_lo) / cfg.grid_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) axis.push_back(cfg.grid_lo + static_cast<double>(i) * cfg.grid_step);
    std::vector<std::vector<double>> grid(model.n_states(), axis);
    for (StateId x = 0; x < model.n_states(); ++x)
        if (model.has_stop_set() && model.is_stop(x)) grid[x] = {0.0};
    return grid;
}

json classify(const FiniteModel& model, const ExperimentConfig& cfg) {
    const SRegion region = region_for(model, cfg);
    AnalysisOptions ao;
    ao.tol = cfg.tol;
    const RegularityReport rep = brute_force_optima(model, region, ao);
    const WellBehavedRegion wb{rep.J_star_S, region};
    return {{"report", to_json(rep)},
            {"weak_pi", to_json(check_weak_pi_property(model, region, std::nullopt, ao))},
            {"strong_pi", to_json(check_strong_pi_conditions(model, region, 1e12, ao))},
            {"well_behaved_region", {{"lower", to_json(wb.lower)}, {"upper", wb.upper_description()}}}};
}

std::string policy_table_csv(const RegularityReport& rep) {
    std::ostringstream s;
    const std::size_t n = rep.J_star.size();
    s << "policy,proper,s_regular";
    for (std::size_t x = 0; x < n; ++x) s << ",J_" << x;
    s << '\n';
    for (const PolicyRecord& rec : rep.policies) {
        const auto& proper = rec.certification.cost.proper;
        std::string pol = to_string(rec.policy);
        for (char& c : pol)
            if (c == ',') c = ' ';
        s << pol << ',' << (proper ? (*proper ? "true" : "false") : "") << ','
          << to_string(rec.certification.verdict);
        for (ExtReal v : rec.certification.cost.value) s << ',' << to_string(v);
        s << '\n';
    }
    return s.str();
}

// Runs every solver next to the oracle and reports each deviation from J*_S.
json report_bundle(const FiniteModel& model, const ExperimentConfig& cfg) {
    const SRegion region = region_for(model, cfg);
    AnalysisOptions ao;
    ao.tol = cfg.tol;
    const RegularityReport rep = brute_force_optima(model, region, ao);
    json runs = json::object();
    for (const std::string algo : {"vi", "pi", "lp", "perturb"}) {
        ExperimentConfig c = cfg;
        c.algo = algo;
        try {
            SolveOutput o = solve(model, c);
            const CostFunction J = cost_function_from_json(o.summary.at("final_value"));
            ExtReal dev = sup_distance(J, rep.J_star_S);
            runs[algo] = {{"outcome", o.summary.at("outcome")},
                          {"final_value", o.summary.at("final_value")},
                          {"deviation_from_J_star_S", to_string(dev)}};
        } catch (const std::exception& e) {
            runs[algo] = {{"error", e.what()}};
        }
    }
    return {{"J_star", to_json(rep.J_star)}, {"J_star_S", to_json(rep.J_star_S)}, {"runs", std::move(runs)}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    // The config file supplies defaults that explicit flags then override.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        try {
            cfg = ExperimentConfig::from_json(json::parse(read_file(args[i + 1])));
        } catch (const std::exception& e) {
            err << "error: cannot load config: " << e.what() << '\n';
            return kUsageError;
        }
    }

    CLI::App app{"Abstract dynamic programming solvers and regularity analysis", "regdp"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file of experiment settings (flags take precedence)");

    ModelSource src;
    std::string out_json, out_csv, out_path, builder_positional;
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", src.model_path, "model file (JSON, schema_version 1)");
        sub->add_option("--builder", src.builder, "builder name: detsp, grid, random-ssp, nonneg, discounted");
        sub->add_option("--param", src.params, "builder parameter key=value (repeatable)");
    };

    CLI::App* gen = app.add_subcommand("generate", "write a model file from a builder");
    gen->add_option("name", builder_positional, "builder name");
    gen->add_option("--builder", src.builder, "builder name");
    gen->add_option("--param", src.params, "builder parameter key=value (repeatable)");
    auto* gen_seed = gen->add_option("--seed", cfg.seed, "seed for the random builders");
    gen->add_option("--out", out_path, "output file (default: standard output)");

    CLI::App* solve_cmd = app.add_subcommand("solve", "run a solver and write its trace");
    add_model(solve_cmd);
    solve_cmd->add_option("--algo", cfg.algo, "vi, pi, opi, lp, or perturb");
    solve_cmd->add_option("--start", cfg.start, "J0: 'terminal', one value, or a comma list");
    solve_cmd->add_option("--tol", cfg.tol, "convergence tolerance");
    solve_cmd->add_option("--max-iter", cfg.max_iter, "iteration cap");
    solve_cmd->add_option("--tie", cfg.tie, "tie-break rule: keep, lowest, always-switch");
    solve_cmd->add_option("--eval", cfg.eval, "PI evaluation: iterative or exact");
    solve_cmd->add_option("--policy", cfg.policy, "initial PI policy as comma-separated control ids");
    solve_cmd->add_option("--m", cfg.m_schedule, "optimistic PI m_k schedule (last entry repeats)")->delimiter(',');
    solve_cmd->add_option("--deltas", cfg.deltas, "perturbation schedule")->delimiter(',');
    solve_cmd->add_option("--box-lo", cfg.box_lo, "LP lower box bound");
    solve_cmd->add_option("--box-hi", cfg.box_hi, "LP upper box bound");
    solve_cmd->add_option("--beta", cfg.beta, "LP objective weights")->delimiter(',');
    solve_cmd->add_option("--out-json", out_json, "summary file (default: standard output)");
    solve_cmd->add_option("--out-csv", out_csv, "trace CSV file");

    CLI::App* classify_cmd = app.add_subcommand("classify", "classify policies and check the PI properties");
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force optima and the per-policy table");
    CLI::App* report_cmd = app.add_subcommand("report", "run every solver against the oracle");
    for (CLI::App* sub : {classify_cmd, oracle_cmd, report_cmd}) {
        add_model(sub);
        sub->add_option("--region", cfg.region,
                        "S: all-real, nonneg-extended, bounded-below, zero-on-stop-set, expectation-vanishing");
        sub->add_option("--seed", cfg.seed, "probe sampler seed");
        sub->add_option("--probes", cfg.n_probes, "number of probes");
        sub->add_option("--tol", cfg.tol, "tolerance");
        sub->add_option("--out-json", out_json, "report file (default: standard output)");
    }
    oracle_cmd->add_option("--out-csv", out_csv, "per-policy table CSV");
    report_cmd->add_option("--tie", cfg.tie, "tie-break rule for PI");
    report_cmd->add_option("--box-lo", cfg.box_lo, "LP lower box bound");
    report_cmd->add_option("--box-hi", cfg.box_hi, "LP upper box bound");

    CLI::App* scan_cmd = app.add_subcommand("scan", "grid scan for fixed points of T");
    add_model(scan_cmd);
    scan_cmd->add_option("--grid-lo", cfg.grid_lo, "lowest grid value");
    scan_cmd->add_option("--grid-hi", cfg.grid_hi, "highest grid value");
    scan_cmd->add_option("--grid-step", cfg.grid_step, "grid spacing");
    scan_cmd->add_option("--tol", cfg.tol, "fixed-point tolerance on sup |TJ - J|");
    scan_cmd->add_option("--out-csv", out_csv, "CSV file (default: standard output)");

    std::vector<std::string> argv_store{"regdp"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (gen->parsed()) {
            if (!builder_positional.empty()) {
                if (!src.builder.empty() && src.builder != builder_positional)
                    throw UsageError("conflicting builder names");
                src.builder = builder_positional;
            }
            BuilderSpec spec = builder_spec(src);
            if (spec.name.empty()) throw UsageError("generate needs a builder name");
            const bool seeded = spec.name == "random-ssp" || spec.name == "nonneg" || spec.name == "discounted";
            if (seeded && !spec.params.count("seed") && (gen_seed->count() > 0 || cfg.seed != 0))
                spec.params["seed"] = static_cast<double>(cfg.seed);
            emit(out_path, model_to_json(build_from_spec(spec)).dump(2) + "\n", out);
            return 0;
        }

        const LoadedModel lm = load(src);
        if (solve_cmd->parsed()) {
            SolveOutput o = solve(lm.model, cfg);
            json doc = envelope(cfg, lm, "solve");
            doc["summary"] = std::move(o.summary);
            if (!out_csv.empty()) write_file_atomic(out_csv, o.csv);
            emit(out_json, doc.dump(2) + "\n", out);
            return o.code;
        }
        if (classify_cmd->parsed()) {
            json doc = envelope(cfg, lm, "classify");
            doc.update(classify(lm.model, cfg));
            emit(out_json, doc.dump(2) + "\n", out);
            return 0;
        }
        if (oracle_cmd->parsed()) {
            AnalysisOptions ao;
            ao.tol = cfg.tol;
            const RegularityReport rep = brute_force_optima(lm.model, region_for(lm.model, cfg), ao);
            json doc = envelope(cfg, lm, "oracle");
            doc["oracle"] = to_json(rep);
            if (!out_csv.empty()) write_file_atomic(out_csv, policy_table_csv(rep));
            emit(out_json, doc.dump(2) + "\n", out);
            return 0;
        }
        if (report_cmd->parsed()) {
            json doc = envelope(cfg, lm, "report");
            doc.update(report_bundle(lm.model, cfg));
            emit(out_json, doc.dump(2) + "\n", out);
            return 0;
        }
        if (scan_cmd->parsed()) {
            const auto points = scan_grid(lm.model, scan_axes(lm.model, cfg));
            std::ostringstream csv;
            for (StateId x = 0; x < lm.model.n_states(); ++x) csv << "J_" << x << ',';
            csv << "residual,fixed\n";
            std::size_t fixed = 0;
            for (const ScanPoint& p : points) {
                for (ExtReal v : p.J) csv << to_string(v) << ',';
                const bool is_fixed = p.residual <= ExtReal(cfg.tol);
                fixed += is_fixed;
                csv << to_string(p.residual) << ',' << (is_fixed ? 1 : 0) << '\n';
            }
            emit(out_csv, csv.str(), out);
            err << fixed << " of " << points.size() << " grid points are fixed points (model " << lm.hash << ")\n";
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolverError;
    }
    return kUsageError;
}

}  // namespace regdp
