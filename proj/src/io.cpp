#include "regdp/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "regdp/models.hpp"

namespace regdp {

json to_json(const CostFunction& J) {
    json arr = json::array();
    for (ExtReal v : J) {
        if (v.is_finite())
            arr.push_back(v.value());
        else
            arr.push_back(v.is_pos_inf() ? "+inf" : "-inf");
    }
    return arr;
}

CostFunction cost_function_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("cost function must be a JSON array");
    CostFunction J(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_number())
            J[i] = j[i].get<double>();
        else if (j[i].is_string())
            J[i] = parse_ext_real(j[i].get<std::string>());
        else
            throw std::invalid_argument("cost function entry " + std::to_string(i) + " is not a number");
    }
    return J;
}

json to_json(const StationaryPolicy& mu) { return json(mu.choice); }

// --- builders ---------------------------------------------------------------

namespace {

class ParamReader {
public:
    explicit ParamReader(const BuilderSpec& spec) : spec_(spec) {}

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        const auto it = spec_.params.find(key);
        return it == spec_.params.end() ? fallback : it->second;
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        const double v = real(key, static_cast<double>(fallback));
        if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15)
            throw std::invalid_argument("builder parameter '" + key + "' must be a nonnegative integer");
        return static_cast<std::uint64_t>(v);
    }

    bool has(const std::string& key) const { return spec_.params.count(key) > 0; }

    void finish() const {
        for (const auto& [key, value] : spec_.params)
            if (!used_.count(key))
                throw std::invalid_argument("unknown parameter '" + key + "' for builder '" + spec_.name + "'");
    }

private:
    const BuilderSpec& spec_;
    std::set<std::string> used_;
};

}  // namespace

FiniteModel build_from_spec(const BuilderSpec& spec) {
    ParamReader p(spec);
    if (spec.name == "detsp") {
        DetSpParams d{p.real("a", 0.0), p.real("b", 0.0)};
        p.finish();
        return build_detsp(d);
    }
    if (spec.name == "grid") {
        GridControlParams g;
        g.n = p.count("n", g.n);
        g.left_cost = p.real("left", g.left_cost);
        g.right_cost = p.real("right", g.right_cost);
        g.stay_cost = p.real("stay", g.stay_cost);
        if (p.has("reward")) g.overrides.push_back({1, GridMove::Left, p.real("reward", 0.0)});
        p.finish();
        return build_grid_control(g);
    }
    if (spec.name == "random-ssp") {
        RandomSspParams r;
        r.n_states = p.count("n", r.n_states);
        r.n_controls = p.count("controls", r.n_controls);
        r.cost_lo = p.real("cost_lo", r.cost_lo);
        r.cost_hi = p.real("cost_hi", r.cost_hi);
        r.proper_bias = p.real("bias", r.proper_bias);
        r.seed = p.count("seed", r.seed);
        p.finish();
        return build_random_ssp(r);
    }
    if (spec.name == "nonneg") {
        const auto n = p.count("n", 4), k = p.count("controls", 2), seed = p.count("seed", 0);
        p.finish();
        return build_nonneg_mdp(n, k, seed);
    }
    if (spec.name == "discounted") {
        const auto n = p.count("n", 4), k = p.count("controls", 2);
        const double alpha = p.real("alpha", 0.9);
        const auto seed = p.count("seed", 0);
        p.finish();
        return build_discounted(n, k, alpha, seed);
    }
    throw std::invalid_argument("unknown builder '" + spec.name + "'");
}

// --- model documents --------------------------------------------------------

json model_to_json(const FiniteModel& model) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["discount"] = model.discount();
    json states = json::array();
    for (StateId x = 0; x < model.n_states(); ++x) states.push_back({{"id", x}, {"label", model.state_label(x)}});
    doc["states"] = std::move(states);
    doc["stop_set"] = model.stop_set();
    doc["terminal"] = to_json(model.terminal());
    json controls = json::array();
    for (StateId x = 0; x < model.n_states(); ++x) {
        json at_x = json::array();
        for (const Control& c : model.controls(x)) {
            json transitions = json::array();
            for (const Transition& t : c.transitions) transitions.push_back({{"prob", t.prob}, {"next", t.next}});
            at_x.push_back({{"label", c.label}, {"cost", c.cost}, {"transitions", std::move(transitions)}});
        }
        controls.push_back(std::move(at_x));
    }
    doc["controls"] = std::move(controls);
    return doc;
}

namespace {

Control parse_control(const json& jc, StateId x, ControlId u) {
    try {
        Control c;
        c.label = jc.value("label", "u" + std::to_string(u));
        c.cost = jc.at("cost").get<double>();
        const json& ts = jc.at("transitions");
        if (!ts.is_array()) throw ModelError("transitions must be an array", x, u);
        for (const json& jt : ts) {
            Transition t{jt.at("prob").get<double>(), jt.at("next").get<StateId>()};
            if (jt.contains("cost")) c.cost += t.prob * jt.at("cost").get<double>();
            c.transitions.push_back(t);
        }
        return c;
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed control: ") + e.what(), x, u);
    }
}

}  // namespace

FiniteModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");
    if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion)
        throw ModelError("unsupported schema_version " + doc.at("schema_version").dump());
    if (doc.contains("builder")) {
        const json& b = doc.at("builder");
        BuilderSpec spec;
        try {
            spec.name = b.at("name").get<std::string>();
            if (b.contains("params"))
                for (const auto& [k, v] : b.at("params").items()) spec.params[k] = v.get<double>();
        } catch (const json::exception& e) {
            throw ModelError(std::string("malformed builder block: ") + e.what());
        }
        return build_from_spec(spec);
    }
    try {
        const json& jcontrols = doc.at("controls");
        if (!jcontrols.is_array()) throw ModelError("controls must be an array of per-state lists");
        const std::size_t n = jcontrols.size();
        std::vector<std::string> labels;
        if (doc.contains("states")) {
            const json& states = doc.at("states");
            if (states.size() != n) throw ModelError("states and controls disagree on the state count");
            labels.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = states[i].at("id").get<StateId>();
                if (id != i) throw ModelError("state ids must be 0..n-1 in order", i);
                labels[i] = states[i].value("label", std::to_string(i));
            }
        }
        std::vector<std::vector<Control>> controls(n);
        for (StateId x = 0; x < n; ++x) {
            if (!jcontrols[x].is_array()) throw ModelError("control list must be an array", x);
            for (ControlId u = 0; u < jcontrols[x].size(); ++u) controls[x].push_back(parse_control(jcontrols[x][u], x, u));
        }
        const double discount = doc.value("discount", 1.0);
        CostFunction terminal = doc.contains("terminal") ? cost_function_from_json(doc.at("terminal")) : CostFunction(n, 0.0);
        std::vector<StateId> stop = doc.value("stop_set", std::vector<StateId>{});
        return FiniteModel(std::move(controls), discount, std::move(terminal), std::move(stop), std::move(labels));
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed model document: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

FiniteModel load_model(const std::string& path) {
    const std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError("'" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename into '" + path + "': " + ec.message());
    }
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- traces and reports -----------------------------------------------------

std::string trace_csv(const SolveTrace& trace) {
    std::ostringstream s;
    const std::size_t n = trace.iterates.empty() ? trace.final_value.size() : trace.iterates.front().size();
    s << "iteration";
    for (std::size_t x = 0; x < n; ++x) s << ",J_" << x;
    s << ",residual\n";
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
        s << trace.iterate_index[i];
        for (ExtReal v : trace.iterates[i]) s << ',' << to_string(v);
        s << ',' << to_string(trace.residuals[i]) << '\n';
    }
    return s.str();
}

json trace_summary(const SolveTrace& trace) {
    json j;
    j["outcome"] = to_string(trace.outcome);
    j["iterations"] = trace.iterations;
    j["final_value"] = to_json(trace.final_value);
    json cycle = json::array();
    for (const auto& mu : trace.cycle) cycle.push_back(to_json(mu));
    j["cycle"] = std::move(cycle);
    j["diverged_states"] = trace.diverged_states;
    if (!trace.policies.empty()) j["final_policy"] = to_json(trace.policies.back());
    if (!trace.residuals.empty()) j["final_residual"] = to_string(trace.residuals.back());
    if (!trace.note.empty()) j["note"] = trace.note;
    return j;
}

json to_json(const RegularityReport& report) {
    json j;
    j["region"] = to_string(report.region);
    j["J_star"] = to_json(report.J_star);
    j["J_star_S"] = to_json(report.J_star_S);
    j["X_s"] = report.zero_set;
    j["X_inf"] = report.infinite_set;
    j["all_costs_certified"] = report.all_costs_certified;
    j["infinity_conflicts"] = report.infinity_conflicts;
    json policies = json::array();
    for (const PolicyRecord& rec : report.policies) {
        const PolicyEvaluation& ev = rec.certification.cost;
        json status = json::array();
        for (LimitStatus s : ev.status) status.push_back(to_string(s));
        json p;
        p["policy"] = to_json(rec.policy);
        p["proper"] = ev.proper ? json(*ev.proper) : json(nullptr);
        p["s_regular"] = to_string(rec.certification.verdict);
        p["reason"] = rec.certification.reason;
        p["J_mu"] = to_json(ev.value);
        p["status"] = std::move(status);
        p["exact"] = ev.exact;
        policies.push_back(std::move(p));
    }
    j["policies"] = std::move(policies);
    return j;
}

json to_json(const WeakPiResult& weak) {
    json witness = json::array();
    for (const auto& mu : weak.witness) witness.push_back(to_json(mu));
    return {{"holds", weak.holds}, {"witness", std::move(witness)}};
}

json to_json(const StrongPiReport& strong) {
    return {{"finite_values", strong.finite_values},       {"regular_exists", strong.regular_exists},
            {"minima_attained", strong.minima_attained},   {"irregular_diverge", strong.irregular_diverge},
            {"holds", strong.holds()},                     {"failures", strong.failures}};
}

}  // namespace regdp
