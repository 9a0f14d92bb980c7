#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "regdp/model.hpp"
#include "regdp/regularity.hpp"
#include "regdp/solvers.hpp"

namespace regdp {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Numbers, with "+inf" / "-inf" for the infinite entries.
json to_json(const CostFunction& J);
CostFunction cost_function_from_json(const json& j);
json to_json(const StationaryPolicy& mu);

/// A named builder invocation, e.g. detsp with a = 0, b = 3.
struct BuilderSpec {
    std::string name;
    std::map<std::string, double> params;
};

/// Builders: detsp (a, b), grid (n, left, right, stay, reward), random-ssp
/// (n, controls, cost_lo, cost_hi, bias, seed), nonneg (n, controls, seed),
/// discounted (n, controls, alpha, seed). Unknown names or parameters throw.
FiniteModel build_from_spec(const BuilderSpec& spec);

/**
 * Model file, schema version 1:
 *
 *   { "schema_version": 1, "discount": 1.0,
 *     "states": [{"id": 0, "label": "1"}, ...],
 *     "stop_set": [1], "terminal": [0, 0],
 *     "controls": [[{"label": "self", "cost": 0,
 *                    "transitions": [{"prob": 1, "next": 0, "cost": 0}]}, ...], ...] }
 *
 * Per-transition costs are optional and folded into the stage cost. A
 * document may instead carry {"builder": {"name": ..., "params": {...}}}.
 */
json model_to_json(const FiniteModel& model);
FiniteModel model_from_json(const json& doc);

FiniteModel load_model(const std::string& path);
std::string read_file(const std::string& path);

/// Writes through a temporary file in the same directory and renames it over
/// the destination.
void write_file_atomic(const std::string& path, const std::string& content);

/// FNV-1a 64-bit, as 16 lowercase hex digits.
std::string content_hash(const std::string& bytes);

/// Columns: iteration, J_0 .. J_{n-1}, residual.
std::string trace_csv(const SolveTrace& trace);
json trace_summary(const SolveTrace& trace);

json to_json(const RegularityReport& report);
json to_json(const WeakPiResult& weak);
json to_json(const StrongPiReport& strong);

}  // namespace regdp
