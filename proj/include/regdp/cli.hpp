#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "regdp/io.hpp"
#include "regdp/solvers.hpp"

namespace regdp {

/// Every knob of a CLI run; serialized into each report it produces.
struct ExperimentConfig {
    std::string algo = "vi";
    double tol = kDefaultTol;
    std::size_t max_iter = 100000;
    std::string tie = "keep";
    std::string eval = "iterative";
    std::vector<std::size_t> m_schedule{5};
    std::vector<double> deltas = PerturbationSchedule::standard().deltas;
    double box_lo = LpBox{}.lo;
    double box_hi = LpBox{}.hi;
    std::vector<double> beta;
    std::string region = "all-real";
    std::uint64_t seed = 0;
    std::size_t n_probes = 16;
    std::string start = "terminal";
    std::string policy;
    double grid_lo = -5.0;
    double grid_hi = 5.0;
    double grid_step = 0.5;

    json to_json() const;
    static ExperimentConfig from_json(const json& j);
};

/**
 * Exit codes:
 *   0  Converged (and success for the non-solve verbs)
 *   1  usage, parse, or model-file error
 *   2  Stalled
 *   3  Oscillating
 *   4  Diverged
 *   5  IterationLimit
 *   6  solver or analysis error
 */
int exit_code(Outcome o);

/// Runs one CLI invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regdp
