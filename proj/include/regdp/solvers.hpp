#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regdp/lp.hpp"
#include "regdp/model.hpp"
#include "regdp/oracle.hpp"
#include "regdp/regularity.hpp"

namespace regdp {

enum class Outcome {
    Converged,      ///< final residual <= tol
    Stalled,        ///< the start was already a fixed point, other than the target
    Oscillating,    ///< a cycle of iterates or policies was detected
    Diverged,       ///< certified drift to +-inf at some states
    IterationLimit  ///< max_iter reached without any of the above
};

std::string to_string(Outcome o);

struct SolveTrace {
    std::vector<CostFunction> iterates;       ///< recorded J_k (every record_every-th plus the last)
    std::vector<std::size_t> iterate_index;   ///< k of each recorded iterate
    std::vector<ExtReal> residuals;           ///< sup |T J_k - J_k| of each recorded iterate
    std::vector<StationaryPolicy> policies;   ///< mu^k for the PI variants
    Outcome outcome = Outcome::IterationLimit;
    CostFunction final_value;
    std::vector<StationaryPolicy> cycle;      ///< PI oscillation, in visiting order
    std::vector<StateId> diverged_states;
    std::size_t iterations = 0;               ///< T (or evaluate + improve) applications
    std::string note;
};

// --- value iteration --------------------------------------------------------

struct ViOptions {
    double tol = kDefaultTol;
    std::size_t max_iter = 100000;
    std::size_t record_every = 1;
    std::size_t window = 32;
    double blowup_bound = 1e12;
    /// When set, a start that is already a fixed point is Converged if it
    /// equals the target and Stalled otherwise. Without a target it is Stalled.
    std::optional<CostFunction> target;
};

SolveTrace value_iteration(const FiniteModel& model, const CostFunction& J0, const ViOptions& opts = {});

struct ViRegionReport {
    CostFunction J_star_S;
    bool fixed_point_hypothesis = false;  ///< T J*_S = J*_S
    std::vector<CostFunction> inside_starts;
    std::vector<SolveTrace> inside_runs;
    std::size_t inside_failures = 0;      ///< inside runs not converging to J*_S
    std::vector<CostFunction> outside_starts;
    std::vector<SolveTrace> outside_runs;
    std::size_t upper_bound_violations = 0;  ///< outside limits exceeding J*_S + 1e-9
};

/**
 * Seeded VI starts inside W_S (J*_S + U[0,10] per state) and below J*_S
 * (J*_S - U(0,10] per state). Inside runs are checked against J*_S within
 * 1e-7; outside runs are only recorded, with the J <= J*_S + 1e-9 bound.
 */
ViRegionReport vi_region_check(const FiniteModel& model, const SRegion& region, std::size_t samples,
                               std::uint64_t seed, const ViOptions& vi = {}, const AnalysisOptions& analysis = {});

// --- policy iteration -------------------------------------------------------

enum class EvalMode { ExactLinearSolve, IterativeWithCap };

std::string to_string(EvalMode m);
std::string to_string(TieBreakRule r);
TieBreakRule parse_tie_break(const std::string& text);
EvalMode parse_eval_mode(const std::string& text);

struct PiOptions {
    TieBreakRule rule = TieBreakRule::KeepCurrentIfTied;
    EvalMode eval = EvalMode::IterativeWithCap;
    std::size_t max_iter = 100000;
    double tie_tol = kDefaultTol;
    LimsupOptions limsup;
};

/// Records J_{mu^k} as the iterates. Under ExactLinearSolve an improper
/// policy makes the evaluation throw SingularSystemError.
SolveTrace policy_iteration(const FiniteModel& model, const StationaryPolicy& mu0, const PiOptions& opts = {});

// --- optimistic policy iteration --------------------------------------------

struct OptimisticPiOptions {
    std::vector<std::size_t> m_schedule{5};  ///< m_k; the last entry repeats
    double tol = kDefaultTol;
    std::size_t max_iter = 100000;
    /// Keep iterating to at least this many steps after convergence, so a
    /// constant trace is visible.
    std::size_t min_iter = 0;
    TieBreakRule rule = TieBreakRule::KeepCurrentIfTied;
    double tie_tol = kDefaultTol;
    std::size_t record_every = 1;
};

/// Throws std::invalid_argument unless J0 >= T J0 (within tol).
SolveTrace optimistic_pi(const FiniteModel& model, const CostFunction& J0, const OptimisticPiOptions& opts = {});

// --- perturbation -----------------------------------------------------------

struct PerturbationSchedule {
    std::vector<double> deltas;

    /// 1, 1/2, ..., 2^-20.
    static PerturbationSchedule standard();
    /// Throws unless every entry is positive and the sequence strictly decreases.
    void validate() const;
};

struct PerturbationOptions {
    PerturbationSchedule schedule = PerturbationSchedule::standard();
    double inner_tol = kDefaultTol;
    std::size_t max_iter = 100000;
};

struct PerturbationResult {
    std::vector<double> deltas;
    std::vector<CostFunction> values;       ///< J*_delta per delta
    std::vector<StationaryPolicy> policies; ///< optimal policy per delta
    CostFunction limit;                     ///< estimate of J*_S
    bool extrapolated = false;              ///< limit is the affine extrapolation to delta = 0
    bool converged = true;                  ///< false when the curve is not affine at the tail
};

/// Solves each delta-perturbed model by PI and extrapolates to delta = 0.
PerturbationResult perturbation_solve(const FiniteModel& model, const PerturbationOptions& opts = {});

// --- linear programming -----------------------------------------------------

struct LpBox {
    double lo = -1e4;
    double hi = 1e4;
};

struct LpResult {
    CostFunction J;
    double objective = 0.0;
    std::vector<StateId> at_lower;  ///< states where the box bound is active
    std::vector<StateId> at_upper;
    std::size_t pivots = 0;
};

class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// maximize sum beta_i J(i) s.t. J(i) <= H(i, u, J) for all i, u, and J in the
/// box; J = 0 on the stop set. An empty beta means all ones.
LpResult lp_solve(const FiniteModel& model, std::vector<double> beta = {}, const LpBox& box = {});

// --- VI rate bounds ---------------------------------------------------------

struct RateCheck {
    ExtReal contraction_lhs;  ///< ||TJ - J*_S||_v
    ExtReal contraction_rhs;  ///< beta ||J - J*_S||_v
    ExtReal error_lhs;        ///< ||J - J*_S||_v
    ExtReal error_rhs;        ///< sup (J - TJ)/v / (1 - beta)
    double empirical_modulus = 0.0;  ///< max_x sum_y alpha p(y|x) v(y) / v(x) under mu*
    bool modulus_warning = false;    ///< empirical modulus exceeds beta
};

/// Both sides of the contraction and error bounds at J. Requires J >= J*_S.
RateCheck vi_rate_check(const FiniteModel& model, const CostFunction& J, const CostFunction& J_star_S,
                        const StationaryPolicy& mu_star, const WeightedNorm& v, double beta);

/// Same, with J*_S and an optimal regular mu* taken from the oracle.
RateCheck vi_rate_check(const FiniteModel& model, const CostFunction& J, const WeightedNorm& v, double beta,
                        const SRegion& region, const AnalysisOptions& analysis = {});

}  // namespace regdp
