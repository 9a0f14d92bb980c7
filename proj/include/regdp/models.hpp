#pragma once

#include <cstdint>
#include <vector>

#include "regdp/model.hpp"

namespace regdp {

// --- two-state deterministic shortest path ----------------------------------

/// State 1 with a self-transition costing a and a move to t costing b.
struct DetSpParams {
    double a = 0.0;
    double b = 0.0;
};

namespace detsp {
inline constexpr StateId kState1 = 0;
inline constexpr StateId kTerminal = 1;
inline constexpr ControlId kSelf = 0;
inline constexpr ControlId kToTerminal = 1;

/// The proper policy: move to t.
inline StationaryPolicy mu() { return {{kToTerminal, 0}}; }
/// The improper policy: stay at state 1.
inline StationaryPolicy mu_prime() { return {{kSelf, 0}}; }
}  // namespace detsp

/// Two states ("1", "t"), Jbar = 0, alpha = 1, stop set {t}.
FiniteModel build_detsp(const DetSpParams& p);

// --- deterministic line with a stopping cell --------------------------------

enum class GridMove { Left, Right, Stay };

struct GridCostOverride {
    StateId cell = 0;
    GridMove move = GridMove::Left;
    double cost = 0.0;
};

/**
 * Cells 0..n-1 on a line. Cell 0 is the stop set; every other cell may move
 * left, stay, or (except the last cell) move right. Control ids at a cell are
 * assigned in the order left, right, stay, skipping moves that do not exist.
 */
struct GridControlParams {
    std::size_t n = 10;
    double left_cost = 1.0;
    double right_cost = 1.0;
    double stay_cost = 1.0;
    std::vector<GridCostOverride> overrides;
};

FiniteModel build_grid_control(const GridControlParams& p);

/// Control id of a move at a non-stop cell, or throws ModelError if absent.
ControlId grid_control_id(const GridControlParams& p, StateId cell, GridMove move);

/// The policy that moves left everywhere off cell 0.
StationaryPolicy grid_always_left(const GridControlParams& p);

// --- random instances -------------------------------------------------------

/**
 * Random stochastic shortest path. The last state is the cost-free absorbing
 * terminal; the others carry n_controls controls with uniform costs.
 *
 * Control 0 at every state sends mass proper_bias * U(0.5, 1) directly to the
 * terminal; each other control does so (with mass U(0.05, 0.5)) with
 * probability proper_bias. proper_bias = 1 therefore makes every policy proper,
 * and any proper_bias > 0 leaves at least one proper policy.
 */
struct RandomSspParams {
    std::size_t n_states = 4;
    std::size_t n_controls = 2;
    double cost_lo = 0.0;
    double cost_hi = 1.0;
    double proper_bias = 1.0;
    std::uint64_t seed = 0;
};

FiniteModel build_random_ssp(const RandomSspParams& p);

/// Undiscounted model with stage costs in [0, 1], a fifth of them exactly 0,
/// and an absorbing terminal state reached directly by about half the controls.
FiniteModel build_nonneg_mdp(std::size_t n_states, std::size_t n_controls, std::uint64_t seed);

/// Discounted model without a stop set and stage costs in [0, 1].
FiniteModel build_discounted(std::size_t n_states, std::size_t n_controls, double alpha, std::uint64_t seed);

/// A proper policy built by positive-probability attraction to the stop set,
/// or nullopt when some state cannot reach it under any policy.
std::optional<StationaryPolicy> attractor_proper_policy(const FiniteModel& model);

}  // namespace regdp
