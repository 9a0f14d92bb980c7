#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "regdp/extreal.hpp"
#include "regdp/linalg.hpp"

namespace regdp {

using StateId = std::size_t;
using ControlId = std::size_t;

/// Rejected model data; carries the offending (state, control) when known.
class ModelError : public std::invalid_argument {
public:
    ModelError(const std::string& what, std::optional<StateId> state = std::nullopt,
               std::optional<ControlId> control = std::nullopt);

    std::optional<StateId> state;
    std::optional<ControlId> control;
};

struct Transition {
    double prob = 0.0;
    StateId next = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// One feasible control u at a state: expected stage cost g(x,u) and the
/// successor distribution P(. | x, u).
struct Control {
    std::string label;
    double cost = 0.0;
    std::vector<Transition> transitions;

    friend bool operator==(const Control&, const Control&) = default;
};

/**
 * Finite-state, finite-control instance of the abstract mapping
 *
 *   H(x, u, J) = g(x, u) + alpha * sum_y P(y | x, u) J(y).
 *
 * Invariants checked at construction: every U(x) is nonempty, transition
 * probabilities are nonnegative and sum to 1 within 1e-12, successors are in
 * range, the terminal function is finite and zero on the stop set, and every
 * stop-set state is cost-free and absorbing into the stop set.
 */
class FiniteModel {
public:
    FiniteModel(std::vector<std::vector<Control>> controls, double discount, CostFunction terminal,
                std::vector<StateId> stop_set = {}, std::vector<std::string> state_labels = {});

    std::size_t n_states() const noexcept { return controls_.size(); }
    std::span<const Control> controls(StateId x) const { return controls_.at(x); }
    const Control& control(StateId x, ControlId u) const;
    std::size_t n_controls(StateId x) const { return controls_.at(x).size(); }

    double discount() const noexcept { return discount_; }
    const CostFunction& terminal() const noexcept { return terminal_; }

    const std::vector<StateId>& stop_set() const noexcept { return stop_set_; }
    bool has_stop_set() const noexcept { return !stop_set_.empty(); }
    bool is_stop(StateId x) const { return is_stop_.at(x); }

    const std::string& state_label(StateId x) const { return labels_.at(x); }
    const std::vector<std::string>& state_labels() const noexcept { return labels_; }

    /// True when every (x, u) moves to a single successor with probability 1.
    bool is_deterministic() const noexcept { return deterministic_; }

    /// Product of |U(x)|, saturating at UINT64_MAX.
    std::uint64_t policy_count() const noexcept;

    /// Copy of this model with delta added to every stage cost off the stop set.
    FiniteModel perturbed(double delta) const;

    friend bool operator==(const FiniteModel&, const FiniteModel&) = default;

private:
    void validate() const;

    std::vector<std::vector<Control>> controls_;
    double discount_ = 1.0;
    CostFunction terminal_;
    std::vector<StateId> stop_set_;
    std::vector<bool> is_stop_;
    std::vector<std::string> labels_;
    bool deterministic_ = true;
};

/// mu(x) in U(x) for every state.
struct StationaryPolicy {
    std::vector<ControlId> choice;

    std::size_t size() const noexcept { return choice.size(); }
    ControlId operator[](StateId x) const { return choice[x]; }
    ControlId& operator[](StateId x) { return choice[x]; }

    friend bool operator==(const StationaryPolicy&, const StationaryPolicy&) = default;
    friend auto operator<=>(const StationaryPolicy&, const StationaryPolicy&) = default;
};

std::string to_string(const StationaryPolicy& mu);

/// Throws ModelError unless mu is a legal policy for the model.
void check_policy(const FiniteModel& model, const StationaryPolicy& mu);

/// The policy that applies control 0 everywhere.
StationaryPolicy first_control_policy(const FiniteModel& model);

/// A finite prefix (mu_0, ..., mu_{k-1}) followed by a stationary tail.
struct EventuallyStationaryPolicy {
    std::vector<StationaryPolicy> prefix;
    StationaryPolicy tail;

    static EventuallyStationaryPolicy stationary(StationaryPolicy mu) { return {{}, std::move(mu)}; }
};

/// T_mu as an affine map over all states.
AffineMap policy_affine_map(const FiniteModel& model, const StationaryPolicy& mu);

ExtReal apply_H(const FiniteModel& model, StateId x, ControlId u, const CostFunction& J);

struct BellmanResult {
    CostFunction values;
    StationaryPolicy greedy;  ///< lowest control id among exact minimizers
};

BellmanResult apply_T(const FiniteModel& model, const CostFunction& J);
CostFunction apply_Tmu(const FiniteModel& model, const StationaryPolicy& mu, const CostFunction& J);

/// T_{mu_0}(T_{mu_1}(... T_{mu_{k-1}} J)).
CostFunction compose_prefix(const FiniteModel& model, std::span<const StationaryPolicy> policies,
                            const CostFunction& J);

/// Controls whose H-value is within tie_tol of the minimum at x, in id order.
std::vector<ControlId> argmin_controls(const FiniteModel& model, StateId x, const CostFunction& J,
                                       double tie_tol);

enum class TieBreakRule { KeepCurrentIfTied, LowestControlId, AlwaysSwitchIfTied };

/// Picks one of the (nonempty, sorted) tied minimizers under the rule.
ControlId select_control(const std::vector<ControlId>& minimizers, ControlId current, TieBreakRule rule);

/// Greedy policy at J under the tie-break rule, relative to the current policy.
StationaryPolicy improve_policy(const FiniteModel& model, const CostFunction& J,
                                const StationaryPolicy& current, TieBreakRule rule, double tie_tol);

// --- limsup cost evaluation -------------------------------------------------

enum class LimitStatus {
    Settled,       ///< successive iterates agree within tolerance
    PlusInfinity,  ///< certified monotone drift above +blowup
    MinusInfinity, ///< certified monotone drift below -blowup
    Oscillating,   ///< bounded but not settling; value is the trailing-window max
    Uncertified,   ///< no certificate fired
};

std::string to_string(LimitStatus s);

struct LimsupOptions {
    std::size_t horizon_cap = 10000;  ///< sequential iterations
    double blowup_bound = 1e12;
    std::size_t window = 32;
    double settle_tol = 1e-12;
    /// Horizons 2^j, j <= max_doublings, are examined by repeated squaring once
    /// the sequential phase fails to settle.
    unsigned max_doublings = 50;
};

struct PolicyCost {
    CostFunction value;
    std::vector<LimitStatus> status;

    bool certified(StateId x) const {
        return status[x] != LimitStatus::Uncertified;
    }
    bool all_certified() const;
};

/// J_pi = limsup_k (T_{mu_0} ... T_{mu_k} Jbar), with +-inf assigned only
/// under a divergence certificate.
PolicyCost policy_cost(const FiniteModel& model, const EventuallyStationaryPolicy& pi,
                       const LimsupOptions& opts = {});

/// limsup_k of the prefix applied to T_tail^k start; the engine behind
/// policy_cost, also used for probe iterations from arbitrary J.
PolicyCost limsup_iterates(const FiniteModel& model, std::span<const StationaryPolicy> prefix,
                           const StationaryPolicy& tail, const CostFunction& start,
                           const LimsupOptions& opts = {});

}  // namespace regdp
