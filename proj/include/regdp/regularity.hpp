#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regdp/model.hpp"
#include "regdp/oracle.hpp"

namespace regdp {

// --- S regions --------------------------------------------------------------

/**
 * The candidate sets S of cost functions.
 *
 * The termination states of a model with a stop set are not part of the
 * optimization; every region pins J = 0 there.
 *
 *   AllReal              J(x) finite.
 *   NonnegExtended       J(x) in [0, +inf].
 *   BoundedBelow         J(x) finite (bounded below is automatic on finite X).
 *   ZeroOnStopSet        J(x) > -inf, finite on X_f = {x | J*(x) < inf}.
 *   ExpectationVanishing J >= 0 and alpha^k E{J(x_k)} -> 0 from every x0 with
 *                        J_mu(x0) < inf, over all stationary mu.
 */
enum class RegionKind { AllReal, NonnegExtended, BoundedBelow, ZeroOnStopSet, ExpectationVanishing };

std::string to_string(RegionKind k);
RegionKind parse_region_kind(const std::string& text);

struct RegionOptions {
    std::size_t n_probes = 16;
    std::uint64_t seed = 0;
    /// k at which the ExpectationVanishing test is taken.
    std::size_t ev_horizon = 10000;
    std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
};

class SRegion {
public:
    RegionKind kind() const noexcept { return kind_; }

    bool contains(const CostFunction& J) const;

    /// J <= J~ for some J~ in the region, decided in closed form per kind.
    bool dominated_by_member(const CostFunction& J) const;

    /// Finite sample of members used by the sampler-relative certificates.
    const std::vector<CostFunction>& probes() const noexcept { return probes_; }

    /// Whether members may take the value +inf somewhere.
    bool admits_infinite_values() const noexcept;

    /// States where members must be finite (X_f for ZeroOnStopSet).
    const std::vector<bool>& finite_states() const noexcept { return finite_; }

private:
    friend SRegion make_region(const FiniteModel&, RegionKind, const RegionOptions&);

    RegionKind kind_ = RegionKind::AllReal;
    std::vector<bool> stop_;
    std::vector<bool> finite_;
    // Pairs (alpha^k, row of P_mu^k) for k in the trailing window, one per
    // source state with finite J_mu; a member must have alpha^k row . J <= 1e-9.
    std::vector<std::pair<double, std::vector<double>>> ev_rows_;
    std::vector<CostFunction> probes_;
};

/// Builds the region for a model, including its probe sample. Enumerates the
/// stationary policies when J* or the ExpectationVanishing data are needed.
SRegion make_region(const FiniteModel& model, RegionKind kind, const RegionOptions& opts = {});

// --- S-regularity -----------------------------------------------------------

enum class Verdict { Certified, Refuted, Unknown };
std::string to_string(Verdict v);

struct Certification {
    Verdict verdict = Verdict::Unknown;
    PolicyEvaluation cost;
    std::string reason;
};

/// Sampler-relative check of: J_mu in S, T_mu J_mu = J_mu, and T_mu^k J -> J_mu
/// for every probe J.
Certification certify_s_regular(const FiniteModel& model, const StationaryPolicy& mu, const SRegion& region,
                                std::size_t horizon_cap = 10000, double tol = kDefaultTol);

struct PolicyRecord {
    StationaryPolicy policy;
    Certification certification;
};

/// Per-policy classification plus the brute-force optima J* and J*_S.
struct RegularityReport {
    RegionKind region = RegionKind::AllReal;
    std::vector<PolicyRecord> policies;
    CostFunction J_star;
    CostFunction J_star_S;
    std::vector<StateId> zero_set;      ///< X_s = {x | J*(x) = 0}
    std::vector<StateId> infinite_set;  ///< X_inf = {x | J*(x) = +inf}
    bool all_costs_certified = true;
    std::uint64_t infinity_conflicts = 0;  ///< times (+inf) + (-inf) was evaluated
};

using OracleResult = RegularityReport;

struct AnalysisOptions {
    std::size_t horizon_cap = 10000;
    double tol = kDefaultTol;
    std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
};

/// Evaluates and classifies every stationary policy.
RegularityReport brute_force_optima(const FiniteModel& model, const SRegion& region,
                                    const AnalysisOptions& opts = {});

/// J*_S = min of J_mu over Certified policies; +inf where none exists.
CostFunction opt_over_regular(const FiniteModel& model, const SRegion& region, const AnalysisOptions& opts = {});

// --- fixed points and the well-behaved region -------------------------------

struct ScanPoint {
    CostFunction J;
    ExtReal residual;  ///< sup |TJ - J|
};

inline constexpr std::uint64_t kScanLimit = 10'000'000;

/// Every point of the grid product with its Bellman residual.
std::vector<ScanPoint> scan_grid(const FiniteModel& model, const std::vector<std::vector<double>>& grid);

/// Grid points with sup |TJ - J| <= tol.
std::vector<CostFunction> fixed_point_scan(const FiniteModel& model, const std::vector<std::vector<double>>& grid,
                                           double tol = kDefaultTol);

/// W_S = {J | J*_S <= J <= J~ for some J~ in S}.
struct WellBehavedRegion {
    CostFunction lower;
    SRegion region;

    bool contains(const CostFunction& J, double tol = kDefaultTol) const;
    std::string upper_description() const;
};

WellBehavedRegion well_behaved_region(const FiniteModel& model, const SRegion& region,
                                      const AnalysisOptions& opts = {});

// --- PI properties ----------------------------------------------------------

struct WeakPiResult {
    bool holds = false;
    /// Policies of a PI-compatible all-regular sequence; the last entry repeats
    /// an earlier one, closing the infinite sequence.
    std::vector<StationaryPolicy> witness;
};

/// Existence of an infinite PI sequence of Certified policies. With a rule,
/// only the sequence that deterministic PI under that rule generates counts.
WeakPiResult check_weak_pi_property(const FiniteModel& model, const SRegion& region,
                                    std::optional<TieBreakRule> rule = std::nullopt,
                                    const AnalysisOptions& opts = {});

struct StrongPiReport {
    bool finite_values = false;     ///< (1) J(x) < inf on S
    bool regular_exists = false;    ///< (2)
    bool minima_attained = true;    ///< (3) automatic for finite U(x)
    bool irregular_diverge = false; ///< (4) limsup T_mu'^k J = inf somewhere
    std::vector<std::string> failures;

    bool holds() const noexcept { return finite_values && regular_exists && minima_attained && irregular_diverge; }
};

StrongPiReport check_strong_pi_conditions(const FiniteModel& model, const SRegion& region,
                                          double blowup_bound = 1e12, const AnalysisOptions& opts = {});

}  // namespace regdp
