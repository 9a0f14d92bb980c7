#include "regdp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "regdp/models.hpp"
#include "regdp/random.hpp"

namespace regdp {

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Converged: return "Converged";
        case Outcome::Stalled: return "Stalled";
        case Outcome::Oscillating: return "Oscillating";
        case Outcome::Diverged: return "Diverged";
        case Outcome::IterationLimit: return "IterationLimit";
    }
    return "?";
}

std::string to_string(EvalMode m) {
    return m == EvalMode::ExactLinearSolve ? "exact" : "iterative";
}

std::string to_string(TieBreakRule r) {
    switch (r) {
        case TieBreakRule::KeepCurrentIfTied: return "keep";
        case TieBreakRule::LowestControlId: return "lowest";
        case TieBreakRule::AlwaysSwitchIfTied: return "always-switch";
    }
    return "?";
}

TieBreakRule parse_tie_break(const std::string& text) {
    if (text == "keep") return TieBreakRule::KeepCurrentIfTied;
    if (text == "lowest") return TieBreakRule::LowestControlId;
    if (text == "always-switch") return TieBreakRule::AlwaysSwitchIfTied;
    throw std::invalid_argument("unknown tie-break rule '" + text + "'");
}

EvalMode parse_eval_mode(const std::string& text) {
    if (text == "exact") return EvalMode::ExactLinearSolve;
    if (text == "iterative") return EvalMode::IterativeWithCap;
    throw std::invalid_argument("unknown evaluation mode '" + text + "'");
}

namespace {

void record(SolveTrace& tr, std::size_t k, const CostFunction& J, ExtReal residual) {
    tr.iterates.push_back(J);
    tr.iterate_index.push_back(k);
    tr.residuals.push_back(residual);
}

bool strictly_monotone(const std::deque<CostFunction>& window, StateId x, bool increasing) {
    for (std::size_t i = 1; i < window.size(); ++i) {
        const ExtReal prev = window[i - 1][x], cur = window[i][x];
        if (increasing ? !(prev < cur) : !(cur < prev)) return false;
    }
    return true;
}

bool close(const CostFunction& a, const CostFunction& b, double tol) {
    for (std::size_t x = 0; x < a.size(); ++x) {
        const double scale = b[x].is_finite() ? std::max(1.0, std::fabs(b[x].value())) : 1.0;
        if (!approx_equal(a[x], b[x], tol * scale)) return false;
    }
    return true;
}

}  // namespace

// --- value iteration --------------------------------------------------------

SolveTrace value_iteration(const FiniteModel& model, const CostFunction& J0, const ViOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    if (J0.size() != model.n_states()) throw std::invalid_argument("value_iteration: start length mismatch");
    if (opts.record_every == 0 || opts.window < 2) throw std::invalid_argument("value_iteration: bad options");
    const std::size_t n = model.n_states();

    SolveTrace tr;
    CostFunction J = J0;
    std::deque<CostFunction> window;
    for (std::size_t k = 0;; ++k) {
        const BellmanResult bell = apply_T(model, J);
        const ExtReal residual = sup_distance(bell.values, J);
        const bool converged = residual <= ExtReal(opts.tol);
        const bool at_limit = k + 1 >= opts.max_iter;
        tr.iterations = k + 1;
        if (k % opts.record_every == 0 || converged || at_limit) record(tr, k, J, residual);
        tr.final_value = J;

        if (converged) {
            if (k == 0 && !(opts.target && close(J, *opts.target, opts.tol))) {
                tr.outcome = Outcome::Stalled;
                tr.note = "the start is a fixed point of T";
            } else {
                tr.outcome = Outcome::Converged;
            }
            return tr;
        }
        for (std::size_t i = 0; i + 1 < window.size(); ++i) {
            if (close(bell.values, window[i], opts.tol) &&
                sup_distance(bell.values, window[i]) <= 1e-6 * residual) {
                tr.outcome = Outcome::Oscillating;
                tr.note = "iterates repeat with period " + std::to_string(window.size() - i);
                return tr;
            }
        }
        window.push_back(J);
        if (window.size() > opts.window) window.pop_front();

        if (window.size() == opts.window) {
            std::vector<StateId> plus;
            bool some_decreasing = false;
            for (StateId x = 0; x < n; ++x) {
                if (J[x] > ExtReal(opts.blowup_bound) && strictly_monotone(window, x, true)) plus.push_back(x);
                if (strictly_monotone(window, x, false)) some_decreasing = true;
            }
            std::vector<StateId> minus;
            if (some_decreasing && k % opts.window == 0) {
                // T^k J <= T_mu^k J for every mu, so divergence of the greedy
                // policy's iterates to -inf carries over to VI.
                LimsupOptions lo;
                lo.horizon_cap = opts.window;
                lo.window = opts.window;
                lo.blowup_bound = opts.blowup_bound;
                minus = certify_divergence(model, bell.greedy, J, lo).minus_states;
            }
            if (!plus.empty() || !minus.empty()) {
                tr.outcome = Outcome::Diverged;
                tr.diverged_states = plus;
                tr.diverged_states.insert(tr.diverged_states.end(), minus.begin(), minus.end());
                std::sort(tr.diverged_states.begin(), tr.diverged_states.end());
                for (StateId x : plus) tr.final_value[x] = ExtReal::pos_inf();
                for (StateId x : minus) tr.final_value[x] = ExtReal::neg_inf();
                tr.note = minus.empty() ? "monotone drift above the blow-up bound"
                                        : "greedy policy certified to diverge to -inf";
                return tr;
            }
        }
        if (at_limit) {
            tr.outcome = Outcome::IterationLimit;
            return tr;
        }
        J = bell.values;
    }
}

ViRegionReport vi_region_check(const FiniteModel& model, const SRegion& region, std::size_t samples,
                               std::uint64_t seed, const ViOptions& vi, const AnalysisOptions& analysis) {
    const std::size_t n = model.n_states();
    const WellBehavedRegion wb = well_behaved_region(model, region, analysis);
    ViRegionReport rep;
    rep.J_star_S = wb.lower;
    rep.fixed_point_hypothesis = close(apply_T(model, wb.lower).values, wb.lower, kDefaultTol);

    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        CostFunction inside(n), outside(n);
        for (StateId x = 0; x < n; ++x) {
            const double up = rng.uniform(0.0, 10.0);
            const double down = 10.0 - rng.uniform(0.0, 10.0);
            const ExtReal v = wb.lower[x];
            if ((model.has_stop_set() && model.is_stop(x)) || !v.is_finite()) {
                inside[x] = v;
                outside[x] = v;
            } else {
                inside[x] = v.value() + up;
                outside[x] = v.value() - down;
            }
        }
        if (wb.contains(inside)) {
            SolveTrace tr = value_iteration(model, inside, vi);
            if (tr.outcome != Outcome::Converged || !close(tr.final_value, wb.lower, 1e-7)) ++rep.inside_failures;
            rep.inside_starts.push_back(std::move(inside));
            rep.inside_runs.push_back(std::move(tr));
        }
        SolveTrace tr = value_iteration(model, outside, vi);
        if (!leq(tr.final_value, wb.lower, 1e-9)) ++rep.upper_bound_violations;
        rep.outside_starts.push_back(std::move(outside));
        rep.outside_runs.push_back(std::move(tr));
    }
    return rep;
}

// --- policy iteration -------------------------------------------------------

SolveTrace policy_iteration(const FiniteModel& model, const StationaryPolicy& mu0, const PiOptions& opts) {
    check_policy(model, mu0);
    SolveTrace tr;
    std::map<StationaryPolicy, std::size_t> seen;
    StationaryPolicy mu = mu0;
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        CostFunction J;
        if (opts.eval == EvalMode::ExactLinearSolve) {
            J = exact_policy_cost(model, mu);
        } else {
            PolicyEvaluation ev = evaluate_policy(model, mu, opts.limsup);
            for (StateId x = 0; x < model.n_states(); ++x)
                if (ev.status[x] == LimitStatus::Uncertified) tr.note = "some policy costs were not certified";
            J = std::move(ev.value);
        }
        record(tr, k, J, sup_distance(apply_T(model, J).values, J));
        tr.policies.push_back(mu);
        tr.iterations = k + 1;
        tr.final_value = J;
        seen.emplace(mu, k);

        StationaryPolicy next = improve_policy(model, J, mu, opts.rule, opts.tie_tol);
        if (next == mu) {
            tr.outcome = Outcome::Converged;
            return tr;
        }
        const auto it = seen.find(next);
        if (it != seen.end()) {
            tr.outcome = Outcome::Oscillating;
            tr.cycle.assign(tr.policies.begin() + static_cast<std::ptrdiff_t>(it->second), tr.policies.end());
            tr.note = "policy cycle of length " + std::to_string(tr.cycle.size());
            return tr;
        }
        mu = std::move(next);
    }
    tr.outcome = Outcome::IterationLimit;
    return tr;
}

// --- optimistic policy iteration --------------------------------------------

SolveTrace optimistic_pi(const FiniteModel& model, const CostFunction& J0, const OptimisticPiOptions& opts) {
    if (J0.size() != model.n_states()) throw std::invalid_argument("optimistic_pi: start length mismatch");
    if (opts.m_schedule.empty() ||
        std::any_of(opts.m_schedule.begin(), opts.m_schedule.end(), [](std::size_t m) { return m == 0; }))
        throw std::invalid_argument("optimistic_pi: m_schedule entries must be positive");
    if (opts.record_every == 0) throw std::invalid_argument("optimistic_pi: record_every must be positive");
    const BellmanResult first = apply_T(model, J0);
    for (StateId x = 0; x < model.n_states(); ++x) {
        const ExtReal tj = first.values[x], j = J0[x];
        const bool ok = (tj.is_finite() && j.is_finite()) ? tj.value() <= j.value() + opts.tol : tj <= j;
        if (!ok)
            throw std::invalid_argument("optimistic_pi requires J0 >= T J0; fails at state " + std::to_string(x));
    }

    SolveTrace tr;
    CostFunction J = J0;
    StationaryPolicy mu = first.greedy;
    for (std::size_t k = 0;; ++k) {
        const BellmanResult bell = k == 0 ? first : apply_T(model, J);
        if (k > 0) mu = improve_policy(model, J, mu, opts.rule, opts.tie_tol);
        const ExtReal residual = sup_distance(bell.values, J);
        const bool converged = residual <= ExtReal(opts.tol) && k + 1 >= opts.min_iter;
        const bool at_limit = k + 1 >= opts.max_iter;
        tr.iterations = k + 1;
        if (k % opts.record_every == 0 || converged || at_limit) {
            record(tr, k, J, residual);
            tr.policies.push_back(mu);
        }
        tr.final_value = J;
        if (converged) {
            tr.outcome = Outcome::Converged;
            return tr;
        }
        if (at_limit) {
            tr.outcome = Outcome::IterationLimit;
            return tr;
        }
        const std::size_t m = opts.m_schedule[std::min(k, opts.m_schedule.size() - 1)];
        for (std::size_t i = 0; i < m; ++i) J = apply_Tmu(model, mu, J);
    }
}

// --- perturbation -----------------------------------------------------------

PerturbationSchedule PerturbationSchedule::standard() {
    PerturbationSchedule s;
    for (int i = 0; i <= 20; ++i) s.deltas.push_back(std::ldexp(1.0, -i));
    return s;
}

void PerturbationSchedule::validate() const {
    if (deltas.empty()) throw std::invalid_argument("perturbation schedule is empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || !std::isfinite(deltas[i]))
            throw std::invalid_argument("perturbation schedule entries must be positive");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument("perturbation schedule must be strictly decreasing");
    }
}

PerturbationResult perturbation_solve(const FiniteModel& model, const PerturbationOptions& opts) {
    opts.schedule.validate();
    const std::size_t n = model.n_states();
    PerturbationResult res;
    StationaryPolicy start = attractor_proper_policy(model).value_or(first_control_policy(model));
    PiOptions pi;
    pi.max_iter = opts.max_iter;
    pi.tie_tol = opts.inner_tol;
    for (double delta : opts.schedule.deltas) {
        const FiniteModel perturbed = model.perturbed(delta);
        const SolveTrace tr = policy_iteration(perturbed, start, pi);
        if (tr.outcome != Outcome::Converged) {
            std::ostringstream msg;
            msg << "perturbation: policy iteration ended " << to_string(tr.outcome) << " at delta = " << delta;
            throw std::runtime_error(msg.str());
        }
        res.deltas.push_back(delta);
        res.values.push_back(tr.final_value);
        res.policies.push_back(tr.policies.back());
        start = tr.policies.back();
    }

    res.limit = res.values.back();
    const std::size_t m = res.values.size();
    if (m < 3) {
        res.converged = false;
        return res;
    }
    const double d1 = res.deltas[m - 3], d2 = res.deltas[m - 2], d3 = res.deltas[m - 1];
    bool affine = true;
    CostFunction limit(n);
    for (StateId x = 0; x < n; ++x) {
        const ExtReal e1 = res.values[m - 3][x], e2 = res.values[m - 2][x], e3 = res.values[m - 1][x];
        if (!e1.is_finite() || !e2.is_finite() || !e3.is_finite()) {
            limit[x] = e3;
            continue;
        }
        const double slope = (e2.value() - e3.value()) / (d2 - d3);
        const double predicted = e3.value() + slope * (d1 - d3);
        if (std::fabs(predicted - e1.value()) > 1e-9 * std::max(1.0, std::fabs(e1.value()))) affine = false;
        limit[x] = e3.value() - slope * d3;
    }
    res.converged = affine;
    res.extrapolated = affine;
    if (affine) res.limit = limit;
    return res;
}

// --- linear programming -----------------------------------------------------

LpResult lp_solve(const FiniteModel& model, std::vector<double> beta, const LpBox& box) {
    const std::size_t n = model.n_states();
    if (beta.empty()) beta.assign(n, 1.0);
    if (beta.size() != n) throw std::invalid_argument("lp_solve: weight vector length mismatch");
    for (double b : beta)
        if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("lp_solve: weights must be positive");
    if (!std::isfinite(box.lo) || !std::isfinite(box.hi) || !(box.lo < box.hi))
        throw std::invalid_argument("lp_solve: box bounds must be finite with lo < hi");

    // Variables y_i = J(i) - lo over the non-stop states.
    std::vector<StateId> free_states;
    std::vector<long> index(n, -1);
    for (StateId x = 0; x < n; ++x) {
        if (model.has_stop_set() && model.is_stop(x)) continue;
        index[x] = static_cast<long>(free_states.size());
        free_states.push_back(x);
    }
    const std::size_t m = free_states.size();
    const double alpha = model.discount();
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < m; ++i) {
        const StateId x = free_states[i];
        for (const Control& c : model.controls(x)) {
            std::vector<double> row(m, 0.0);
            row[i] += 1.0;
            double free_mass = 0.0;
            for (const Transition& t : c.transitions) {
                if (index[t.next] < 0) continue;
                row[static_cast<std::size_t>(index[t.next])] -= alpha * t.prob;
                free_mass += t.prob;
            }
            A.push_back(std::move(row));
            b.push_back(c.cost - box.lo * (1.0 - alpha * free_mass));
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(m, 0.0);
        row[i] = 1.0;
        A.push_back(std::move(row));
        b.push_back(box.hi - box.lo);
    }
    std::vector<double> c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = beta[free_states[i]];

    const LpSolution sol = simplex_maximize(A, b, c);
    switch (sol.status) {
        case LpStatus::Optimal: break;
        case LpStatus::Infeasible: throw LpError("lp_solve: no feasible J inside the box");
        case LpStatus::Unbounded: throw LpError("lp_solve: program unbounded inside the box");
        case LpStatus::IterationLimit: throw LpError("lp_solve: simplex pivot limit reached");
    }
    LpResult out;
    out.J = CostFunction(n, 0.0);
    out.pivots = sol.pivots;
    for (std::size_t i = 0; i < m; ++i) {
        const StateId x = free_states[i];
        const double v = sol.x[i] + box.lo;
        out.J[x] = v;
        out.objective += beta[x] * v;
        const double tol = 1e-9 * std::max(1.0, std::fabs(v));
        if (std::fabs(v - box.lo) <= tol) out.at_lower.push_back(x);
        if (std::fabs(v - box.hi) <= tol) out.at_upper.push_back(x);
    }
    return out;
}

// --- VI rate bounds ---------------------------------------------------------

RateCheck vi_rate_check(const FiniteModel& model, const CostFunction& J, const CostFunction& J_star_S,
                        const StationaryPolicy& mu_star, const WeightedNorm& v, double beta) {
    const std::size_t n = model.n_states();
    if (J.size() != n || J_star_S.size() != n || v.size() != n)
        throw std::invalid_argument("vi_rate_check: length mismatch");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("vi_rate_check: beta must lie in (0, 1)");
    if (!J.all_finite() || !J_star_S.all_finite())
        throw std::invalid_argument("vi_rate_check: J and J*_S must be real-valued");
    if (!leq(J_star_S, J, kDefaultTol)) throw std::invalid_argument("vi_rate_check requires J >= J*_S");
    check_policy(model, mu_star);

    const CostFunction TJ = apply_T(model, J).values;
    RateCheck rc;
    rc.contraction_lhs = weighted_sup_distance(TJ, J_star_S, v);
    rc.error_lhs = weighted_sup_distance(J, J_star_S, v);
    rc.contraction_rhs = beta * rc.error_lhs;
    double sup = -INFINITY;
    for (StateId x = 0; x < n; ++x) sup = std::max(sup, (J[x].value() - TJ[x].value()) / v[x]);
    rc.error_rhs = sup / (1.0 - beta);

    // Stop states lie outside the optimization and carry no weight.
    auto stop = [&](StateId x) { return model.has_stop_set() && model.is_stop(x); };
    const AffineMap map = policy_affine_map(model, mu_star);
    for (StateId x = 0; x < n; ++x) {
        if (stop(x)) continue;
        double s = 0.0;
        for (StateId y = 0; y < n; ++y)
            if (!stop(y)) s += map.linear(x, y) * v[y];
        rc.empirical_modulus = std::max(rc.empirical_modulus, s / v[x]);
    }
    rc.modulus_warning = rc.empirical_modulus > beta + 1e-12;
    return rc;
}

RateCheck vi_rate_check(const FiniteModel& model, const CostFunction& J, const WeightedNorm& v, double beta,
                        const SRegion& region, const AnalysisOptions& analysis) {
    const RegularityReport rep = brute_force_optima(model, region, analysis);
    for (const PolicyRecord& rec : rep.policies) {
        if (rec.certification.verdict != Verdict::Certified) continue;
        if (close(rec.certification.cost.value, rep.J_star_S, kDefaultTol))
            return vi_rate_check(model, J, rep.J_star_S, rec.policy, v, beta);
    }
    throw std::runtime_error("vi_rate_check: no regular policy attains J*_S");
}

}  // namespace regdp
