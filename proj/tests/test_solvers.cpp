#include <doctest.h>

#include "regdp/models.hpp"
#include "regdp/oracle.hpp"
#include "regdp/random.hpp"
#include "regdp/regularity.hpp"
#include "regdp/solvers.hpp"

using namespace regdp;

namespace {
SRegion all_real(const FiniteModel& m) { return make_region(m, RegionKind::AllReal); }

CostFunction oracle_J_star(const FiniteModel& m) { return brute_force_optima(m, all_real(m)).J_star; }
}  // namespace

TEST_CASE("value iteration on detsp") {
    const FiniteModel zero = build_detsp({0, 3});
    const SolveTrace a = value_iteration(zero, {5.0, 0.0});
    CHECK(a.outcome == Outcome::Converged);
    CHECK(a.final_value == CostFunction{3.0, 0.0});
    CHECK(a.iterations == 2);

    const SolveTrace b = value_iteration(zero, {1.0, 0.0});
    CHECK(b.outcome == Outcome::Stalled);
    CHECK(b.final_value == CostFunction{1.0, 0.0});

    const SolveTrace c = value_iteration(build_detsp({1, 5}), {0.0, 0.0});
    CHECK(c.outcome == Outcome::Converged);
    CHECK(c.final_value == CostFunction{5.0, 0.0});
    // Five T applications reach 5 and a sixth confirms the fixed point.
    CHECK(c.iterations == 6);
    CHECK(c.iterates.size() == c.residuals.size());
}

TEST_CASE("value iteration reports divergence and iteration limits") {
    const SolveTrace d = value_iteration(build_detsp({-1, 5}), {0.0, 0.0});
    CHECK(d.outcome == Outcome::Diverged);
    CHECK(d.diverged_states == std::vector<StateId>{0});

    ViOptions capped;
    capped.max_iter = 3;
    const SolveTrace e = value_iteration(build_discounted(3, 2, 0.99, 1), CostFunction(3), capped);
    CHECK(e.outcome == Outcome::IterationLimit);
    CHECK_THROWS_AS(value_iteration(build_detsp({0, 3}), CostFunction(3)), std::invalid_argument);
}

TEST_CASE("value iteration inside and outside the well-behaved region on detsp") {
    const FiniteModel zero = build_detsp({0, 3});
    for (double j = 3.0; j <= 10.0; j += 0.5) {
        const SolveTrace t = value_iteration(zero, {j, 0.0});
        CHECK(approx_equal(t.final_value, CostFunction{3.0, 0.0}));
    }
    CHECK(value_iteration(zero, {2.0, 0.0}).final_value == CostFunction{2.0, 0.0});
    const FiniteModel pos = build_detsp({1, 5});
    for (double j : {-20.0, 0.0, 4.0, 5.0, 12.0})
        CHECK(approx_equal(value_iteration(pos, {j, 0.0}).final_value, CostFunction{5.0, 0.0}));
}

TEST_CASE("vi_region_check on detsp(0,3)") {
    const FiniteModel zero = build_detsp({0, 3});
    const ViRegionReport r = vi_region_check(zero, all_real(zero), 10, 1);
    CHECK(r.fixed_point_hypothesis);
    CHECK(r.J_star_S == CostFunction{3.0, 0.0});
    CHECK(r.inside_runs.size() == 10);
    CHECK(r.inside_failures == 0);
    CHECK(r.upper_bound_violations == 0);
}

TEST_CASE("policy iteration examples") {
    const FiniteModel zero = build_detsp({0, 3});
    PiOptions keep;
    const SolveTrace a = policy_iteration(zero, detsp::mu(), keep);
    CHECK(a.outcome == Outcome::Converged);
    CHECK(a.policies.back() == detsp::mu());
    CHECK(a.final_value == CostFunction{3.0, 0.0});

    PiOptions sw;
    sw.rule = TieBreakRule::AlwaysSwitchIfTied;
    const SolveTrace b = policy_iteration(build_detsp({0, -2}), detsp::mu(), sw);
    CHECK(b.outcome == Outcome::Oscillating);
    REQUIRE(b.cycle.size() == 2);
    CHECK(b.cycle[0] == detsp::mu());
    CHECK(b.cycle[1] == detsp::mu_prime());
}

TEST_CASE("property: PI with any tie rule and evaluation mode reaches the oracle optimum") {
    Rng rng(99);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const FiniteModel m = build_random_ssp({2 + rng.index(4), 1 + rng.index(3), 0, 1, 1.0, seed});
        const CostFunction J_star = oracle_J_star(m);
        StationaryPolicy mu0{std::vector<ControlId>(m.n_states())};
        for (StateId x = 0; x < m.n_states(); ++x) mu0[x] = rng.index(m.n_controls(x));
        for (TieBreakRule rule :
             {TieBreakRule::KeepCurrentIfTied, TieBreakRule::LowestControlId, TieBreakRule::AlwaysSwitchIfTied})
            for (EvalMode mode : {EvalMode::ExactLinearSolve, EvalMode::IterativeWithCap}) {
                PiOptions o;
                o.rule = rule;
                o.eval = mode;
                const SolveTrace t = policy_iteration(m, mu0, o);
                CHECK(t.outcome == Outcome::Converged);
                CHECK(approx_equal(t.final_value, J_star, 1e-7));
            }
    }
}

TEST_CASE("optimistic PI") {
    const FiniteModel zero = build_detsp({0, 3});
    OptimisticPiOptions o;
    o.min_iter = 5;
    const SolveTrace a = optimistic_pi(zero, {1.0, 0.0}, o);
    for (const CostFunction& J : a.iterates) CHECK(J == CostFunction{1.0, 0.0});
    CHECK(a.final_value == CostFunction{1.0, 0.0});

    OptimisticPiOptions three;
    three.m_schedule = {3};
    const SolveTrace b = optimistic_pi(build_detsp({1, 5}), {10.0, 0.0}, three);
    CHECK(b.outcome == Outcome::Converged);
    CHECK(approx_equal(b.final_value, CostFunction{5.0, 0.0}));

    const FiniteModel r = build_random_ssp({4, 2, 0, 1, 1.0, 3});
    const CostFunction J_star = oracle_J_star(r);
    const SolveTrace c = optimistic_pi(r, J_star, o);
    for (const CostFunction& J : c.iterates) CHECK(approx_equal(J, J_star, 1e-9));

    CHECK_THROWS_AS(optimistic_pi(build_detsp({1, 5}), {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("perturbation on detsp(0,3)") {
    const FiniteModel zero = build_detsp({0, 3});
    PerturbationOptions single;
    single.schedule.deltas = {0.1};
    const PerturbationResult a = perturbation_solve(zero, single);
    CHECK(a.values[0][0].value() == doctest::Approx(3.1).epsilon(1e-12));

    const PerturbationResult b = perturbation_solve(zero);
    for (std::size_t i = 0; i < b.deltas.size(); ++i)
        CHECK(std::abs(b.values[i][0].value() - (3.0 + b.deltas[i])) <= 1e-9);
    CHECK(b.extrapolated);
    CHECK(std::abs(b.limit[0].value() - 3.0) <= 1e-9);

    const PerturbationSchedule rising{{0.5, 1.0}}, empty{};
    CHECK_THROWS_AS(rising.validate(), std::invalid_argument);
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("property: perturbation limit equals the oracle on all-proper SSPs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FiniteModel m = build_random_ssp({4, 2, 0, 1, 1.0, seed});
        const auto rep = brute_force_optima(m, all_real(m));
        const PerturbationResult r = perturbation_solve(m);
        CHECK(approx_equal(r.limit, rep.J_star_S, 1e-7));
        CHECK(approx_equal(r.limit, rep.J_star, 1e-7));
    }
}

TEST_CASE("lp_solve examples") {
    const LpResult a = lp_solve(build_detsp({1, 5}), {1.0, 1.0}, {-100, 100});
    CHECK(a.J[0].value() == doctest::Approx(5.0).epsilon(1e-12));
    const LpResult b = lp_solve(build_detsp({0, 3}), {1.0, 1.0}, {-100, 100});
    CHECK(b.J[0].value() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(lp_solve(build_detsp({0, 3}), {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(lp_solve(build_detsp({0, 3}), {}, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("property: LP matches value iteration on all-proper SSPs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const FiniteModel m = build_random_ssp({5, 3, 0, 1, 1.0, seed});
        const LpResult lp = lp_solve(m);
        ViOptions tight;
        tight.tol = 1e-12;
        CHECK(approx_equal(lp.J, value_iteration(m, m.terminal(), tight).final_value, 1e-7));
    }
}

TEST_CASE("rate bounds on a discounted model") {
    const FiniteModel m = build_discounted(4, 2, 0.9, 8);
    const SRegion s = all_real(m);
    const CostFunction J_star = brute_force_optima(m, s).J_star_S;
    const WeightedNorm v = WeightedNorm::uniform(4);
    for (double c : {0.0, 0.5, 3.0}) {
        CostFunction J = J_star;
        for (auto& x : J) x = x.value() + c;
        const RateCheck r = vi_rate_check(m, J, v, 0.9, s);
        CHECK(r.contraction_lhs <= ExtReal(r.contraction_rhs.value() + 1e-9));
        CHECK(r.error_lhs <= ExtReal(r.error_rhs.value() + 1e-9));
        CHECK_FALSE(r.modulus_warning);
        if (c == 0.0) {
            CHECK(r.contraction_lhs.value() == doctest::Approx(0.0));
            CHECK(r.contraction_rhs.value() == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("rate bound on an SSP with hitting-time weights") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FiniteModel m = build_random_ssp({4, 2, 0, 1, 1.0, seed});
        const SRegion s = all_real(m);
        const auto rep = brute_force_optima(m, s);
        PiOptions po;
        po.rule = TieBreakRule::LowestControlId;
        const StationaryPolicy mu_star = policy_iteration(m, first_control_policy(m), po).policies.back();

        // v = 1 + expected steps to termination under mu*, so sum_y p v(y) = v(x) - 1.
        std::vector<std::vector<Control>> unit(m.n_states());
        for (StateId x = 0; x < m.n_states(); ++x)
            for (const Control& c : m.controls(x))
                unit[x].push_back({c.label, m.is_stop(x) ? 0.0 : 1.0, c.transitions});
        const FiniteModel steps(unit, 1.0, m.terminal(), m.stop_set());
        const CostFunction hit = exact_policy_cost(steps, mu_star);
        std::vector<double> w;
        double vmax = 0;
        for (ExtReal h : hit) {
            w.push_back(1.0 + h.value());
            vmax = std::max(vmax, 1.0 + h.value());
        }
        const double beta = 1.0 - 1.0 / vmax;
        CostFunction J = rep.J_star_S;
        for (StateId x = 0; x + 1 < m.n_states(); ++x) J[x] = J[x].value() + 0.3 * w[x];
        const RateCheck r = vi_rate_check(m, J, rep.J_star_S, mu_star, WeightedNorm(w), beta);
        CHECK(r.error_lhs <= ExtReal(r.error_rhs.value() + 1e-9));
        CHECK(r.contraction_lhs <= ExtReal(r.contraction_rhs.value() + 1e-9));
        CHECK(r.empirical_modulus <= beta + 1e-12);
    }
}

TEST_CASE("tie rule and evaluation mode names") {
    for (TieBreakRule r :
         {TieBreakRule::KeepCurrentIfTied, TieBreakRule::LowestControlId, TieBreakRule::AlwaysSwitchIfTied})
        CHECK(parse_tie_break(to_string(r)) == r);
    for (EvalMode m : {EvalMode::ExactLinearSolve, EvalMode::IterativeWithCap})
        CHECK(parse_eval_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_tie_break("random"), std::invalid_argument);
}
