#include <doctest.h>

#include <set>

#include "regdp/models.hpp"
#include "regdp/oracle.hpp"
#include "regdp/random.hpp"
#include "regdp/regularity.hpp"

using namespace regdp;

namespace {
const ExtReal inf = ExtReal::pos_inf();

// J_mu as the partial sums of the Neumann series, accumulated step by step.
CostFunction neumann_cost(const FiniteModel& m, const StationaryPolicy& mu, int steps) {
    const std::size_t n = m.n_states();
    std::vector<double> J(n, 0.0), dist;
    for (StateId x0 = 0; x0 < n; ++x0) {
        dist.assign(n, 0.0);
        dist[x0] = 1.0;
        double total = 0, scale = 1;
        for (int k = 0; k < steps; ++k) {
            std::vector<double> next(n, 0.0);
            for (StateId x = 0; x < n; ++x) {
                if (dist[x] == 0) continue;
                const Control& c = m.control(x, mu[x]);
                total += scale * dist[x] * c.cost;
                for (const Transition& t : c.transitions) next[t.next] += dist[x] * t.prob;
            }
            dist = next;
            scale *= m.discount();
        }
        J[x0] = total;
    }
    CostFunction out(n);
    for (StateId x = 0; x < n; ++x) out[x] = J[x];
    return out;
}
}  // namespace

TEST_CASE("PolicyEnumeration yields every policy exactly once") {
    const FiniteModel m = build_random_ssp({4, 3, 0, 1, 1.0, 2});
    PolicyEnumeration e(m);
    CHECK(e.size() == 27);
    std::set<StationaryPolicy> seen;
    for (const StationaryPolicy& mu : e) {
        check_policy(m, mu);
        seen.insert(mu);
    }
    CHECK(seen.size() == 27);
    CHECK_THROWS_AS(PolicyEnumeration(m, 26), EnumerationLimitError);
}

TEST_CASE("classify_proper") {
    const FiniteModel m = build_detsp({1, 5});
    CHECK(classify_proper(m, detsp::mu()));
    CHECK_FALSE(classify_proper(m, detsp::mu_prime()));
    const FiniteModel r = build_random_ssp({3, 2, 0, 1, 1.0, 7});
    for (const StationaryPolicy& mu : PolicyEnumeration(r)) CHECK(classify_proper(r, mu));
    CHECK_THROWS_AS(classify_proper(build_discounted(2, 2, 0.5, 1), {{0, 0}}), ModelError);
}

TEST_CASE("exact_policy_cost examples") {
    CHECK(exact_policy_cost(build_detsp({1, 5}), detsp::mu())[0] == ExtReal(5.0));
    const FiniteModel loop({{Control{"loop", 1.0, {{1.0, 0}}}}}, 0.5, CostFunction(1));
    CHECK(exact_policy_cost(loop, {{0}})[0].value() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(exact_policy_cost(build_detsp({1, 5}), detsp::mu_prime()), SingularSystemError);
}

TEST_CASE("property: exact_policy_cost agrees with the Neumann series and policy_cost") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const FiniteModel m = build_random_ssp({5, 2, 0, 1, 1.0, seed});
        Rng rng(seed);
        StationaryPolicy mu{std::vector<ControlId>(5)};
        for (StateId x = 0; x < 5; ++x) mu[x] = rng.index(m.n_controls(x));
        if (!classify_proper(m, mu)) continue;
        const CostFunction exact = exact_policy_cost(m, mu);
        CHECK(approx_equal(exact, neumann_cost(m, mu, 4000), 1e-7));
        CHECK(approx_equal(exact, policy_cost(m, EventuallyStationaryPolicy::stationary(mu)).value, 1e-7));
        CHECK(sup_distance(apply_Tmu(m, mu, exact), exact) <= ExtReal(1e-9));
    }
}

TEST_CASE("evaluate_policy picks the sound route") {
    const PolicyEvaluation p = evaluate_policy(build_detsp({0, 3}), detsp::mu());
    CHECK(p.exact);
    CHECK(p.proper == std::optional<bool>(true));
    const PolicyEvaluation q = evaluate_policy(build_detsp({1, 5}), detsp::mu_prime());
    CHECK_FALSE(q.exact);
    CHECK(q.proper == std::optional<bool>(false));
    CHECK(q.value[0].is_pos_inf());
    CHECK(evaluate_policy(build_discounted(3, 2, 0.9, 1), {{0, 0, 0}}).exact);
}

TEST_CASE("brute_force_optima examples") {
    const FiniteModel m = build_detsp({0, 3});
    const auto rep = brute_force_optima(m, make_region(m, RegionKind::AllReal));
    CHECK(rep.J_star == CostFunction{0.0, 0.0});
    CHECK(rep.J_star_S == CostFunction{3.0, 0.0});

    const FiniteModel neg = build_detsp({-1, 5});
    CHECK(brute_force_optima(neg, make_region(neg, RegionKind::AllReal)).J_star[0].is_neg_inf());

    const FiniteModel chain({{Control{"go", 1.0, {{1.0, 1}}}}, {Control{"stop", 0.0, {{1.0, 1}}}}}, 1.0,
                            CostFunction(2), {1});
    CHECK(brute_force_optima(chain, make_region(chain, RegionKind::AllReal)).J_star == CostFunction{1.0, 0.0});
}

TEST_CASE("brute_force_optima matches frozen values confirmed by an independent iteration") {
    const FiniteModel m = build_random_ssp({4, 2, 0, 1, 1.0, 7});
    const auto rep = brute_force_optima(m, make_region(m, RegionKind::AllReal));
    const CostFunction frozen{0.08157330427787661, 0.6207649634239147, 0.048615943103389445, 0.0};
    CHECK(approx_equal(rep.J_star, frozen, 1e-12));
    CHECK(approx_equal(rep.J_star_S, frozen, 1e-12));
}

TEST_CASE("property: J* is below every policy cost and J* <= J*_S") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const FiniteModel m = build_random_ssp({4, 3, -1, 1, 0.5, seed});
        const auto rep = brute_force_optima(m, make_region(m, RegionKind::AllReal));
        CHECK(leq(rep.J_star, rep.J_star_S));
        for (const PolicyRecord& r : rep.policies) CHECK(leq(rep.J_star, r.certification.cost.value));
        for (StateId x = 0; x < m.n_states(); ++x) {
            ExtReal best = inf;
            for (const PolicyRecord& r : rep.policies) best = ext_min(best, r.certification.cost.value[x]);
            CHECK(best == rep.J_star[x]);
        }
    }
}

TEST_CASE("certify_divergence on detsp") {
    const auto plus = certify_divergence(build_detsp({1, 5}), detsp::mu_prime(), CostFunction{0.0, 0.0});
    CHECK(plus.kind == DivergenceKind::DivergesPlus);
    CHECK(plus.plus_states == std::vector<StateId>{0});
    for (double j : {-3.0, 0.0, 8.0})
        CHECK(certify_divergence(build_detsp({0, 3}), detsp::mu_prime(), CostFunction{j, 0.0}).kind ==
              DivergenceKind::Bounded);
    const auto minus = certify_divergence(build_detsp({-1, 5}), detsp::mu_prime(), CostFunction{0.0, 0.0});
    CHECK(minus.kind == DivergenceKind::DivergesMinus);
    CHECK(minus.minus_states == std::vector<StateId>{0});
}

TEST_CASE("certify_divergence on a stochastic positive-cost improper policy") {
    const FiniteModel m({{Control{"spin", 1.0, {{0.5, 0}, {0.5, 1}}}}, {Control{"spin", 1.0, {{0.5, 0}, {0.5, 1}}}},
                         {Control{"stop", 0.0, {{1.0, 2}}}}},
                        1.0, CostFunction(3), {2});
    CHECK(certify_divergence(m, {{0, 0, 0}}, CostFunction(3)).kind == DivergenceKind::DivergesPlus);
}
