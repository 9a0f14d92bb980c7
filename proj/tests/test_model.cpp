#include <doctest.h>

#include "regdp/model.hpp"
#include "regdp/models.hpp"
#include "regdp/random.hpp"

using namespace regdp;

namespace {
const ExtReal inf = ExtReal::pos_inf();

// H(x, u, J) computed directly from the transition list.
double hand_H(const FiniteModel& m, StateId x, ControlId u, const CostFunction& J) {
    const Control& c = m.control(x, u);
    double s = 0;
    for (const Transition& t : c.transitions) s += t.prob * J[t.next].value();
    return c.cost + m.discount() * s;
}
}  // namespace

TEST_CASE("FiniteModel rejects malformed input") {
    auto stay = [](double cost) { return Control{"stay", cost, {{1.0, 0}}}; };
    CHECK_THROWS_AS(FiniteModel({}, 1.0, CostFunction{}), ModelError);
    CHECK_THROWS_AS(FiniteModel({{stay(0)}}, 1.5, CostFunction(1)), ModelError);
    CHECK_THROWS_AS(FiniteModel({{Control{"x", 0, {{0.5, 0}}}}}, 1.0, CostFunction(1)), ModelError);
    CHECK_THROWS_AS(FiniteModel({{stay(1)}}, 1.0, CostFunction(1), {0}), ModelError);
    CHECK_THROWS_AS(FiniteModel({{}}, 1.0, CostFunction(1)), ModelError);
    CHECK_THROWS_AS(FiniteModel({{stay(0)}}, 1.0, CostFunction{inf}), ModelError);
    try {
        FiniteModel({{stay(0)}, {Control{"bad", 0, {{1.0, 7}}}}}, 1.0, CostFunction(2));
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(e.state == std::optional<StateId>(1));
        CHECK(e.control == std::optional<ControlId>(0));
    }
}

TEST_CASE("apply_H on the deterministic shortest path") {
    const FiniteModel m = build_detsp({1, 5});
    CHECK(apply_H(m, detsp::kState1, detsp::kSelf, CostFunction{0.0, 0.0}) == ExtReal(1.0));
    CHECK(apply_H(m, detsp::kState1, detsp::kToTerminal, CostFunction{17.0, 0.0}) == ExtReal(5.0));
    CHECK(apply_H(m, detsp::kState1, detsp::kSelf, CostFunction{inf, 0.0}).is_pos_inf());
}

TEST_CASE("apply_H equals the hand expectation on a random discounted model") {
    const FiniteModel m = build_discounted(3, 2, 0.9, 7);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        CostFunction J(3);
        for (auto& v : J) v = rng.uniform(-10, 10);
        for (StateId x = 0; x < 3; ++x)
            for (ControlId u = 0; u < 2; ++u)
                CHECK(apply_H(m, x, u, J).value() == doctest::Approx(hand_H(m, x, u, J)).epsilon(1e-12));
    }
}

TEST_CASE("apply_T on detsp is min(b, a + J(1))") {
    for (auto [a, b] : {std::pair{1.0, 5.0}, {0.0, 3.0}, {0.0, -2.0}, {-1.0, 5.0}}) {
        const FiniteModel m = build_detsp({a, b});
        for (double j : {-4.0, 0.0, 2.5, 7.0}) {
            const auto r = apply_T(m, CostFunction{j, 0.0});
            CHECK(r.values[0] == ExtReal(std::min(b, a + j)));
            CHECK(r.values[1] == ExtReal(0.0));
        }
    }
    CHECK(apply_T(build_detsp({0, 3}), CostFunction{3.0, 0.0}).values[0] == ExtReal(3.0));
}

TEST_CASE("apply_T at the terminal function equals the one-stage optimum") {
    const FiniteModel m = build_random_ssp({5, 3, 0, 1, 1.0, 9});
    const auto r = apply_T(m, m.terminal());
    for (StateId x = 0; x < m.n_states(); ++x) {
        double best = 1e300;
        for (const Control& c : m.controls(x)) best = std::min(best, c.cost);
        CHECK(r.values[x].value() == doctest::Approx(best));
        CHECK(m.control(x, r.greedy[x]).cost == best);
    }
}

TEST_CASE("apply_Tmu and compose_prefix") {
    const FiniteModel m = build_detsp({1, 5});
    CHECK(apply_Tmu(m, detsp::mu_prime(), CostFunction{0.0, 0.0})[0] == ExtReal(1.0));
    CHECK(apply_Tmu(m, detsp::mu(), CostFunction{-40.0, 0.0})[0] == ExtReal(5.0));
    const CostFunction J{2.0, 0.0};
    CHECK(compose_prefix(m, {}, J) == J);
    const std::vector<StationaryPolicy> one{detsp::mu_prime()};
    CHECK(compose_prefix(m, one, J) == apply_Tmu(m, detsp::mu_prime(), J));
    const std::vector<StationaryPolicy> three(3, detsp::mu_prime());
    CHECK(compose_prefix(m, three, CostFunction{0.0, 0.0})[0] == ExtReal(3.0));
}

TEST_CASE("infinite costs propagate under T_mu") {
    const FiniteModel m = build_random_ssp({4, 2, 0, 1, 1.0, 3});
    CostFunction J(4, inf);
    J[3] = 0.0;
    const StationaryPolicy mu = first_control_policy(m);
    const CostFunction out = apply_Tmu(m, mu, J);
    for (StateId x = 0; x < 3; ++x) {
        bool leaves_to_nonstop = false;
        for (const Transition& t : m.control(x, mu[x]).transitions)
            leaves_to_nonstop |= t.prob > 0 && t.next != 3;
        if (leaves_to_nonstop) CHECK(out[x].is_pos_inf());
    }
}

TEST_CASE("tie-break rules") {
    CHECK(select_control({0, 2}, 2, TieBreakRule::KeepCurrentIfTied) == 2);
    CHECK(select_control({0, 2}, 1, TieBreakRule::KeepCurrentIfTied) == 0);
    CHECK(select_control({0, 2}, 2, TieBreakRule::LowestControlId) == 0);
    CHECK(select_control({0, 2}, 0, TieBreakRule::AlwaysSwitchIfTied) == 2);
    CHECK(select_control({0, 2}, 2, TieBreakRule::AlwaysSwitchIfTied) == 0);
    CHECK(select_control({1}, 1, TieBreakRule::AlwaysSwitchIfTied) == 1);
    CHECK_THROWS_AS(select_control({}, 0, TieBreakRule::LowestControlId), std::invalid_argument);

    const FiniteModel m = build_detsp({0, -2});
    const CostFunction J{-2.0, 0.0};
    CHECK(argmin_controls(m, 0, J, 1e-9).size() == 2);
    CHECK(improve_policy(m, J, detsp::mu(), TieBreakRule::AlwaysSwitchIfTied, 1e-9) == detsp::mu_prime());
    CHECK(improve_policy(m, J, detsp::mu(), TieBreakRule::KeepCurrentIfTied, 1e-9) == detsp::mu());
}

TEST_CASE("policy_cost of stationary policies on detsp") {
    CHECK(policy_cost(build_detsp({1, 5}), EventuallyStationaryPolicy::stationary(detsp::mu_prime())).value[0]
              .is_pos_inf());
    CHECK(policy_cost(build_detsp({0, 3}), EventuallyStationaryPolicy::stationary(detsp::mu_prime())).value[0] ==
          ExtReal(0.0));
    CHECK(policy_cost(build_detsp({0, 3}), EventuallyStationaryPolicy::stationary(detsp::mu())).value[0] ==
          ExtReal(3.0));
    const PolicyCost neg = policy_cost(build_detsp({-1, 5}), EventuallyStationaryPolicy::stationary(detsp::mu_prime()));
    CHECK(neg.value[0].is_neg_inf());
    CHECK(neg.status[0] == LimitStatus::MinusInfinity);
}

TEST_CASE("policy_cost of an eventually stationary policy") {
    const FiniteModel m = build_detsp({1, 5});
    EventuallyStationaryPolicy pi{{detsp::mu_prime(), detsp::mu_prime()}, detsp::mu()};
    CHECK(policy_cost(m, pi).value[0] == ExtReal(7.0));
}

TEST_CASE("policy_cost on a discounted model matches the geometric series") {
    const FiniteModel m({{Control{"loop", 1.0, {{1.0, 0}}}}}, 0.5, CostFunction(1));
    const PolicyCost c = policy_cost(m, EventuallyStationaryPolicy::stationary({{0}}));
    CHECK(c.value[0].value() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.all_certified());
}

TEST_CASE("perturbed adds delta off the stop set only") {
    const FiniteModel m = build_detsp({0, 3}).perturbed(0.25);
    CHECK(m.control(0, 0).cost == 0.25);
    CHECK(m.control(0, 1).cost == 3.25);
    CHECK(m.control(1, 0).cost == 0.0);
}
