#include <doctest.h>

#include <deque>
#include <limits>

#include "regdp/models.hpp"
#include "regdp/oracle.hpp"
#include "regdp/random.hpp"
#include "regdp/regularity.hpp"
#include "regdp/solvers.hpp"

using namespace regdp;

namespace {
// Hop distances to cell 0 on the line by breadth-first search.
std::vector<double> bfs_distance(std::size_t n) {
    std::vector<double> d(n, -1);
    std::deque<std::size_t> q{0};
    d[0] = 0;
    while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop_front();
        for (std::size_t nb : {c + 1, c - 1})
            if (nb < n && d[nb] < 0) {
                d[nb] = d[c] + 1;
                q.push_back(nb);
            }
    }
    return d;
}

void check_invariants(const FiniteModel& m) {
    for (StateId x = 0; x < m.n_states(); ++x)
        for (const Control& c : m.controls(x)) {
            double s = 0;
            for (const Transition& t : c.transitions) s += t.prob;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            if (m.has_stop_set() && m.is_stop(x)) {
                CHECK(c.cost == 0.0);
                for (const Transition& t : c.transitions) CHECK(m.is_stop(t.next));
            }
        }
}
}  // namespace

TEST_CASE("detsp builder") {
    const FiniteModel zero = build_detsp({0, 3});
    CHECK(zero.n_states() == 2);
    CHECK(zero.stop_set() == std::vector<StateId>{detsp::kTerminal});
    for (double j : {-1.0, 2.0, 3.0, 9.0}) CHECK(apply_T(zero, {j, 0.0}).values[0] == ExtReal(std::min(3.0, j)));
    CHECK(fixed_point_scan(build_detsp({1, 5}), {{0, 4.5, 5, 5.5}, {0}}).size() == 1);
    const FiniteModel neg = build_detsp({-1, 5});
    CHECK(policy_cost(neg, EventuallyStationaryPolicy::stationary(detsp::mu_prime())).value[0].is_neg_inf());
    CHECK_THROWS_AS(build_detsp({std::numeric_limits<double>::infinity(), 0}), ModelError);
}

TEST_CASE("grid builder with unit move costs") {
    GridControlParams p;
    p.n = 4;
    p.stay_cost = 0.0;
    const FiniteModel m = build_grid_control(p);
    check_invariants(m);
    const SRegion z = make_region(m, RegionKind::ZeroOnStopSet);
    const auto rep = brute_force_optima(m, z);
    // Staying forever costs nothing, so J* = 0; the terminating optimum is the distance.
    CHECK(rep.J_star == CostFunction(4, 0.0));
    CHECK(rep.J_star_S == CostFunction{0.0, 1.0, 2.0, 3.0});
    const CostFunction left = exact_policy_cost(m, grid_always_left(p));
    CHECK(left == CostFunction{0.0, 1.0, 2.0, 3.0});
}

TEST_CASE("grid with positive costs matches breadth-first distances") {
    for (std::size_t n : {2u, 5u, 10u}) {
        GridControlParams p;
        p.n = n;
        const FiniteModel m = build_grid_control(p);
        const auto d = bfs_distance(n);
        const SolveTrace vi = value_iteration(m, CostFunction(n, 0.0));
        REQUIRE(vi.outcome == Outcome::Converged);
        for (StateId x = 0; x < n; ++x) CHECK(vi.final_value[x] == ExtReal(d[x]));
        const auto rep = brute_force_optima(m, make_region(m, RegionKind::ZeroOnStopSet));
        CHECK(rep.J_star == vi.final_value);
    }
}

TEST_CASE("grid with zero interior costs and a terminal reward") {
    GridControlParams p;
    p.n = 4;
    p.left_cost = p.right_cost = p.stay_cost = 0.0;
    p.overrides.push_back({1, GridMove::Left, -5.0});
    const FiniteModel m = build_grid_control(p);
    const auto rep = brute_force_optima(m, make_region(m, RegionKind::ZeroOnStopSet));
    CHECK(rep.J_star == CostFunction{0.0, -5.0, -5.0, -5.0});
    CHECK(rep.J_star_S == CostFunction{0.0, -5.0, -5.0, -5.0});
    CHECK(grid_control_id(p, 1, GridMove::Left) == 0);
    CHECK_THROWS_AS(grid_control_id(p, 3, GridMove::Right), ModelError);
    GridControlParams bad = p;
    bad.overrides = {{0, GridMove::Left, 1.0}};
    CHECK_THROWS_AS(build_grid_control(bad), ModelError);
}

TEST_CASE("random SSP builder") {
    const FiniteModel proper = build_random_ssp({3, 2, 0, 1, 1.0, 7});
    check_invariants(proper);
    for (const StationaryPolicy& mu : PolicyEnumeration(proper)) CHECK(classify_proper(proper, mu));
    const FiniteModel loose = build_random_ssp({3, 2, 0, 1, 0.0, 7});
    bool improper = false;
    for (const StationaryPolicy& mu : PolicyEnumeration(loose)) improper |= !classify_proper(loose, mu);
    CHECK(improper);
    CHECK(build_random_ssp({3, 2, 0, 1, 1.0, 7}) == proper);
    CHECK_FALSE(build_random_ssp({3, 2, 0, 1, 1.0, 8}) == proper);
    CHECK_THROWS_AS(build_random_ssp({3, 2, 0, 1, 1.5, 7}), ModelError);
    CHECK_THROWS_AS(build_random_ssp({1, 2, 0, 1, 1.0, 7}), ModelError);
}

TEST_CASE("attractor policy is proper whenever some proper policy exists") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const FiniteModel m = build_random_ssp({5, 2, 0, 1, 0.5, seed});
        bool exists = false;
        for (const StationaryPolicy& mu : PolicyEnumeration(m)) exists |= classify_proper(m, mu);
        const auto a = attractor_proper_policy(m);
        CHECK(a.has_value() == exists);
        if (a) CHECK(classify_proper(m, *a));
    }
}

TEST_CASE("nonnegative builder") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FiniteModel m = build_nonneg_mdp(4, 3, seed);
        check_invariants(m);
        for (StateId x = 0; x < m.n_states(); ++x)
            for (const Control& c : m.controls(x)) CHECK(c.cost >= 0.0);
    }
}

TEST_CASE("discounted builder is a contraction with the oracle fixed point") {
    const FiniteModel m = build_discounted(4, 3, 0.9, 2);
    check_invariants(m);
    CHECK_FALSE(m.has_stop_set());
    Rng rng(17);
    double modulus = 0;
    for (int i = 0; i < 500; ++i) {
        CostFunction a(4), b(4);
        for (StateId x = 0; x < 4; ++x) {
            a[x] = rng.uniform(-10, 10);
            b[x] = rng.uniform(-10, 10);
        }
        const double num = sup_distance(apply_T(m, a).values, apply_T(m, b).values).value();
        modulus = std::max(modulus, num / sup_distance(a, b).value());
    }
    CHECK(modulus <= 0.9 + 1e-12);
    const CostFunction J_star = brute_force_optima(m, make_region(m, RegionKind::AllReal)).J_star;
    CHECK(sup_distance(apply_T(m, J_star).values, J_star) <= ExtReal(1e-9));
    CHECK_THROWS_AS(build_discounted(3, 2, 1.0, 1), ModelError);
}
