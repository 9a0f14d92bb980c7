#include <algorithm>
#include <cmath>
#include <deque>

#include "regdp/model.hpp"

namespace regdp {

namespace {

bool all_deterministic(const FiniteModel& model, std::span<const StationaryPolicy> prefix,
                       const StationaryPolicy& tail) {
    if (model.is_deterministic()) return true;
    auto det = [&](const StationaryPolicy& mu) {
        for (StateId x = 0; x < model.n_states(); ++x)
            if (model.control(x, mu[x]).transitions.size() != 1) return false;
        return true;
    };
    return det(tail) && std::all_of(prefix.begin(), prefix.end(), det);
}

StateId successor(const FiniteModel& model, const StationaryPolicy& mu, StateId x) {
    return model.control(x, mu[x]).transitions.front().next;
}

// Exact limsup for undiscounted deterministic dynamics: every trajectory ends
// in a cycle, and the cycle's total cost decides the limit.
PolicyCost deterministic_limsup(const FiniteModel& model, std::span<const StationaryPolicy> prefix,
                                const StationaryPolicy& tail, const CostFunction& start) {
    const std::size_t n = model.n_states();
    PolicyCost tail_cost{CostFunction(n), std::vector<LimitStatus>(n, LimitStatus::Settled)};
    std::vector<long> pos(n);
    for (StateId x0 = 0; x0 < n; ++x0) {
        std::fill(pos.begin(), pos.end(), -1);
        std::vector<StateId> path;
        std::vector<double> partial{0.0};
        StateId x = x0;
        while (pos[x] < 0) {
            pos[x] = static_cast<long>(path.size());
            path.push_back(x);
            partial.push_back(partial.back() + model.control(x, tail[x]).cost);
            x = successor(model, tail, x);
        }
        const std::size_t s = static_cast<std::size_t>(pos[x]);
        const std::size_t len = path.size();
        const double cycle_cost = partial[len] - partial[s];
        double scale = 0.0;
        for (std::size_t i = s; i < len; ++i) scale += std::fabs(model.control(path[i], tail[path[i]]).cost);
        const double zero_tol = 1e-12 * std::max(1.0, scale);
        if (cycle_cost > zero_tol) {
            tail_cost.value[x0] = ExtReal::pos_inf();
            tail_cost.status[x0] = LimitStatus::PlusInfinity;
        } else if (cycle_cost < -zero_tol) {
            tail_cost.value[x0] = ExtReal::neg_inf();
            tail_cost.status[x0] = LimitStatus::MinusInfinity;
        } else {
            double hi = -INFINITY, lo = INFINITY;
            for (std::size_t i = s; i < len; ++i) {
                const double v = partial[i] + start[path[i]].value();
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
            tail_cost.value[x0] = hi;
            if (hi - lo > 1e-12 * std::max(1.0, std::fabs(hi))) tail_cost.status[x0] = LimitStatus::Oscillating;
        }
    }
    if (prefix.empty()) return tail_cost;

    PolicyCost out{compose_prefix(model, prefix, tail_cost.value), std::vector<LimitStatus>(n)};
    for (StateId x0 = 0; x0 < n; ++x0) {
        StateId x = x0;
        for (const auto& mu : prefix) x = successor(model, mu, x);
        out.status[x0] = tail_cost.status[x];
    }
    return out;
}

double window_spread(const std::deque<CostFunction>& window, StateId x, bool& infinite_mismatch) {
    double lo = INFINITY, hi = -INFINITY;
    infinite_mismatch = false;
    const ExtReal first = window.front()[x];
    for (const auto& J : window) {
        const ExtReal v = J[x];
        if (!v.is_finite() || !first.is_finite()) {
            if (v != first) infinite_mismatch = true;
            continue;
        }
        lo = std::min(lo, v.value());
        hi = std::max(hi, v.value());
    }
    return first.is_finite() ? hi - lo : 0.0;
}

bool state_settled(const std::deque<CostFunction>& window, StateId x, double tol) {
    bool mismatch = false;
    const double spread = window_spread(window, x, mismatch);
    if (mismatch) return false;
    const ExtReal last = window.back()[x];
    const double scale = last.is_finite() ? std::max(1.0, std::fabs(last.value())) : 1.0;
    return spread <= tol * scale;
}

// Repeated squaring of T_tail. With alpha = 1 the linear part is row
// stochastic, and renormalizing rows after each squaring keeps the row sums
// from drifting by a factor 2 per step.
AffineMap square(const AffineMap& m, bool stochastic) {
    AffineMap sq = m.compose(m);
    if (stochastic) {
        for (std::size_t i = 0; i < sq.size(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < sq.size(); ++j) sum += sq.linear(i, j);
            if (sum > 0.0)
                for (std::size_t j = 0; j < sq.size(); ++j) sq.linear(i, j) /= sum;
        }
    }
    return sq;
}

// Sign of a certified linear drift at x. The iterates at horizons 2^j grow like
// r 2^j plus a bounded part, so a nonzero rate r shows as increments that keep
// doubling; a bounded sequence cannot double its increment many times running.
int linear_drift(const std::vector<CostFunction>& at_doubling, StateId x) {
    constexpr std::size_t kRuns = 6;
    const std::size_t m = at_doubling.size();
    if (m < kRuns + 2) return 0;
    int sign = 0;
    double prev = 0.0;
    for (std::size_t j = m - kRuns - 1; j < m; ++j) {
        const ExtReal a = at_doubling[j - 1][x], b = at_doubling[j][x];
        if (!a.is_finite() || !b.is_finite()) return 0;
        const double d = b.value() - a.value();
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) return 0;
        if (sign != 0) {
            const double ratio = d / prev;
            if (ratio < 1.9 || ratio > 2.1) return 0;
        }
        sign = s;
        prev = d;
    }
    return sign;
}

// Increments of one sign that never fall below half the first one.
bool steady_drift(const std::deque<CostFunction>& window, StateId x) {
    const ExtReal a = window[0][x], b = window[1][x];
    if (!a.is_finite() || !b.is_finite()) return false;
    const double first = b.value() - a.value();
    if (first == 0.0) return false;
    for (std::size_t i = 2; i < window.size(); ++i) {
        const ExtReal p = window[i - 1][x], c = window[i][x];
        if (!p.is_finite() || !c.is_finite()) return false;
        const double d = c.value() - p.value();
        if (d * first <= 0.0 || std::fabs(d) < 0.5 * std::fabs(first)) return false;
    }
    return true;
}

}  // namespace

PolicyCost limsup_iterates(const FiniteModel& model, std::span<const StationaryPolicy> prefix,
                           const StationaryPolicy& tail, const CostFunction& start, const LimsupOptions& opts) {
    const std::size_t n = model.n_states();
    check_policy(model, tail);
    for (const auto& mu : prefix) check_policy(model, mu);
    if (start.size() != n) throw std::invalid_argument("limsup_iterates: start length mismatch");
    if (opts.window < 2) throw std::invalid_argument("limsup_iterates: window must be at least 2");

    if (model.discount() == 1.0 && start.all_finite() && all_deterministic(model, prefix, tail))
        return deterministic_limsup(model, prefix, tail, start);

    PolicyCost out{CostFunction(n), std::vector<LimitStatus>(n, LimitStatus::Uncertified)};

    // Sequential phase.
    std::deque<CostFunction> window;
    CostFunction J = start;
    window.push_back(compose_prefix(model, prefix, J));
    std::vector<bool> settled(n, false);
    for (std::size_t k = 1; k <= opts.horizon_cap; ++k) {
        J = apply_Tmu(model, tail, J);
        window.push_back(compose_prefix(model, prefix, J));
        if (window.size() > opts.window) window.pop_front();
        if (window.size() < opts.window) continue;
        bool all = true, drifting = k >= 4 * opts.window;
        for (StateId x = 0; x < n; ++x) {
            if (state_settled(window, x, opts.settle_tol)) continue;
            all = false;
            if (drifting) drifting = steady_drift(window, x);
            if (!drifting) break;
        }
        if (all || drifting) break;
    }
    for (StateId x = 0; x < n; ++x) {
        if (window.size() == opts.window && state_settled(window, x, opts.settle_tol)) {
            settled[x] = true;
            out.value[x] = window.back()[x];
            out.status[x] = LimitStatus::Settled;
        }
    }
    if (std::all_of(settled.begin(), settled.end(), [](bool b) { return b; })) return out;

    // Doubling phase: horizons 2^0, 2^1, ..., 2^max_doublings.
    const bool stochastic = model.discount() == 1.0;
    AffineMap power = policy_affine_map(model, tail);
    std::vector<CostFunction> at_doubling;
    at_doubling.reserve(opts.max_doublings + 1);
    for (unsigned j = 0; j <= opts.max_doublings; ++j) {
        at_doubling.push_back(compose_prefix(model, prefix, power.apply(start)));
        if (j < opts.max_doublings) power = square(power, stochastic);
    }
    // `power` now holds the last horizon; walk a sequential window from there.
    std::deque<CostFunction> late;
    J = power.apply(start);
    for (std::size_t i = 0; i < opts.window; ++i) {
        late.push_back(compose_prefix(model, prefix, J));
        J = apply_Tmu(model, tail, J);
    }

    const std::size_t m = at_doubling.size();
    const std::size_t w = std::min<std::size_t>(opts.window, m);
    for (StateId x = 0; x < n; ++x) {
        if (settled[x]) continue;
        bool increasing = true, decreasing = true;
        for (std::size_t j = m - w + 1; j < m; ++j) {
            const ExtReal prev = at_doubling[j - 1][x], cur = at_doubling[j][x];
            if (!(prev < cur)) increasing = false;
            if (!(cur < prev)) decreasing = false;
        }
        const ExtReal last = at_doubling.back()[x];
        const int drift = linear_drift(at_doubling, x);
        if (last.is_pos_inf() || drift > 0 || (increasing && last > ExtReal(opts.blowup_bound))) {
            out.value[x] = ExtReal::pos_inf();
            out.status[x] = LimitStatus::PlusInfinity;
            continue;
        }
        if (last.is_neg_inf() || drift < 0 || (decreasing && last < ExtReal(-opts.blowup_bound))) {
            out.value[x] = ExtReal::neg_inf();
            out.status[x] = LimitStatus::MinusInfinity;
            continue;
        }
        bool bounded = true;
        ExtReal hi = ExtReal::neg_inf();
        for (const auto& v : late) {
            if (!v[x].is_finite() || std::fabs(v[x].value()) > opts.blowup_bound) bounded = false;
            hi = ext_max(hi, v[x]);
        }
        if (bounded) {
            if (state_settled(late, x, 1e-9)) {
                out.value[x] = late.back()[x];
                out.status[x] = LimitStatus::Settled;
            } else {
                out.value[x] = hi;
                out.status[x] = LimitStatus::Oscillating;
            }
        } else {
            out.value[x] = late.back()[x];
            out.status[x] = LimitStatus::Uncertified;
        }
    }
    return out;
}

PolicyCost policy_cost(const FiniteModel& model, const EventuallyStationaryPolicy& pi, const LimsupOptions& opts) {
    if (opts.horizon_cap < 1) throw std::invalid_argument("policy_cost: horizon_cap must be >= 1");
    if (!(opts.blowup_bound > 0.0)) throw std::invalid_argument("policy_cost: blowup_bound must be positive");
    return limsup_iterates(model, pi.prefix, pi.tail, model.terminal(), opts);
}

}  // namespace regdp
