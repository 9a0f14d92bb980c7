#include "regdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace regdp {

namespace {
constexpr double kProbSumTol = 1e-12;

std::string coords(std::optional<StateId> x, std::optional<ControlId> u) {
    std::ostringstream s;
    if (x) {
        s << " [state " << *x;
        if (u) s << ", control " << *u;
        s << "]";
    }
    return s.str();
}
}  // namespace

ModelError::ModelError(const std::string& what, std::optional<StateId> x, std::optional<ControlId> u)
    : std::invalid_argument(what + coords(x, u)), state(x), control(u) {}

FiniteModel::FiniteModel(std::vector<std::vector<Control>> controls, double discount, CostFunction terminal,
                         std::vector<StateId> stop_set, std::vector<std::string> state_labels)
    : controls_(std::move(controls)),
      discount_(discount),
      terminal_(std::move(terminal)),
      stop_set_(std::move(stop_set)),
      labels_(std::move(state_labels)) {
    const std::size_t n = controls_.size();
    if (n == 0) throw ModelError("model has no states");
    if (labels_.empty()) {
        labels_.reserve(n);
        for (std::size_t x = 0; x < n; ++x) labels_.push_back(std::to_string(x));
    }
    if (labels_.size() != n) throw ModelError("state label count does not match state count");
    std::sort(stop_set_.begin(), stop_set_.end());
    stop_set_.erase(std::unique(stop_set_.begin(), stop_set_.end()), stop_set_.end());
    is_stop_.assign(n, false);
    for (StateId x : stop_set_) {
        if (x >= n) throw ModelError("stop-set state out of range", x);
        is_stop_[x] = true;
    }
    validate();
    for (const auto& us : controls_)
        for (const auto& c : us)
            if (c.transitions.size() != 1) deterministic_ = false;
}

void FiniteModel::validate() const {
    const std::size_t n = n_states();
    if (!(discount_ > 0.0 && discount_ <= 1.0)) throw ModelError("discount must lie in (0, 1]");
    if (terminal_.size() != n) throw ModelError("terminal function length does not match state count");
    for (StateId x = 0; x < n; ++x) {
        if (!terminal_[x].is_finite()) throw ModelError("terminal function must be finite", x);
        if (is_stop_[x] && terminal_[x] != ExtReal(0.0))
            throw ModelError("terminal function must vanish on the stop set", x);
        if (controls_[x].empty()) throw ModelError("empty control set", x);
        for (ControlId u = 0; u < controls_[x].size(); ++u) {
            const Control& c = controls_[x][u];
            if (!std::isfinite(c.cost)) throw ModelError("stage cost must be finite", x, u);
            if (c.transitions.empty()) throw ModelError("control has no transitions", x, u);
            double sum = 0.0;
            for (const Transition& t : c.transitions) {
                if (!(t.prob >= 0.0) || !std::isfinite(t.prob))
                    throw ModelError("negative or non-finite transition probability", x, u);
                if (t.next >= n) throw ModelError("successor state out of range", x, u);
                if (is_stop_[x] && t.prob > 0.0 && !is_stop_[t.next])
                    throw ModelError("stop-set state must be absorbing", x, u);
                sum += t.prob;
            }
            if (std::fabs(sum - 1.0) > kProbSumTol)
                throw ModelError("transition probabilities do not sum to 1", x, u);
            if (is_stop_[x] && c.cost != 0.0) throw ModelError("stop-set state must be cost-free", x, u);
        }
    }
}

const Control& FiniteModel::control(StateId x, ControlId u) const {
    if (x >= n_states()) throw ModelError("state out of range", x);
    if (u >= controls_[x].size()) throw ModelError("illegal control", x, u);
    return controls_[x][u];
}

std::uint64_t FiniteModel::policy_count() const noexcept {
    std::uint64_t count = 1;
    for (const auto& us : controls_) {
        const std::uint64_t k = us.size();
        if (count > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
        count *= k;
    }
    return count;
}

FiniteModel FiniteModel::perturbed(double delta) const {
    auto controls = controls_;
    for (StateId x = 0; x < controls.size(); ++x) {
        if (is_stop_[x]) continue;
        for (auto& c : controls[x]) c.cost += delta;
    }
    return FiniteModel(std::move(controls), discount_, terminal_, stop_set_, labels_);
}

std::string to_string(const StationaryPolicy& mu) {
    std::string s;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(mu[i]);
    }
    return s;
}

void check_policy(const FiniteModel& model, const StationaryPolicy& mu) {
    if (mu.size() != model.n_states()) throw ModelError("policy length does not match state count");
    for (StateId x = 0; x < mu.size(); ++x)
        if (mu[x] >= model.n_controls(x)) throw ModelError("policy selects an illegal control", x, mu[x]);
}

StationaryPolicy first_control_policy(const FiniteModel& model) {
    return StationaryPolicy{std::vector<ControlId>(model.n_states(), 0)};
}

AffineMap policy_affine_map(const FiniteModel& model, const StationaryPolicy& mu) {
    check_policy(model, mu);
    const std::size_t n = model.n_states();
    AffineMap m{std::vector<double>(n, 0.0), Matrix(n, n)};
    for (StateId x = 0; x < n; ++x) {
        const Control& c = model.control(x, mu[x]);
        m.offset[x] = c.cost;
        for (const Transition& t : c.transitions) m.linear(x, t.next) += model.discount() * t.prob;
    }
    return m;
}

ExtReal apply_H(const FiniteModel& model, StateId x, ControlId u, const CostFunction& J) {
    if (J.size() != model.n_states()) throw std::invalid_argument("apply_H: cost function length mismatch");
    const Control& c = model.control(x, u);
    ExtReal expect = 0.0;
    for (const Transition& t : c.transitions) expect = ext_add(expect, ext_scale(t.prob, J[t.next]));
    return ext_add(c.cost, ext_scale(model.discount(), expect));
}

BellmanResult apply_T(const FiniteModel& model, const CostFunction& J) {
    const std::size_t n = model.n_states();
    BellmanResult out{CostFunction(n), first_control_policy(model)};
    for (StateId x = 0; x < n; ++x) {
        ExtReal best = apply_H(model, x, 0, J);
        for (ControlId u = 1; u < model.n_controls(x); ++u) {
            const ExtReal h = apply_H(model, x, u, J);
            if (h < best) {
                best = h;
                out.greedy[x] = u;
            }
        }
        out.values[x] = best;
    }
    return out;
}

CostFunction apply_Tmu(const FiniteModel& model, const StationaryPolicy& mu, const CostFunction& J) {
    check_policy(model, mu);
    CostFunction out(model.n_states());
    for (StateId x = 0; x < model.n_states(); ++x) out[x] = apply_H(model, x, mu[x], J);
    return out;
}

CostFunction compose_prefix(const FiniteModel& model, std::span<const StationaryPolicy> policies,
                            const CostFunction& J) {
    CostFunction out = J;
    for (auto it = policies.rbegin(); it != policies.rend(); ++it) out = apply_Tmu(model, *it, out);
    return out;
}

std::vector<ControlId> argmin_controls(const FiniteModel& model, StateId x, const CostFunction& J,
                                       double tie_tol) {
    const std::size_t k = model.n_controls(x);
    std::vector<ExtReal> h(k);
    ExtReal best = ExtReal::pos_inf();
    for (ControlId u = 0; u < k; ++u) {
        h[u] = apply_H(model, x, u, J);
        best = ext_min(best, h[u]);
    }
    std::vector<ControlId> out;
    for (ControlId u = 0; u < k; ++u)
        if (approx_equal(h[u], best, tie_tol)) out.push_back(u);
    return out;
}

ControlId select_control(const std::vector<ControlId>& minimizers, ControlId current, TieBreakRule rule) {
    if (minimizers.empty()) throw std::invalid_argument("select_control: no minimizers");
    const bool current_tied = std::find(minimizers.begin(), minimizers.end(), current) != minimizers.end();
    switch (rule) {
        case TieBreakRule::KeepCurrentIfTied:
            return current_tied ? current : minimizers.front();
        case TieBreakRule::LowestControlId:
            return minimizers.front();
        case TieBreakRule::AlwaysSwitchIfTied:
            for (ControlId u : minimizers)
                if (u != current) return u;
            return current;
    }
    return minimizers.front();
}

StationaryPolicy improve_policy(const FiniteModel& model, const CostFunction& J, const StationaryPolicy& current,
                                TieBreakRule rule, double tie_tol) {
    StationaryPolicy next = current;
    for (StateId x = 0; x < model.n_states(); ++x)
        next[x] = select_control(argmin_controls(model, x, J, tie_tol), current[x], rule);
    return next;
}

std::string to_string(LimitStatus s) {
    switch (s) {
        case LimitStatus::Settled: return "settled";
        case LimitStatus::PlusInfinity: return "+inf";
        case LimitStatus::MinusInfinity: return "-inf";
        case LimitStatus::Oscillating: return "oscillating";
        case LimitStatus::Uncertified: return "uncertified";
    }
    return "?";
}

bool PolicyCost::all_certified() const {
    return std::none_of(status.begin(), status.end(), [](LimitStatus s) { return s == LimitStatus::Uncertified; });
}

}  // namespace regdp
