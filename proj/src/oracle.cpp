#include "regdp/oracle.hpp"

#include <algorithm>

namespace regdp {

PolicyEnumeration::PolicyEnumeration(const FiniteModel& model, std::uint64_t limit)
    : model_(&model), count_(model.policy_count()) {
    if (count_ > limit) {
        throw EnumerationLimitError("policy enumeration of " + std::to_string(count_) +
                                    " policies exceeds the limit of " + std::to_string(limit));
    }
}

PolicyEnumeration::iterator::iterator(const FiniteModel* model, std::uint64_t index)
    : model_(model), index_(index) {
    if (model_) current_ = first_control_policy(*model_);
}

PolicyEnumeration::iterator& PolicyEnumeration::iterator::operator++() {
    ++index_;
    for (StateId x = 0; x < current_.size(); ++x) {
        if (++current_[x] < model_->n_controls(x)) break;
        current_[x] = 0;
    }
    return *this;
}

bool classify_proper(const FiniteModel& model, const StationaryPolicy& mu) {
    if (!model.has_stop_set()) throw ModelError("properness is defined only for models with a stop set");
    check_policy(model, mu);
    const std::size_t n = model.n_states();
    // Backward reachability to the stop set over positive-probability edges.
    std::vector<std::vector<StateId>> preds(n);
    for (StateId x = 0; x < n; ++x)
        for (const Transition& t : model.control(x, mu[x]).transitions)
            if (t.prob > 0.0) preds[t.next].push_back(x);
    std::vector<bool> reaches(n, false);
    std::vector<StateId> stack(model.stop_set().begin(), model.stop_set().end());
    for (StateId s : stack) reaches[s] = true;
    while (!stack.empty()) {
        const StateId y = stack.back();
        stack.pop_back();
        for (StateId x : preds[y]) {
            if (!reaches[x]) {
                reaches[x] = true;
                stack.push_back(x);
            }
        }
    }
    return std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });
}

CostFunction exact_policy_cost(const FiniteModel& model, const StationaryPolicy& mu) {
    check_policy(model, mu);
    const std::size_t n = model.n_states();
    const double alpha = model.discount();
    if (alpha == 1.0 && (!model.has_stop_set() || !classify_proper(model, mu)))
        throw SingularSystemError("policy " + to_string(mu) + " is improper; (I - P_mu) is singular");

    std::vector<StateId> free_states;
    std::vector<long> index(n, -1);
    for (StateId x = 0; x < n; ++x) {
        if (model.has_stop_set() && model.is_stop(x)) continue;
        index[x] = static_cast<long>(free_states.size());
        free_states.push_back(x);
    }
    const std::size_t m = free_states.size();
    Matrix a = Matrix::identity(m);
    std::vector<double> b(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Control& c = model.control(free_states[i], mu[free_states[i]]);
        b[i] = c.cost;
        for (const Transition& t : c.transitions)
            if (index[t.next] >= 0) a(i, static_cast<std::size_t>(index[t.next])) -= alpha * t.prob;
    }
    const std::vector<double> sol = solve_linear(std::move(a), std::move(b));
    CostFunction J(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) J[free_states[i]] = sol[i];
    return J;
}

PolicyEvaluation evaluate_policy(const FiniteModel& model, const StationaryPolicy& mu, const LimsupOptions& opts) {
    PolicyEvaluation out;
    if (model.has_stop_set()) out.proper = classify_proper(model, mu);
    if (model.discount() < 1.0 || out.proper.value_or(false)) {
        out.value = exact_policy_cost(model, mu);
        out.status.assign(model.n_states(), LimitStatus::Settled);
        out.exact = true;
        return out;
    }
    PolicyCost pc = policy_cost(model, EventuallyStationaryPolicy::stationary(mu), opts);
    out.value = std::move(pc.value);
    out.status = std::move(pc.status);
    return out;
}

std::string to_string(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::DivergesPlus: return "diverges_plus";
        case DivergenceKind::DivergesMinus: return "diverges_minus";
        case DivergenceKind::Bounded: return "bounded";
        case DivergenceKind::Unknown: return "unknown";
    }
    return "?";
}

DivergenceVerdict certify_divergence(const FiniteModel& model, const StationaryPolicy& mu, const CostFunction& J,
                                     const LimsupOptions& opts) {
    const PolicyCost pc = limsup_iterates(model, {}, mu, J, opts);
    DivergenceVerdict v;
    bool uncertified = false;
    for (StateId x = 0; x < model.n_states(); ++x) {
        switch (pc.status[x]) {
            case LimitStatus::PlusInfinity: v.plus_states.push_back(x); break;
            case LimitStatus::MinusInfinity: v.minus_states.push_back(x); break;
            case LimitStatus::Uncertified: uncertified = true; break;
            default: break;
        }
    }
    if (!v.plus_states.empty())
        v.kind = DivergenceKind::DivergesPlus;
    else if (!v.minus_states.empty())
        v.kind = DivergenceKind::DivergesMinus;
    else
        v.kind = uncertified ? DivergenceKind::Unknown : DivergenceKind::Bounded;
    return v;
}

}  // namespace regdp
