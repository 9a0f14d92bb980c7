#include <algorithm>
#include <cmath>

#include "regdp/models.hpp"
#include "regdp/random.hpp"

namespace regdp {

FiniteModel build_detsp(const DetSpParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw ModelError("detsp costs must be finite");
    std::vector<std::vector<Control>> controls(2);
    controls[detsp::kState1] = {
        Control{"self", p.a, {{1.0, detsp::kState1}}},
        Control{"to-t", p.b, {{1.0, detsp::kTerminal}}},
    };
    controls[detsp::kTerminal] = {Control{"stay", 0.0, {{1.0, detsp::kTerminal}}}};
    return FiniteModel(std::move(controls), 1.0, CostFunction(2, 0.0), {detsp::kTerminal}, {"1", "t"});
}

namespace {

double grid_cost(const GridControlParams& p, StateId cell, GridMove move) {
    double cost = move == GridMove::Left ? p.left_cost : move == GridMove::Right ? p.right_cost : p.stay_cost;
    for (const auto& o : p.overrides)
        if (o.cell == cell && o.move == move) cost = o.cost;
    return cost;
}

std::vector<GridMove> grid_moves(const GridControlParams& p, StateId cell) {
    if (cell == 0) return {GridMove::Stay};
    std::vector<GridMove> moves{GridMove::Left};
    if (cell + 1 < p.n) moves.push_back(GridMove::Right);
    moves.push_back(GridMove::Stay);
    return moves;
}

}  // namespace

FiniteModel build_grid_control(const GridControlParams& p) {
    if (p.n < 2) throw ModelError("grid needs at least two cells");
    for (const auto& o : p.overrides) {
        if (o.cell == 0 || o.cell >= p.n) throw ModelError("grid cost override outside the movable cells", o.cell);
        if (o.move == GridMove::Right && o.cell + 1 == p.n)
            throw ModelError("the last cell has no right move", o.cell);
    }
    std::vector<std::vector<Control>> controls(p.n);
    std::vector<std::string> labels;
    controls[0] = {Control{"stay", 0.0, {{1.0, 0}}}};
    for (StateId cell = 0; cell < p.n; ++cell) {
        labels.push_back("cell " + std::to_string(cell));
        if (cell == 0) continue;
        for (GridMove m : grid_moves(p, cell)) {
            switch (m) {
                case GridMove::Left: controls[cell].push_back({"left", grid_cost(p, cell, m), {{1.0, cell - 1}}}); break;
                case GridMove::Right: controls[cell].push_back({"right", grid_cost(p, cell, m), {{1.0, cell + 1}}}); break;
                case GridMove::Stay: controls[cell].push_back({"stay", grid_cost(p, cell, m), {{1.0, cell}}}); break;
            }
        }
    }
    return FiniteModel(std::move(controls), 1.0, CostFunction(p.n, 0.0), {0}, std::move(labels));
}

ControlId grid_control_id(const GridControlParams& p, StateId cell, GridMove move) {
    if (cell >= p.n) throw ModelError("grid cell out of range", cell);
    const auto moves = grid_moves(p, cell);
    const auto it = std::find(moves.begin(), moves.end(), move);
    if (it == moves.end()) throw ModelError("move not available at this cell", cell);
    return static_cast<ControlId>(it - moves.begin());
}

StationaryPolicy grid_always_left(const GridControlParams& p) {
    StationaryPolicy mu;
    mu.choice.assign(p.n, 0);  // left is control 0 at every movable cell
    return mu;
}

namespace {

// Spreads `mass` over 1 to 3 distinct states drawn from [0, range).
void random_support(Rng& rng, std::size_t range, double mass, std::vector<Transition>& out) {
    if (mass <= 0.0) return;
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(3, range));
    std::vector<StateId> pool(range);
    for (StateId i = 0; i < range; ++i) pool[i] = i;
    std::vector<double> w(k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = j + rng.index(range - j);
        std::swap(pool[j], pool[pick]);
        w[j] = rng.uniform(0.1, 1.0);
        total += w[j];
    }
    for (std::size_t j = 0; j < k; ++j) out.push_back({mass * w[j] / total, pool[j]});
}

}  // namespace

FiniteModel build_random_ssp(const RandomSspParams& p) {
    if (p.n_states < 2) throw ModelError("random SSP needs at least two states");
    if (p.n_controls < 1) throw ModelError("random SSP needs at least one control");
    if (!(p.cost_lo <= p.cost_hi) || !std::isfinite(p.cost_lo) || !std::isfinite(p.cost_hi))
        throw ModelError("invalid cost range");
    if (!(p.proper_bias >= 0.0 && p.proper_bias <= 1.0)) throw ModelError("proper_bias must lie in [0, 1]");
    Rng rng(p.seed);
    const StateId terminal = p.n_states - 1;
    std::vector<std::vector<Control>> controls(p.n_states);
    for (StateId x = 0; x < terminal; ++x) {
        for (ControlId u = 0; u < p.n_controls; ++u) {
            Control c;
            c.label = "u" + std::to_string(u);
            c.cost = rng.uniform(p.cost_lo, p.cost_hi);
            double to_terminal = 0.0;
            if (u == 0)
                to_terminal = p.proper_bias * rng.uniform(0.5, 1.0);
            else if (rng.bernoulli(p.proper_bias))
                to_terminal = rng.uniform(0.05, 0.5);
            random_support(rng, terminal, 1.0 - to_terminal, c.transitions);
            if (to_terminal > 0.0) c.transitions.push_back({to_terminal, terminal});
            controls[x].push_back(std::move(c));
        }
    }
    controls[terminal] = {Control{"stop", 0.0, {{1.0, terminal}}}};
    return FiniteModel(std::move(controls), 1.0, CostFunction(p.n_states, 0.0), {terminal});
}

FiniteModel build_nonneg_mdp(std::size_t n_states, std::size_t n_controls, std::uint64_t seed) {
    if (n_states < 2) throw ModelError("nonnegative model needs at least two states");
    if (n_controls < 1) throw ModelError("nonnegative model needs at least one control");
    Rng rng(seed);
    const StateId terminal = n_states - 1;
    std::vector<std::vector<Control>> controls(n_states);
    for (StateId x = 0; x < terminal; ++x) {
        for (ControlId u = 0; u < n_controls; ++u) {
            Control c;
            c.label = "u" + std::to_string(u);
            c.cost = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.0, 1.0);
            const double to_terminal = rng.bernoulli(0.5) ? rng.uniform(0.1, 1.0) : 0.0;
            random_support(rng, terminal, 1.0 - to_terminal, c.transitions);
            if (to_terminal > 0.0) c.transitions.push_back({to_terminal, terminal});
            controls[x].push_back(std::move(c));
        }
    }
    controls[terminal] = {Control{"stop", 0.0, {{1.0, terminal}}}};
    return FiniteModel(std::move(controls), 1.0, CostFunction(n_states, 0.0), {terminal});
}

FiniteModel build_discounted(std::size_t n_states, std::size_t n_controls, double alpha, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ModelError("discounted builder needs alpha in (0, 1)");
    if (n_states < 1 || n_controls < 1) throw ModelError("discounted model needs states and controls");
    Rng rng(seed);
    std::vector<std::vector<Control>> controls(n_states);
    for (StateId x = 0; x < n_states; ++x) {
        for (ControlId u = 0; u < n_controls; ++u) {
            Control c;
            c.label = "u" + std::to_string(u);
            c.cost = rng.uniform(0.0, 1.0);
            random_support(rng, n_states, 1.0, c.transitions);
            controls[x].push_back(std::move(c));
        }
    }
    return FiniteModel(std::move(controls), alpha, CostFunction(n_states, 0.0));
}

std::optional<StationaryPolicy> attractor_proper_policy(const FiniteModel& model) {
    if (!model.has_stop_set()) return std::nullopt;
    const std::size_t n = model.n_states();
    StationaryPolicy mu = first_control_policy(model);
    std::vector<bool> attracted(n, false);
    for (StateId s : model.stop_set()) attracted[s] = true;
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<bool> next = attracted;
        for (StateId x = 0; x < n; ++x) {
            if (attracted[x]) continue;
            for (ControlId u = 0; u < model.n_controls(x) && !next[x]; ++u) {
                for (const Transition& t : model.control(x, u).transitions) {
                    if (t.prob > 0.0 && attracted[t.next]) {
                        mu[x] = u;
                        next[x] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        attracted = std::move(next);
    }
    if (std::find(attracted.begin(), attracted.end(), false) != attracted.end()) return std::nullopt;
    return mu;
}

}  // namespace regdp
