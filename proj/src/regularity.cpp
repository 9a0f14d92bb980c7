#include "regdp/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "regdp/random.hpp"

namespace regdp {

namespace {

constexpr double kProbeMatchTol = 1e-7;
constexpr double kVanishTol = 1e-9;
constexpr std::size_t kEvWindow = 32;

double scale_of(ExtReal v) { return v.is_finite() ? std::max(1.0, std::fabs(v.value())) : 1.0; }

// Relative-or-absolute agreement, coordinate by coordinate.
bool close(const CostFunction& a, const CostFunction& b, double tol) {
    for (std::size_t x = 0; x < a.size(); ++x)
        if (!approx_equal(a[x], b[x], tol * scale_of(b[x]))) return false;
    return true;
}

Matrix matrix_power(Matrix base, std::uint64_t k) {
    Matrix result = Matrix::identity(base.rows());
    while (k) {
        if (k & 1u) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

bool nonneg_kind(RegionKind k) {
    return k == RegionKind::NonnegExtended || k == RegionKind::ExpectationVanishing;
}

}  // namespace

std::string to_string(RegionKind k) {
    switch (k) {
        case RegionKind::AllReal: return "all-real";
        case RegionKind::NonnegExtended: return "nonneg-extended";
        case RegionKind::BoundedBelow: return "bounded-below";
        case RegionKind::ZeroOnStopSet: return "zero-on-stop-set";
        case RegionKind::ExpectationVanishing: return "expectation-vanishing";
    }
    return "?";
}

RegionKind parse_region_kind(const std::string& text) {
    for (RegionKind k : {RegionKind::AllReal, RegionKind::NonnegExtended, RegionKind::BoundedBelow,
                         RegionKind::ZeroOnStopSet, RegionKind::ExpectationVanishing})
        if (to_string(k) == text) return k;
    throw std::invalid_argument("unknown region kind '" + text + "'");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Certified: return "certified";
        case Verdict::Refuted: return "refuted";
        case Verdict::Unknown: return "unknown";
    }
    return "?";
}

// --- SRegion ----------------------------------------------------------------

bool SRegion::contains(const CostFunction& J) const {
    if (J.size() != stop_.size()) throw std::invalid_argument("SRegion::contains: length mismatch");
    for (StateId x = 0; x < J.size(); ++x) {
        const ExtReal v = J[x];
        if (stop_[x]) {
            if (!approx_equal(v, ExtReal(0.0), kDefaultTol)) return false;
            continue;
        }
        if (v.is_neg_inf()) return false;
        if (finite_[x] && !v.is_finite()) return false;
        if (nonneg_kind(kind_) && v < ExtReal(-kDefaultTol)) return false;
    }
    if (kind_ == RegionKind::ExpectationVanishing) {
        for (const auto& [scale, row] : ev_rows_) {
            ExtReal acc(0.0);
            for (StateId y = 0; y < row.size(); ++y)
                if (row[y] != 0.0) acc = acc + ext_scale(row[y], J[y]);
            if (acc.is_pos_inf()) return false;
            if (scale * acc.value() > kVanishTol) return false;
        }
    }
    return true;
}

bool SRegion::dominated_by_member(const CostFunction& J) const {
    if (J.size() != stop_.size()) throw std::invalid_argument("SRegion::dominated_by_member: length mismatch");
    for (StateId x = 0; x < J.size(); ++x)
        if (stop_[x] && J[x] > ExtReal(kDefaultTol)) return false;
    switch (kind_) {
        case RegionKind::AllReal:
        case RegionKind::BoundedBelow:
        case RegionKind::ZeroOnStopSet:
            for (StateId x = 0; x < J.size(); ++x)
                if (!stop_[x] && finite_[x] && J[x].is_pos_inf()) return false;
            return true;
        case RegionKind::NonnegExtended:
            return true;
        case RegionKind::ExpectationVanishing: {
            // The region is closed downward within the nonnegative functions.
            CostFunction clipped(J.size());
            for (StateId x = 0; x < J.size(); ++x)
                clipped[x] = stop_[x] ? ExtReal(0.0) : ext_max(J[x], ExtReal(0.0));
            return contains(clipped);
        }
    }
    return false;
}

bool SRegion::admits_infinite_values() const noexcept {
    for (std::size_t x = 0; x < stop_.size(); ++x)
        if (!stop_[x] && !finite_[x]) return true;
    return false;
}

SRegion make_region(const FiniteModel& model, RegionKind kind, const RegionOptions& opts) {
    const std::size_t n = model.n_states();
    SRegion r;
    r.kind_ = kind;
    r.stop_.assign(n, false);
    for (StateId x = 0; x < n; ++x) r.stop_[x] = model.has_stop_set() && model.is_stop(x);

    std::optional<CostFunction> j_star;
    std::set<std::pair<double, std::vector<double>>> ev_rows;
    try {
        PolicyEnumeration policies(model, opts.enumeration_limit);
        LimsupOptions lo;
        lo.horizon_cap = opts.ev_horizon;
        CostFunction js(n, ExtReal::pos_inf());
        for (const StationaryPolicy& mu : policies) {
            const PolicyEvaluation ev = evaluate_policy(model, mu, lo);
            js = pointwise_min(js, ev.value);
            if (kind != RegionKind::ExpectationVanishing) continue;
            // Powers of P_mu are kept apart from alpha^k, which underflows
            // long before the horizon when alpha < 1.
            Matrix step = policy_affine_map(model, mu).linear;
            for (StateId x = 0; x < n; ++x)
                for (StateId y = 0; y < n; ++y) step(x, y) /= model.discount();
            const std::size_t w = std::min<std::size_t>(kEvWindow, opts.ev_horizon + 1);
            const std::size_t k0 = opts.ev_horizon + 1 - w;
            Matrix power = matrix_power(step, k0);
            for (std::size_t i = 0; i < w; ++i) {
                const double scale = std::pow(model.discount(), static_cast<double>(k0 + i));
                for (StateId x0 = 0; x0 < n; ++x0) {
                    if (r.stop_[x0] || ev.value[x0].is_pos_inf()) continue;
                    std::vector<double> row(n);
                    bool nonzero = false;
                    for (StateId y = 0; y < n; ++y) {
                        row[y] = r.stop_[y] ? 0.0 : power(x0, y);
                        nonzero = nonzero || row[y] != 0.0;
                    }
                    if (nonzero) ev_rows.emplace(scale, std::move(row));
                }
                if (i + 1 < w) power = power * step;
            }
        }
        j_star = std::move(js);
    } catch (const EnumerationLimitError&) {
        if (kind == RegionKind::ExpectationVanishing) throw;
    }
    r.ev_rows_.assign(ev_rows.begin(), ev_rows.end());

    r.finite_.assign(n, true);
    for (StateId x = 0; x < n; ++x) {
        if (r.stop_[x]) continue;
        switch (kind) {
            case RegionKind::AllReal:
            case RegionKind::BoundedBelow: break;
            case RegionKind::NonnegExtended: r.finite_[x] = false; break;
            case RegionKind::ZeroOnStopSet: r.finite_[x] = !j_star || !(*j_star)[x].is_pos_inf(); break;
            case RegionKind::ExpectationVanishing:
                r.finite_[x] = std::any_of(r.ev_rows_.begin(), r.ev_rows_.end(),
                                           [x](const auto& entry) { return entry.second[x] != 0.0; });
                break;
        }
    }

    auto push = [&](CostFunction J) {
        for (StateId x = 0; x < n; ++x)
            if (r.stop_[x]) J[x] = 0.0;
        if (!r.contains(J)) return;
        if (std::find(r.probes_.begin(), r.probes_.end(), J) != r.probes_.end()) return;
        r.probes_.push_back(std::move(J));
    };
    push(model.terminal());
    push(CostFunction(n, 0.0));
    if (j_star) {
        auto affine = [&](double c, double s) {
            CostFunction J(n);
            for (StateId x = 0; x < n; ++x) {
                const ExtReal v = (*j_star)[x];
                J[x] = v.is_finite() ? ExtReal(c * v.value() + s) : v;
            }
            return J;
        };
        push(affine(1.0, 0.0));
        push(affine(1.0, 1.0));
        push(affine(1.0, 5.0));
        push(affine(2.0, 1.0));
        push(affine(2.0, 0.0));
        push(affine(0.5, 0.0));
        push(affine(3.0, 0.0));
        push(affine(10.0, 0.0));
    }
    Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t attempt = 0; r.probes_.size() < opts.n_probes && attempt < 64 * opts.n_probes; ++attempt) {
        CostFunction J(n);
        const bool centered = j_star && attempt % 2 == 1;
        for (StateId x = 0; x < n; ++x) {
            if (nonneg_kind(kind)) {
                J[x] = rng.uniform(0.0, 10.0);
            } else {
                const ExtReal base = centered ? (*j_star)[x] : ExtReal(0.0);
                J[x] = (base.is_finite() ? base.value() : 0.0) + rng.uniform(-10.0, 10.0);
            }
        }
        push(std::move(J));
    }
    if (r.probes_.size() > opts.n_probes) r.probes_.resize(opts.n_probes);
    return r;
}

// --- S-regularity -----------------------------------------------------------

Certification certify_s_regular(const FiniteModel& model, const StationaryPolicy& mu, const SRegion& region,
                                std::size_t horizon_cap, double tol) {
    Certification out;
    LimsupOptions lo;
    lo.horizon_cap = horizon_cap;
    out.cost = evaluate_policy(model, mu, lo);
    const CostFunction& j_mu = out.cost.value;
    const std::size_t n = model.n_states();

    for (StateId x = 0; x < n; ++x) {
        if (out.cost.status[x] == LimitStatus::Uncertified) {
            out.verdict = Verdict::Unknown;
            out.reason = "policy cost not certified at state " + std::to_string(x);
            return out;
        }
    }
    if (!region.contains(j_mu)) {
        out.verdict = Verdict::Refuted;
        out.reason = "J_mu lies outside S";
        return out;
    }
    if (!close(apply_Tmu(model, mu, j_mu), j_mu, tol)) {
        out.verdict = Verdict::Refuted;
        out.reason = "J_mu is not a fixed point of T_mu";
        return out;
    }

    const AffineMap power = affine_power(policy_affine_map(model, mu), horizon_cap);
    bool unknown = false;
    for (std::size_t i = 0; i < region.probes().size(); ++i) {
        const CostFunction& probe = region.probes()[i];
        if (close(power.apply(probe), j_mu, kProbeMatchTol)) continue;
        const PolicyCost lim = limsup_iterates(model, {}, mu, probe, lo);
        for (StateId x = 0; x < n; ++x) {
            const LimitStatus s = lim.status[x];
            const bool ok = (s == LimitStatus::Settled &&
                             approx_equal(lim.value[x], j_mu[x], kProbeMatchTol * scale_of(j_mu[x]))) ||
                            (s == LimitStatus::PlusInfinity && j_mu[x].is_pos_inf()) ||
                            (s == LimitStatus::MinusInfinity && j_mu[x].is_neg_inf());
            if (ok) continue;
            if (s == LimitStatus::Uncertified) {
                unknown = true;
                continue;
            }
            out.verdict = Verdict::Refuted;
            out.reason = "T_mu^k J from probe " + std::to_string(i) + " does not converge to J_mu at state " +
                         std::to_string(x) + " (" + to_string(s) + ")";
            return out;
        }
    }
    if (unknown) {
        out.verdict = Verdict::Unknown;
        out.reason = "some probe iterations were not certified";
        return out;
    }
    out.verdict = Verdict::Certified;
    out.reason = "all " + std::to_string(region.probes().size()) + " probes converge to J_mu (sampler-relative)";
    return out;
}

RegularityReport brute_force_optima(const FiniteModel& model, const SRegion& region, const AnalysisOptions& opts) {
    const std::size_t n = model.n_states();
    const std::uint64_t conflicts_before = opposite_infinity_sums();
    PolicyEnumeration policies(model, opts.enumeration_limit);
    RegularityReport rep;
    rep.region = region.kind();
    rep.J_star = CostFunction(n, ExtReal::pos_inf());
    rep.J_star_S = CostFunction(n, ExtReal::pos_inf());
    rep.policies.reserve(policies.size());
    for (const StationaryPolicy& mu : policies) {
        PolicyRecord rec{mu, certify_s_regular(model, mu, region, opts.horizon_cap, opts.tol)};
        const PolicyEvaluation& ev = rec.certification.cost;
        for (LimitStatus s : ev.status)
            if (s == LimitStatus::Uncertified) rep.all_costs_certified = false;
        rep.J_star = pointwise_min(rep.J_star, ev.value);
        if (rec.certification.verdict == Verdict::Certified) rep.J_star_S = pointwise_min(rep.J_star_S, ev.value);
        rep.policies.push_back(std::move(rec));
    }
    for (StateId x = 0; x < n; ++x) {
        if (approx_equal(rep.J_star[x], ExtReal(0.0), opts.tol)) rep.zero_set.push_back(x);
        if (rep.J_star[x].is_pos_inf()) rep.infinite_set.push_back(x);
    }
    rep.infinity_conflicts = opposite_infinity_sums() - conflicts_before;
    return rep;
}

CostFunction opt_over_regular(const FiniteModel& model, const SRegion& region, const AnalysisOptions& opts) {
    return brute_force_optima(model, region, opts).J_star_S;
}

// --- fixed points and the well-behaved region -------------------------------

namespace {

void for_each_grid_point(const FiniteModel& model, const std::vector<std::vector<double>>& grid,
                         const std::function<void(const CostFunction&)>& visit) {
    const std::size_t n = model.n_states();
    if (grid.size() != n) throw std::invalid_argument("grid must list values for every state");
    std::uint64_t total = 1;
    for (const auto& axis : grid) {
        if (axis.empty()) throw std::invalid_argument("grid axis is empty");
        if (total > kScanLimit / axis.size() + 1) throw EnumerationLimitError("grid exceeds the scan limit");
        total *= axis.size();
    }
    if (total > kScanLimit)
        throw EnumerationLimitError("grid of " + std::to_string(total) + " points exceeds the scan limit of " +
                                    std::to_string(kScanLimit));
    std::vector<std::size_t> idx(n, 0);
    CostFunction J(n);
    for (std::uint64_t k = 0; k < total; ++k) {
        for (StateId x = 0; x < n; ++x) J[x] = grid[x][idx[x]];
        visit(J);
        for (StateId x = 0; x < n; ++x) {
            if (++idx[x] < grid[x].size()) break;
            idx[x] = 0;
        }
    }
}

}  // namespace

std::vector<ScanPoint> scan_grid(const FiniteModel& model, const std::vector<std::vector<double>>& grid) {
    std::vector<ScanPoint> out;
    for_each_grid_point(model, grid, [&](const CostFunction& J) {
        out.push_back({J, sup_distance(apply_T(model, J).values, J)});
    });
    return out;
}

std::vector<CostFunction> fixed_point_scan(const FiniteModel& model, const std::vector<std::vector<double>>& grid,
                                           double tol) {
    std::vector<CostFunction> out;
    for_each_grid_point(model, grid, [&](const CostFunction& J) {
        if (sup_distance(apply_T(model, J).values, J) <= ExtReal(tol)) out.push_back(J);
    });
    return out;
}

bool WellBehavedRegion::contains(const CostFunction& J, double tol) const {
    return leq(lower, J, tol) && region.dominated_by_member(J);
}

std::string WellBehavedRegion::upper_description() const {
    switch (region.kind()) {
        case RegionKind::AllReal:
        case RegionKind::BoundedBelow: return "J < +inf everywhere, J <= 0 on the stop set";
        case RegionKind::NonnegExtended: return "no upper restriction off the stop set";
        case RegionKind::ZeroOnStopSet: return "J <= 0 on the stop set, J < +inf on X_f";
        case RegionKind::ExpectationVanishing: return "max(J, 0) satisfies the vanishing-expectation condition";
    }
    return "?";
}

WellBehavedRegion well_behaved_region(const FiniteModel& model, const SRegion& region, const AnalysisOptions& opts) {
    return {opt_over_regular(model, region, opts), region};
}

// --- PI properties ----------------------------------------------------------

WeakPiResult check_weak_pi_property(const FiniteModel& model, const SRegion& region, std::optional<TieBreakRule> rule,
                                    const AnalysisOptions& opts) {
    const RegularityReport rep = brute_force_optima(model, region, opts);
    const std::size_t n = model.n_states();
    std::map<StationaryPolicy, std::size_t> index;
    for (std::size_t i = 0; i < rep.policies.size(); ++i) index.emplace(rep.policies[i].policy, i);
    auto regular = [&](std::size_t i) { return rep.policies[i].certification.verdict == Verdict::Certified; };

    // Successors of a regular policy: the regular policies PI may select at J_mu.
    std::map<std::size_t, std::vector<std::size_t>> memo;
    auto successors = [&](std::size_t i) -> const std::vector<std::size_t>& {
        auto it = memo.find(i);
        if (it != memo.end()) return it->second;
        std::vector<std::size_t> next;
        const CostFunction& j_mu = rep.policies[i].certification.cost.value;
        if (rule) {
            const std::size_t k = index.at(improve_policy(model, j_mu, rep.policies[i].policy, *rule, opts.tol));
            if (regular(k)) next.push_back(k);
        } else {
            std::vector<std::vector<ControlId>> choices(n);
            for (StateId x = 0; x < n; ++x) choices[x] = argmin_controls(model, x, j_mu, opts.tol);
            std::vector<std::size_t> pos(n, 0);
            StationaryPolicy candidate;
            candidate.choice.resize(n);
            while (true) {
                for (StateId x = 0; x < n; ++x) candidate[x] = choices[x][pos[x]];
                const std::size_t k = index.at(candidate);
                if (regular(k)) next.push_back(k);
                StateId x = 0;
                for (; x < n; ++x) {
                    if (++pos[x] < choices[x].size()) break;
                    pos[x] = 0;
                }
                if (x == n) break;
            }
        }
        return memo.emplace(i, std::move(next)).first->second;
    };

    // Any infinite walk in the finite successor graph closes a cycle.
    enum class Color { White, Gray, Black };
    std::vector<Color> color(rep.policies.size(), Color::White);
    for (std::size_t root = 0; root < rep.policies.size(); ++root) {
        if (!regular(root) || color[root] != Color::White) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = Color::Gray;
        while (!stack.empty()) {
            auto& [node, edge] = stack.back();
            const auto& next = successors(node);
            if (edge == next.size()) {
                color[node] = Color::Black;
                stack.pop_back();
                continue;
            }
            const std::size_t k = next[edge++];
            if (color[k] == Color::Gray) {
                WeakPiResult res;
                res.holds = true;
                for (const auto& frame : stack) res.witness.push_back(rep.policies[frame.first].policy);
                res.witness.push_back(rep.policies[k].policy);
                return res;
            }
            if (color[k] == Color::White) {
                color[k] = Color::Gray;
                stack.emplace_back(k, 0);
            }
        }
    }
    return {};
}

StrongPiReport check_strong_pi_conditions(const FiniteModel& model, const SRegion& region, double blowup_bound,
                                          const AnalysisOptions& opts) {
    StrongPiReport r;
    const RegularityReport rep = brute_force_optima(model, region, opts);
    r.finite_values = !region.admits_infinite_values();
    if (!r.finite_values) r.failures.push_back("(1) S contains functions taking the value +inf");
    r.regular_exists = std::any_of(rep.policies.begin(), rep.policies.end(), [](const PolicyRecord& p) {
        return p.certification.verdict == Verdict::Certified;
    });
    if (!r.regular_exists) r.failures.push_back("(2) no policy is certified S-regular");
    r.minima_attained = true;

    LimsupOptions lo;
    lo.horizon_cap = opts.horizon_cap;
    lo.blowup_bound = blowup_bound;
    r.irregular_diverge = true;
    for (const PolicyRecord& rec : rep.policies) {
        if (rec.certification.verdict == Verdict::Certified) continue;
        for (std::size_t i = 0; i < region.probes().size(); ++i) {
            const DivergenceVerdict v = certify_divergence(model, rec.policy, region.probes()[i], lo);
            if (v.kind == DivergenceKind::DivergesPlus) continue;
            r.irregular_diverge = false;
            r.failures.push_back("(4) irregular policy " + to_string(rec.policy) + " does not diverge to +inf from probe " +
                                 std::to_string(i) + " (" + to_string(v.kind) + ")");
            break;
        }
    }
    return r;
}

}  // namespace regdp
