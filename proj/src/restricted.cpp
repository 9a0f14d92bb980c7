#include "regdp/restricted.hpp"

namespace regdp {

std::string to_string(PairSetDescriptor::Kind k) {
    switch (k) {
        case PairSetDescriptor::Kind::AllPairs: return "all-pairs";
        case PairSetDescriptor::Kind::FiniteCostPairs: return "finite-cost-pairs";
        case PairSetDescriptor::Kind::RegularStationaryPairs: return "regular-stationary-pairs";
    }
    return "?";
}

CostFunction restricted_opt_cost(const FiniteModel& model, const PairSetDescriptor& C, const AnalysisOptions& opts) {
    const std::size_t n = model.n_states();
    if (C.kind == PairSetDescriptor::Kind::RegularStationaryPairs)
        return opt_over_regular(model, make_region(model, C.region, C.region_options), opts);

    LimsupOptions lo;
    lo.horizon_cap = opts.horizon_cap;
    CostFunction out(n, ExtReal::pos_inf());
    for (const StationaryPolicy& mu : PolicyEnumeration(model, opts.enumeration_limit)) {
        const PolicyEvaluation ev = evaluate_policy(model, mu, lo);
        for (StateId x = 0; x < n; ++x) {
            if (C.kind == PairSetDescriptor::Kind::FiniteCostPairs && ev.value[x].is_pos_inf()) continue;
            out[x] = ext_min(out[x], ev.value[x]);
        }
    }
    return out;
}

}  // namespace regdp
