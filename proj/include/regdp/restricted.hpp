#pragma once

#include "regdp/regularity.hpp"

namespace regdp {

/// A set C of policy-state pairs, restricted to stationary policies.
struct PairSetDescriptor {
    enum class Kind {
        AllPairs,               ///< every (mu, x)
        FiniteCostPairs,        ///< (mu, x) with J_mu(x) < inf
        RegularStationaryPairs  ///< (mu, x) with mu certified S-regular
    };

    Kind kind = Kind::AllPairs;
    RegionKind region = RegionKind::AllReal;  ///< S, for RegularStationaryPairs
    RegionOptions region_options;
};

std::string to_string(PairSetDescriptor::Kind k);

/// J*_C(x) = min of J_mu(x) over the (mu, x) in C; +inf where C has no pair at x.
CostFunction restricted_opt_cost(const FiniteModel& model, const PairSetDescriptor& C,
                                 const AnalysisOptions& opts = {});

}  // namespace regdp
