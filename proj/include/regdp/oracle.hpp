#pragma once

#include <cstdint>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <vector>

#include "regdp/model.hpp"

namespace regdp {

inline constexpr std::uint64_t kDefaultEnumerationLimit = 1'000'000;

class EnumerationLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every stationary policy of a model exactly once, in mixed-radix order with
/// state 0 varying fastest.
class PolicyEnumeration {
public:
    explicit PolicyEnumeration(const FiniteModel& model, std::uint64_t limit = kDefaultEnumerationLimit);

    std::uint64_t size() const noexcept { return count_; }

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = StationaryPolicy;
        using difference_type = std::ptrdiff_t;
        using pointer = const StationaryPolicy*;
        using reference = const StationaryPolicy&;

        iterator() = default;
        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }
        iterator& operator++();
        iterator operator++(int) {
            iterator tmp = *this;
            ++*this;
            return tmp;
        }
        friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

    private:
        friend class PolicyEnumeration;
        iterator(const FiniteModel* model, std::uint64_t index);

        const FiniteModel* model_ = nullptr;
        std::uint64_t index_ = 0;
        StationaryPolicy current_;
    };

    iterator begin() const { return iterator(model_, 0); }
    iterator end() const { return iterator(nullptr, count_); }

private:
    const FiniteModel* model_;
    std::uint64_t count_;
};

/// True iff, under mu, the stop set is reached with probability 1 from every
/// state: no closed class of the chain lies outside the stop set. Throws
/// ModelError when the model has no stop set.
bool classify_proper(const FiniteModel& model, const StationaryPolicy& mu);

/**
 * J_mu from the linear system (I - alpha P_mu) J = g_mu on the non-stop
 * states, with J = 0 on the stop set.
 *
 * Requires alpha < 1 or a proper mu; otherwise, and whenever a pivot falls
 * below 1e-12, throws SingularSystemError.
 */
CostFunction exact_policy_cost(const FiniteModel& model, const StationaryPolicy& mu);

/// J_mu by the cheapest sound route: exact solve when alpha < 1 or mu is
/// proper, certified limsup iteration otherwise.
struct PolicyEvaluation {
    CostFunction value;
    std::vector<LimitStatus> status;
    bool exact = false;
    std::optional<bool> proper;  ///< set when the model has a stop set
};

PolicyEvaluation evaluate_policy(const FiniteModel& model, const StationaryPolicy& mu,
                                 const LimsupOptions& opts = {});

enum class DivergenceKind { DivergesPlus, DivergesMinus, Bounded, Unknown };

struct DivergenceVerdict {
    DivergenceKind kind = DivergenceKind::Unknown;
    std::vector<StateId> plus_states;
    std::vector<StateId> minus_states;
};

std::string to_string(DivergenceKind k);

/// Classifies limsup_k (T_mu^k J)(x). Exact cycle analysis for undiscounted
/// deterministic dynamics, the monotone-drift certificate otherwise.
DivergenceVerdict certify_divergence(const FiniteModel& model, const StationaryPolicy& mu, const CostFunction& J,
                                     const LimsupOptions& opts = {});

}  // namespace regdp
