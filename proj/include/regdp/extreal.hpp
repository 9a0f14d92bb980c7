#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace regdp {

/// Default absolute tolerance for comparing finite values.
inline constexpr double kDefaultTol = 1e-9;

enum class ExtKind { Finite, PosInf, NegInf };

/**
 * A value in the extended real line R ∪ {-inf, +inf}.
 *
 * Infinite values are carried as IEEE infinities, so the ordering
 * -inf < finite < +inf comes for free. NaN is never representable:
 * construction from NaN throws std::domain_error.
 *
 * Arithmetic follows the minimization conventions used throughout the
 * library:
 *   (+inf) + (-inf) = +inf     (counted, see opposite_infinity_sums())
 *   0 * (+-inf)     = 0
 */
class ExtReal {
public:
    constexpr ExtReal() noexcept = default;
    ExtReal(double v);  // NOLINT: implicit by design of the numeric API

    static ExtReal pos_inf() noexcept;
    static ExtReal neg_inf() noexcept;

    ExtKind kind() const noexcept;
    bool is_finite() const noexcept;
    bool is_pos_inf() const noexcept;
    bool is_neg_inf() const noexcept;

    /// Raw value; +-inf for the infinite kinds.
    double value() const noexcept { return v_; }

    friend bool operator==(ExtReal a, ExtReal b) noexcept { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(ExtReal a, ExtReal b) noexcept {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (b.v_ < a.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

private:
    double v_ = 0.0;
};

ExtReal ext_add(ExtReal a, ExtReal b) noexcept;

/// p * a with 0 * (+-inf) = 0. Throws std::invalid_argument for p < 0 or NaN.
ExtReal ext_scale(double p, ExtReal a);

/// |a - b|, with equal infinities at distance 0 and any other infinite gap +inf.
ExtReal ext_abs_diff(ExtReal a, ExtReal b) noexcept;

ExtReal ext_min(ExtReal a, ExtReal b) noexcept;
ExtReal ext_max(ExtReal a, ExtReal b) noexcept;

/// Equality within an absolute tolerance for finite values; infinities
/// compare equal only to the same infinity.
bool approx_equal(ExtReal a, ExtReal b, double tol = kDefaultTol) noexcept;

inline ExtReal operator+(ExtReal a, ExtReal b) noexcept { return ext_add(a, b); }
inline ExtReal operator*(double p, ExtReal a) { return ext_scale(p, a); }

/// Count of (+inf) + (-inf) evaluations on the calling thread.
std::uint64_t opposite_infinity_sums() noexcept;

/// Scoped observer for the +inf/-inf convention; reports how many times it
/// was exercised on this thread since construction.
class ConventionAudit {
public:
    ConventionAudit() noexcept : start_(opposite_infinity_sums()) {}
    std::uint64_t exercised() const noexcept { return opposite_infinity_sums() - start_; }

private:
    std::uint64_t start_;
};

/// "+inf", "-inf", or the shortest round-trip decimal form.
std::string to_string(ExtReal a);
ExtReal parse_ext_real(const std::string& text);
std::ostream& operator<<(std::ostream& out, ExtReal a);

/// A function from state index to extended real.
class CostFunction {
public:
    CostFunction() = default;
    explicit CostFunction(std::size_t n, ExtReal fill = 0.0) : values_(n, fill) {}
    CostFunction(std::initializer_list<ExtReal> init) : values_(init) {}
    explicit CostFunction(std::vector<ExtReal> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    ExtReal operator[](std::size_t i) const { return values_[i]; }
    ExtReal& operator[](std::size_t i) { return values_[i]; }
    ExtReal at(std::size_t i) const { return values_.at(i); }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }
    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }

    const std::vector<ExtReal>& values() const noexcept { return values_; }

    bool all_finite() const noexcept;
    bool all_nonnegative() const noexcept;
    bool any_neg_inf() const noexcept;

    friend bool operator==(const CostFunction&, const CostFunction&) = default;

private:
    std::vector<ExtReal> values_;
};

/// Pointwise J <= J2 (exact). Throws std::invalid_argument on length mismatch.
bool leq(const CostFunction& J, const CostFunction& J2);
/// Pointwise J <= J2 + tol on finite coordinates.
bool leq(const CostFunction& J, const CostFunction& J2, double tol);
bool approx_equal(const CostFunction& J, const CostFunction& J2, double tol = kDefaultTol);

/// Unweighted sup_x |J(x) - J2(x)|.
ExtReal sup_distance(const CostFunction& J, const CostFunction& J2);

CostFunction pointwise_min(const CostFunction& J, const CostFunction& J2);
CostFunction pointwise_max(const CostFunction& J, const CostFunction& J2);

/// Strictly positive per-state weights v for the norm sup_x |J(x)| / v(x).
class WeightedNorm {
public:
    explicit WeightedNorm(std::vector<double> weights);
    static WeightedNorm uniform(std::size_t n) { return WeightedNorm(std::vector<double>(n, 1.0)); }

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

ExtReal weighted_sup_distance(const CostFunction& J, const CostFunction& J2, const WeightedNorm& v);

std::ostream& operator<<(std::ostream& out, const CostFunction& J);

}  // namespace regdp
