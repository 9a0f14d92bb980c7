#include "regdp/extreal.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace regdp {

namespace {
thread_local std::uint64_t g_opposite_sums = 0;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_length(const CostFunction& J, const CostFunction& J2) {
    if (J.size() != J2.size()) {
        throw std::invalid_argument("cost function length mismatch: " + std::to_string(J.size()) +
                                    " vs " + std::to_string(J2.size()));
    }
}
}  // namespace

ExtReal::ExtReal(double v) : v_(v) {
    if (std::isnan(v)) throw std::domain_error("ExtReal cannot hold NaN");
}

ExtReal ExtReal::pos_inf() noexcept {
    ExtReal r;
    r.v_ = kInf;
    return r;
}

ExtReal ExtReal::neg_inf() noexcept {
    ExtReal r;
    r.v_ = -kInf;
    return r;
}

ExtKind ExtReal::kind() const noexcept {
    if (v_ == kInf) return ExtKind::PosInf;
    if (v_ == -kInf) return ExtKind::NegInf;
    return ExtKind::Finite;
}

bool ExtReal::is_finite() const noexcept { return std::isfinite(v_); }
bool ExtReal::is_pos_inf() const noexcept { return v_ == kInf; }
bool ExtReal::is_neg_inf() const noexcept { return v_ == -kInf; }

ExtReal ext_add(ExtReal a, ExtReal b) noexcept {
    if (a.is_pos_inf() || b.is_pos_inf()) {
        if (a.is_neg_inf() || b.is_neg_inf()) ++g_opposite_sums;
        return ExtReal::pos_inf();
    }
    // Finite overflow saturates to an infinity of the right sign.
    return a.value() + b.value();
}

ExtReal ext_scale(double p, ExtReal a) {
    if (!(p >= 0.0)) throw std::invalid_argument("ext_scale: negative or NaN factor");
    if (p == 0.0) return 0.0;
    return p * a.value();
}

ExtReal ext_abs_diff(ExtReal a, ExtReal b) noexcept {
    if (a == b) return 0.0;
    if (!a.is_finite() || !b.is_finite()) return ExtReal::pos_inf();
    return std::fabs(a.value() - b.value());
}

ExtReal ext_min(ExtReal a, ExtReal b) noexcept { return b < a ? b : a; }
ExtReal ext_max(ExtReal a, ExtReal b) noexcept { return a < b ? b : a; }

bool approx_equal(ExtReal a, ExtReal b, double tol) noexcept {
    if (a.is_finite() && b.is_finite()) return std::fabs(a.value() - b.value()) <= tol;
    return a == b;
}

std::uint64_t opposite_infinity_sums() noexcept { return g_opposite_sums; }

std::string to_string(ExtReal a) {
    if (a.is_pos_inf()) return "+inf";
    if (a.is_neg_inf()) return "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), a.value());
    return std::string(buf, res.ptr);
}

ExtReal parse_ext_real(const std::string& text) {
    if (text == "+inf" || text == "inf" || text == "+Inf") return ExtReal::pos_inf();
    if (text == "-inf" || text == "-Inf") return ExtReal::neg_inf();
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw std::invalid_argument("not an extended real: '" + text + "'");
    }
    return v;
}

std::ostream& operator<<(std::ostream& out, ExtReal a) { return out << to_string(a); }

bool CostFunction::all_finite() const noexcept {
    for (ExtReal v : values_)
        if (!v.is_finite()) return false;
    return true;
}

bool CostFunction::all_nonnegative() const noexcept {
    for (ExtReal v : values_)
        if (v < ExtReal(0.0)) return false;
    return true;
}

bool CostFunction::any_neg_inf() const noexcept {
    for (ExtReal v : values_)
        if (v.is_neg_inf()) return true;
    return false;
}

bool leq(const CostFunction& J, const CostFunction& J2) {
    require_same_length(J, J2);
    for (std::size_t i = 0; i < J.size(); ++i)
        if (J2[i] < J[i]) return false;
    return true;
}

bool leq(const CostFunction& J, const CostFunction& J2, double tol) {
    require_same_length(J, J2);
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (J[i].is_finite() && J2[i].is_finite()) {
            if (J[i].value() > J2[i].value() + tol) return false;
        } else if (J2[i] < J[i]) {
            return false;
        }
    }
    return true;
}

bool approx_equal(const CostFunction& J, const CostFunction& J2, double tol) {
    require_same_length(J, J2);
    for (std::size_t i = 0; i < J.size(); ++i)
        if (!approx_equal(J[i], J2[i], tol)) return false;
    return true;
}

ExtReal sup_distance(const CostFunction& J, const CostFunction& J2) {
    require_same_length(J, J2);
    ExtReal d = 0.0;
    for (std::size_t i = 0; i < J.size(); ++i) d = ext_max(d, ext_abs_diff(J[i], J2[i]));
    return d;
}

CostFunction pointwise_min(const CostFunction& J, const CostFunction& J2) {
    require_same_length(J, J2);
    CostFunction out(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) out[i] = ext_min(J[i], J2[i]);
    return out;
}

CostFunction pointwise_max(const CostFunction& J, const CostFunction& J2) {
    require_same_length(J, J2);
    CostFunction out(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) out[i] = ext_max(J[i], J2[i]);
    return out;
}

WeightedNorm::WeightedNorm(std::vector<double> weights) : weights_(std::move(weights)) {
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("weighted norm requires finite positive weights");
        }
    }
}

ExtReal weighted_sup_distance(const CostFunction& J, const CostFunction& J2, const WeightedNorm& v) {
    require_same_length(J, J2);
    if (v.size() != J.size()) throw std::invalid_argument("weight vector length mismatch");
    ExtReal d = 0.0;
    for (std::size_t i = 0; i < J.size(); ++i) {
        ExtReal gap = ext_abs_diff(J[i], J2[i]);
        d = ext_max(d, gap.is_finite() ? ExtReal(gap.value() / v[i]) : gap);
    }
    return d;
}

std::ostream& operator<<(std::ostream& out, const CostFunction& J) {
    out << '[';
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (i) out << ", ";
        out << J[i];
    }
    return out << ']';
}

}  // namespace regdp
