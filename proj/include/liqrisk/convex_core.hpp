#pragma once

/// Loss functions, shape functions, their conjugates, and class diagnostics (LΓ, H).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace liqrisk {

using Node = std::pair<double, double>;

/// Sup over the nodes of t*x - f(x); the exact conjugate of the piecewise-linear interpolant
/// on its hull. Nodes with f = +inf are skipped.
inline double legendre_conjugate(const std::vector<Node>& grid, double t) {
    if (grid.empty()) throw InvalidInput("legendre_conjugate: empty grid");
    if (!std::isfinite(t)) throw InvalidInput("legendre_conjugate: t must be finite");
    double best = -kInf;
    bool any = false;
    for (const auto& [x, f] : grid) {
        if (f == kInf) continue;
        any = true;
        best = std::max(best, t * x - f);
    }
    if (!any) throw DegenerateFunction("legendre_conjugate: all values are +inf");
    return best;
}

/// Lower convex envelope at x of tabulated data, computed as the biconjugate
/// over all pairwise slopes (exact for piecewise-linear data).
inline double biconjugate(const std::vector<Node>& grid, double x) {
    if (grid.empty()) throw InvalidInput("biconjugate: empty grid");
    std::vector<double> slopes;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double dx = grid[j].first - grid[i].first;
            if (dx != 0 && std::isfinite(grid[i].second) && std::isfinite(grid[j].second))
                slopes.push_back((grid[j].second - grid[i].second) / dx);
        }
    if (slopes.empty()) slopes.push_back(0.0);
    double best = -kInf;
    for (double t : slopes) best = std::max(best, t * x - legendre_conjugate(grid, t));
    return best;
}

/// Numerical right derivatives at a point via forward differences on a
/// decade-decreasing step sequence with a Richardson agreement check.
struct NumericDerivative {
    double value = 0;
    bool consistent = false;
};

inline NumericDerivative right_derivative_numeric(const std::function<double(double)>& f, double x0,
                                                  int order = 1) {
    auto diff = [&](double h) {
        if (order == 1) return (f(x0 + h) - f(x0)) / h;
        return (f(x0 + 2 * h) - 2 * f(x0 + h) + f(x0)) / (h * h);
    };
    std::vector<double> rich;
    const int kmax = order == 1 ? 8 : 5;
    for (int k = 1; k <= kmax; ++k) {
        const double h = std::pow(10.0, -k);
        rich.push_back(2 * diff(h / 2) - diff(h));
    }
    NumericDerivative out;
    out.value = rich.back();
    for (std::size_t i = rich.size() - 1; i > 0; --i) {
        const double a = rich[i - 1], b = rich[i];
        if (std::abs(a - b) <= 1e-6 * (1 + std::abs(b))) {
            out.value = b;
            out.consistent = true;
            break;
        }
    }
    return out;
}

/// The shape function γ : [0,∞) → [0,∞] bounding a liquidity risk profile.
class ShapeFunction {
public:
    enum class Kind { quadratic, linear, power, tabulated };

    /// shift + a·λ²/2
    static ShapeFunction quadratic(double a = 1.0, double shift = 0.0) {
        return ShapeFunction(Kind::quadratic, a, 2.0, shift, {});
    }
    /// shift + a·λ
    static ShapeFunction linear(double a, double shift = 0.0) {
        return ShapeFunction(Kind::linear, a, 1.0, shift, {});
    }
    /// shift + a·λ^q / q, q > 1
    static ShapeFunction power(double q, double a = 1.0, double shift = 0.0) {
        if (!(q > 1)) throw InvalidInput("power shape needs q > 1");
        return ShapeFunction(Kind::power, a, q, shift, {});
    }
    /// Piecewise-linear through the nodes, +inf beyond the last node.
    static ShapeFunction tabulated(std::vector<Node> nodes) {
        return ShapeFunction(Kind::tabulated, 1.0, 1.0, 0.0, std::move(nodes));
    }

    Kind kind() const { return kind_; }
    double coefficient() const { return a_; }
    double exponent() const { return q_; }
    double shift() const { return shift_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    double operator()(double lambda) const {
        if (lambda < 0) throw InvalidInput("shape function evaluated at negative lambda");
        switch (kind_) {
            case Kind::quadratic: return shift_ + a_ * lambda * lambda / 2;
            case Kind::linear: return shift_ + a_ * lambda;
            case Kind::power: return shift_ + a_ * std::pow(lambda, q_) / q_;
            case Kind::tabulated: return interpolate(lambda);
        }
        return kInf;
    }

    /// γ*(t) = sup_{λ≥0} (tλ − γ(λ)); equals −γ(0) for t ≤ 0.
    double conjugate(double t) const {
        if (std::isnan(t)) return t;
        if (t <= 0) return -value_at_zero();
        switch (kind_) {
            case Kind::quadratic: return t * t / (2 * a_) - shift_;
            case Kind::linear: return t <= a_ ? -shift_ : kInf;
            case Kind::power: {
                if (t == kInf) return kInf;
                const double p = q_ / (q_ - 1);
                return std::pow(t, p) * std::pow(a_, 1 - p) / p - shift_;
            }
            case Kind::tabulated:
                if (t == kInf) return kInf;
                return legendre_conjugate(nodes_, t);
        }
        return kInf;
    }

    /// A maximizer λ*(t) of tλ − γ(λ); the right derivative of γ* at t.
    double conjugate_argmax(double t) const {
        if (t <= 0) return 0.0;
        switch (kind_) {
            case Kind::quadratic: return t / a_;
            case Kind::linear: return t < a_ ? 0.0 : kInf;
            case Kind::power: return std::pow(t / a_, 1 / (q_ - 1));
            case Kind::tabulated: {
                double best = -kInf, arg = 0;
                for (const auto& [x, f] : nodes_) {
                    if (f == kInf) continue;
                    const double v = t * x - f;
                    if (v >= best) { best = v; arg = x; }
                }
                return arg;
            }
        }
        return 0.0;
    }

    /// (γ*)⁻¹(y) := sup{t ≥ 0 : γ*(t) ≤ y}; −inf-free, returns 0 when even γ*(0) > y.
    double conjugate_inverse(double y) const {
        if (conjugate(0.0) > y) return 0.0;
        switch (kind_) {
            case Kind::quadratic: return std::sqrt(2 * a_ * (y + shift_));
            case Kind::linear: return a_;
            case Kind::power: {
                const double p = q_ / (q_ - 1);
                return std::pow(p * (y + shift_) * std::pow(a_, p - 1), 1 / p);
            }
            case Kind::tabulated: {
                double hi = 1.0;
                for (int k = 0; k < 200 && conjugate(hi) <= y; ++k) hi *= 2;
                if (conjugate(hi) <= y) return kInf;
                return bisect_boundary([&](double t) { return conjugate(t) > y; }, 0.0, hi);
            }
        }
        return 0.0;
    }

    double value_at_zero() const { return kind_ == Kind::tabulated ? nodes_.front().second : shift_; }

    /// γ′(0) as a right limit.
    double right_derivative_at_zero() const {
        switch (kind_) {
            case Kind::quadratic: return 0.0;
            case Kind::linear: return a_;
            case Kind::power: return 0.0;
            case Kind::tabulated:
                return right_derivative_numeric([this](double x) { return interpolate(x); }, 0.0, 1).value;
        }
        return 0.0;
    }

    /// γ″(0) as a right limit; nullopt when the kind has no second derivative.
    std::optional<double> second_derivative_at_zero() const {
        switch (kind_) {
            case Kind::quadratic: return a_;
            case Kind::linear: return 0.0;
            case Kind::power:
                if (q_ < 2) return kInf;
                if (q_ == 2) return a_;
                return 0.0;
            case Kind::tabulated: return std::nullopt;
        }
        return std::nullopt;
    }

    /// Right derivative at λ.
    double right_derivative(double lambda) const {
        switch (kind_) {
            case Kind::quadratic: return a_ * lambda;
            case Kind::linear: return a_;
            case Kind::power: return a_ * std::pow(lambda, q_ - 1);
            case Kind::tabulated: {
                for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
                    if (lambda < nodes_[i + 1].first)
                        return (nodes_[i + 1].second - nodes_[i].second) / (nodes_[i + 1].first - nodes_[i].first);
                return kInf;
            }
        }
        return kInf;
    }

    double effective_domain_sup() const {
        if (kind_ != Kind::tabulated) return kInf;
        double s = 0;
        for (const auto& [x, f] : nodes_)
            if (f < kInf) s = x;
        return s;
    }

    /// λ ↦ γ(cλ).
    ShapeFunction scaled(double c) const {
        if (!(c > 0) || !std::isfinite(c)) throw InvalidInput("scale must be positive and finite");
        switch (kind_) {
            case Kind::quadratic: return quadratic(a_ * c * c, shift_);
            case Kind::linear: return linear(a_ * c, shift_);
            case Kind::power: return power(q_, a_ * std::pow(c, q_), shift_);
            case Kind::tabulated: {
                std::vector<Node> n = nodes_;
                for (auto& nd : n) nd.first /= c;
                return tabulated(std::move(n));
            }
        }
        return *this;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::quadratic: return "quadratic";
            case Kind::linear: return "linear";
            case Kind::power: return "power";
            case Kind::tabulated: return "tabulated";
        }
        return "?";
    }

private:
    ShapeFunction(Kind k, double a, double q, double shift, std::vector<Node> nodes)
        : kind_(k), a_(a), q_(q), shift_(shift), nodes_(std::move(nodes)) {
        if (kind_ != Kind::tabulated) {
            if (!(a_ > 0) || !std::isfinite(a_)) throw InvalidInput("shape coefficient must be positive");
            if (!(shift_ >= 0) || !std::isfinite(shift_)) throw InvalidInput("shape shift must be finite and >= 0");
            return;
        }
        if (nodes_.size() < 2) throw InvalidInput("tabulated shape needs at least two nodes");
        if (nodes_.front().first != 0) throw InvalidInput("tabulated shape must start at lambda = 0");
        if (!std::isfinite(nodes_.front().second)) throw InvalidInput("tabulated shape needs finite gamma(0)");
        double prev_slope = -kInf;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].second < 0) throw InvalidInput("tabulated shape must be nonnegative");
            if (i == 0) continue;
            if (!(nodes_[i].first > nodes_[i - 1].first)) throw InvalidInput("tabulated nodes must ascend");
            if (nodes_[i].second == kInf) continue;
            const double s = (nodes_[i].second - nodes_[i - 1].second) / (nodes_[i].first - nodes_[i - 1].first);
            if (s < -1e-12) throw InvalidInput("tabulated shape must be nondecreasing");
            if (s < prev_slope - 1e-9 * (1 + std::abs(prev_slope))) throw InvalidInput("tabulated shape must be convex");
            prev_slope = s;
        }
    }

    double interpolate(double x) const {
        if (x > nodes_.back().first) return kInf;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            const auto& [x0, f0] = nodes_[i];
            const auto& [x1, f1] = nodes_[i + 1];
            if (x <= x1) {
                if (f1 == kInf) return x == x0 ? f0 : kInf;
                return f0 + (f1 - f0) * (x - x0) / (x1 - x0);
            }
        }
        return nodes_.back().second;
    }

    Kind kind_;
    double a_, q_, shift_;
    std::vector<Node> nodes_;
};

/// A loss function ℓ: convex, nondecreasing, ℓ(0) = 1 < ℓ(x) for x > 0.
class LossFunction {
public:
    enum class Kind { exponential, hinge, power_hinge, tabulated };

    static LossFunction exponential() { return LossFunction(Kind::exponential, 1.0, {}); }
    static LossFunction hinge() { return LossFunction(Kind::hinge, 1.0, {}); }
    static LossFunction power_hinge(double p) {
        if (!(p > 1)) throw InvalidInput("power-hinge loss needs p > 1");
        return LossFunction(Kind::power_hinge, p, {});
    }
    /// Piecewise-linear through the nodes; constant to the left, last slope to the right.
    static LossFunction tabulated(std::vector<Node> nodes) { return LossFunction(Kind::tabulated, 1.0, std::move(nodes)); }

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    double operator()(double x) const {
        switch (kind_) {
            case Kind::exponential: return std::exp(x);
            case Kind::hinge: return x > -1 ? 1 + x : 0.0;
            case Kind::power_hinge: return x > -1 ? std::pow(1 + x, p_) : 0.0;
            case Kind::tabulated: return interpolate(x);
        }
        return kInf;
    }

    /// ℓ(x) − 1 without cancellation near x = 0.
    double excess(double x) const {
        switch (kind_) {
            case Kind::exponential: return std::expm1(x);
            case Kind::hinge: return std::max(x, -1.0);
            case Kind::power_hinge: return x > -1 ? std::expm1(p_ * std::log1p(x)) : -1.0;
            case Kind::tabulated: return interpolate(x) - 1;
        }
        return kInf;
    }

    double log_value(double x) const {
        if (x == kInf) return kInf;
        switch (kind_) {
            case Kind::exponential: return x;
            case Kind::hinge: return x > -1 ? std::log1p(x) : -kInf;
            case Kind::power_hinge: return x > -1 ? p_ * std::log1p(x) : -kInf;
            case Kind::tabulated: return std::log(interpolate(x));
        }
        return kInf;
    }

    /// ℓ*(t) = sup_x (tx − ℓ(x)).
    double conjugate(double t) const {
        if (std::isnan(t)) return t;
        if (t < 0) return kInf;
        switch (kind_) {
            case Kind::exponential:
                if (t == 0) return 0.0;
                if (t == kInf) return kInf;
                return t * std::log(t) - t;
            case Kind::hinge: return t <= 1 ? -t : kInf;
            case Kind::power_hinge: {
                if (t == kInf) return kInf;
                const double q = p_ / (p_ - 1);
                return (p_ / q) * std::pow(t / p_, q) - t;
            }
            case Kind::tabulated: {
                if (t > slope_at_end() * (1 + 1e-15)) return kInf;
                return legendre_conjugate(nodes_, t);
            }
        }
        return kInf;
    }

    /// sup{t : ℓ*(t) < ∞}.
    double conjugate_domain_sup() const {
        switch (kind_) {
            case Kind::hinge: return 1.0;
            case Kind::tabulated: return slope_at_end();
            default: return kInf;
        }
    }

    /// Right derivative ℓ′(x).
    double derivative(double x) const {
        switch (kind_) {
            case Kind::exponential: return std::exp(x);
            case Kind::hinge: return x >= -1 ? 1.0 : 0.0;
            case Kind::power_hinge: return x > -1 ? p_ * std::pow(1 + x, p_ - 1) : 0.0;
            case Kind::tabulated: {
                if (x < nodes_.front().first) return 0.0;
                for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
                    if (x < nodes_[i + 1].first) return segment_slope(i);
                return slope_at_end();
            }
        }
        return 0.0;
    }

    double log_derivative_value(double x) const {
        switch (kind_) {
            case Kind::exponential: return x;
            case Kind::power_hinge: return x > -1 ? std::log(p_) + (p_ - 1) * std::log1p(x) : -kInf;
            default: return std::log(derivative(x));
        }
    }

    /// Second derivative where the kind provides one (right limit).
    std::optional<double> second_derivative(double x) const {
        switch (kind_) {
            case Kind::exponential: return std::exp(x);
            case Kind::power_hinge:
                if (p_ < 2) return std::nullopt;
                return x > -1 ? p_ * (p_ - 1) * std::pow(1 + x, p_ - 2) : 0.0;
            default: return std::nullopt;
        }
    }

    std::optional<double> log_second_derivative(double x) const {
        switch (kind_) {
            case Kind::exponential: return x;
            case Kind::power_hinge:
                if (p_ < 2) return std::nullopt;
                return x > -1 ? std::log(p_ * (p_ - 1)) + (p_ - 2) * std::log1p(x) : -kInf;
            default: return std::nullopt;
        }
    }

    /// Continuously differentiable on the whole line.
    bool continuously_differentiable() const {
        return kind_ == Kind::exponential || kind_ == Kind::power_hinge;
    }

    /// sup{x : ℓ(x) ≤ y}; −inf when no such x.
    double inverse(double y) const {
        switch (kind_) {
            case Kind::exponential: return y > 0 ? std::log(y) : -kInf;
            case Kind::hinge: return y >= 0 ? y - 1 : -kInf;
            case Kind::power_hinge: return y >= 0 ? std::pow(y, 1 / p_) - 1 : -kInf;
            case Kind::tabulated: {
                if (y < nodes_.front().second) return -kInf;
                const double s = slope_at_end();
                const auto& last = nodes_.back();
                if (y >= last.second) return last.first + (y - last.second) / s;
                for (std::size_t i = nodes_.size() - 1; i > 0; --i) {
                    const auto& [x0, f0] = nodes_[i - 1];
                    const auto& [x1, f1] = nodes_[i];
                    if (y >= f0) return f1 == f0 ? x1 : x0 + (y - f0) * (x1 - x0) / (f1 - f0);
                }
                return nodes_.front().first;
            }
        }
        return -kInf;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::exponential: return "exponential";
            case Kind::hinge: return "hinge";
            case Kind::power_hinge: return "power-hinge";
            case Kind::tabulated: return "tabulated";
        }
        return "?";
    }

private:
    LossFunction(Kind k, double p, std::vector<Node> nodes) : kind_(k), p_(p), nodes_(std::move(nodes)) {
        if (kind_ != Kind::tabulated) return;
        if (nodes_.size() < 2) throw InvalidInput("tabulated loss needs at least two nodes");
        if (nodes_.front().second < 0) throw InvalidInput("tabulated loss must be nonnegative");
        double prev = 0;
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (!(nodes_[i].first > nodes_[i - 1].first)) throw InvalidInput("tabulated loss nodes must ascend");
            const double s = segment_slope(i - 1);
            if (s < prev - 1e-12) throw InvalidInput("tabulated loss must be convex and nondecreasing");
            prev = s;
        }
        if (!(nodes_.front().first <= 0 && nodes_.back().first > 0)) throw InvalidInput("tabulated loss must bracket 0");
        if (std::abs(interpolate(0.0) - 1) > 1e-12) throw InvalidInput("tabulated loss must satisfy l(0) = 1");
        if (!(derivative(0.0) > 0)) throw InvalidInput("tabulated loss must exceed 1 right of 0");
    }

    double segment_slope(std::size_t i) const {
        return (nodes_[i + 1].second - nodes_[i].second) / (nodes_[i + 1].first - nodes_[i].first);
    }
    double slope_at_end() const { return segment_slope(nodes_.size() - 2); }

    double interpolate(double x) const {
        if (x <= nodes_.front().first) return nodes_.front().second;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (x <= nodes_[i + 1].first) return nodes_[i].second + segment_slope(i) * (x - nodes_[i].first);
        return nodes_.back().second + slope_at_end() * (x - nodes_.back().first);
    }

    Kind kind_;
    double p_;
    std::vector<Node> nodes_;
};

/// One condition of a class-membership decision with its sampled evidence.
struct ConditionResult {
    std::string id;
    Verdict verdict = Verdict::inconclusive;
    std::string note;
    std::vector<double> x;
    std::vector<double> values;
};

struct MembershipReport {
    bool is_member = false;
    Verdict verdict = Verdict::inconclusive;
    std::string branch;
    std::vector<ConditionResult> conditions;
    double witness_constant = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {
inline std::vector<double> limit_grid() { return geometric_grid(1.0, 1e6, 10); }

inline ConditionResult limit_condition(const std::string& id, const std::function<double(double)>& log_seq,
                                       LimitTarget target) {
    const auto xs = limit_grid();
    std::vector<double> lv;
    lv.reserve(xs.size());
    for (double x : xs) lv.push_back(log_seq(x));
    const auto ev = limit_verdict(xs, lv, target);
    return ConditionResult{id, ev.verdict, ev.reason, xs, lv};
}

inline MembershipReport finish(MembershipReport r) {
    bool any_fail = false, any_inc = false;
    for (const auto& c : r.conditions) {
        any_fail |= c.verdict == Verdict::fails;
        any_inc |= c.verdict == Verdict::inconclusive;
    }
    r.verdict = any_fail ? Verdict::fails : (any_inc ? Verdict::inconclusive : Verdict::holds);
    r.is_member = r.verdict == Verdict::holds;
    return r;
}
}  // namespace detail

/// Numeric decision of (ℓ, γ) ∈ LΓ. Limits are judged on x ∈ [1, 1e6] in log domain.
inline MembershipReport check_lgamma_membership(const LossFunction& l, const ShapeFunction& g) {
    MembershipReport r;
    const double tiny = 1e-12;

    ConditionResult c1{"1", Verdict::fails, "gamma is +inf on (0, inf)", {}, {}};
    if (g.effective_domain_sup() > 0 && std::isfinite(g(std::min(1.0, g.effective_domain_sup())))) {
        c1.verdict = Verdict::holds;
        c1.note = "gamma finite at a positive point";
    }
    r.conditions.push_back(c1);

    auto log_lg = [&](double x) { return l.log_value(g.conjugate(x)); };
    r.conditions.push_back(detail::limit_condition(
        "2", [&](double x) { return log_lg(x) - 2 * std::log(x); }, LimitTarget::infinity));

    const double g0 = g.value_at_zero();
    const double d1 = g.right_derivative_at_zero();
    if (g0 > tiny) {
        r.branch = "3a";
        const bool nonconstant = g.kind() != ShapeFunction::Kind::tabulated ||
                                 g(g.effective_domain_sup()) > g0;
        r.conditions.push_back(ConditionResult{"3a", nonconstant ? Verdict::holds : Verdict::fails,
                                               nonconstant ? "gamma(0) > 0, nonconstant" : "gamma is constant",
                                               {}, {}});
    } else if (d1 > tiny) {
        r.branch = "3b";
        if (!l.continuously_differentiable()) {
            r.conditions.push_back(ConditionResult{"3b", Verdict::inconclusive,
                                                   "loss derivative unavailable as a continuous function", {}, {}});
        } else if (!(l.derivative(0.0) > 0)) {
            r.conditions.push_back(ConditionResult{"3b", Verdict::fails, "l'(0) = 0", {}, {}});
        } else {
            auto c = detail::limit_condition(
                "3b", [&](double x) { return std::log(x) + l.log_derivative_value(x) - log_lg(x); },
                LimitTarget::zero);
            r.conditions.push_back(c);
        }
    } else {
        const auto d2 = g.second_derivative_at_zero();
        if (!d2) {
            r.branch = "3c";
            r.conditions.push_back(ConditionResult{"3c", Verdict::inconclusive,
                                                   "second derivative of gamma unavailable", {}, {}});
        } else if (!(*d2 > tiny)) {
            r.branch = "not covered by LΓ branches";
            r.conditions.push_back(ConditionResult{"3", Verdict::inconclusive,
                                                   "gamma(0) = gamma'(0) = gamma''(0) = 0: not covered by LΓ branches",
                                                   {}, {}});
        } else {
            r.branch = "3c";
            if (!l.second_derivative(0.0) || !(l.derivative(0.0) > 0)) {
                r.conditions.push_back(ConditionResult{"3c", Verdict::inconclusive,
                                                       "loss second derivative unavailable", {}, {}});
            } else {
                bool nondecr = true;
                double prev = -kInf;
                for (double x = -5.0; x <= 50.0; x += 0.25) {
                    const double v = *l.second_derivative(x);
                    if (v < prev - 1e-12 * (1 + std::abs(prev))) nondecr = false;
                    prev = v;
                }
                if (!nondecr) {
                    r.conditions.push_back(ConditionResult{"3c", Verdict::fails, "l'' is not nondecreasing", {}, {}});
                } else {
                    auto c = detail::limit_condition(
                        "3c",
                        [&](double x) { return 2 * std::log(x) + *l.log_second_derivative(x) - log_lg(x); },
                        LimitTarget::zero);
                    r.conditions.push_back(c);
                }
            }
        }
    }
    return detail::finish(std::move(r));
}

/// A growth function h ≥ 1 given in log form: log h and (log h)′ = h′/h.
struct GrowthFunction {
    std::function<double(double)> log_h;
    std::function<double(double)> dlog_h;

    static GrowthFunction exp_linear() {
        return {[](double t) { return t; }, [](double) { return 1.0; }};
    }
    static GrowthFunction exp_square() {
        return {[](double t) { return t * t; }, [](double t) { return 2 * t; }};
    }
    static GrowthFunction one_plus() {
        return {[](double t) { return std::log1p(t); }, [](double t) { return 1 / (1 + t); }};
    }
    /// exp(t^k)
    static GrowthFunction exp_power(double k) {
        return {[k](double t) { return std::pow(t, k); },
                [k](double t) { return t > 0 ? k * std::pow(t, k - 1) : (k < 1 ? kInf : (k == 1 ? 1.0 : 0.0)); }};
    }
    /// ℓ ∘ γ*.
    static GrowthFunction composed(const LossFunction& l, const ShapeFunction& g) {
        return {[l, g](double t) { return l.log_value(g.conjugate(t)); },
                [l, g](double t) {
                    const double y = g.conjugate(t);
                    if (!std::isfinite(y)) return kInf;
                    const double lam = g.conjugate_argmax(t);
                    return std::exp(l.log_derivative_value(y) - l.log_value(y)) * lam;
                }};
    }
};

/// Integral ∫₀^∞ h′(t)/h(t/c) dt, integrated blockwise on doubling intervals.
struct ClassHIntegral {
    double value = kInf;
    double truncation = 0;
    bool converged = false;
    std::vector<double> block_integrals;
};

inline ClassHIntegral class_h_integral(const GrowthFunction& h, double c, double t_max = 1099511627776.0) {
    if (!(c > 0)) throw InvalidInput("class H constant must be positive");
    auto integrand = [&](double t) {
        const double a = h.log_h(t), b = h.log_h(t / c);
        if (!std::isfinite(a) || !std::isfinite(b)) return kInf;
        const double d = h.dlog_h(t);
        if (d == 0) return 0.0;
        return d * std::exp(a - b);
    };
    // 10-point Gauss-Legendre on 32 panels per block
    static const double xg[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                 0.8650633666889845, 0.9739065285171717};
    static const double wg[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                 0.1494513491505806, 0.0666713443086881};
    auto block = [&](double a, double b) {
        const int panels = 32;
        const double h_ = (b - a) / panels;
        double s = 0;
        for (int k = 0; k < panels; ++k) {
            const double m = a + (k + 0.5) * h_, r = h_ / 2;
            for (int j = 0; j < 5; ++j) s += wg[j] * r * (integrand(m - r * xg[j]) + integrand(m + r * xg[j]));
        }
        return s;
    };
    ClassHIntegral out;
    double total = 0, a = 0, b = 1;
    while (b <= t_max) {
        const double bi = block(a, b);
        out.block_integrals.push_back(bi);
        if (!std::isfinite(bi)) {
            out.truncation = b;
            return out;
        }
        total += bi;
        const double tail = integrand(b);
        // blocks of a log-divergent integrand stay constant however small they are, so
        // convergence also needs geometric decay between consecutive blocks
        // (three consecutive ratios ≤ 0.75, judged from t = 64 on to skip transients)
        const auto& bl = out.block_integrals;
        const bool vanished = bi == 0 && tail == 0;
        bool decaying = bl.size() >= 4;
        double ratio = 0;
        for (std::size_t k = bl.size() - 1; decaying && k + 3 >= bl.size(); --k) {
            ratio = bl[k - 1] > 0 ? bl[k] / bl[k - 1] : kInf;
            decaying = ratio <= 0.75;
        }
        ratio = bl.size() >= 2 && bl[bl.size() - 2] > 0 ? bi / bl[bl.size() - 2] : kInf;
        decaying = decaying && bi * ratio / (1 - ratio) < 1e-12 * std::max(1.0, total);
        if (b >= 64 && tail < 1e-12 && (vanished || decaying)) {
            out.value = total;
            out.truncation = b;
            out.converged = true;
            return out;
        }
        a = b;
        b *= 2;
    }
    out.value = total;
    out.truncation = a;
    return out;
}

/// Decide whether h ∈ H with the given constant c.
inline MembershipReport check_class_h(const GrowthFunction& h, double c) {
    MembershipReport r;
    r.branch = "H";
    r.witness_constant = c;
    const double h0 = h.log_h(0.0);
    ConditionResult base{"h>=1", h0 >= -1e-12 ? Verdict::holds : Verdict::fails,
                         h0 >= -1e-12 ? "h(0) >= 1" : "h(0) < 1", {0.0}, {h0}};
    r.conditions.push_back(base);
    bool mono = true;
    double prev = -kInf;
    for (double t : geometric_grid(1e-3, 1e3, 10)) {
        const double v = h.log_h(t);
        if (v < prev - 1e-12 * (1 + std::abs(prev))) mono = false;
        prev = v;
    }
    r.conditions.push_back(ConditionResult{"nondecreasing", mono ? Verdict::holds : Verdict::fails, "", {}, {}});
    const auto integ = class_h_integral(h, c);
    ConditionResult ci{"integral", integ.converged ? Verdict::holds : Verdict::fails,
                       integ.converged ? "integrand decayed below 1e-12"
                                       : "integrand non-decaying at truncation",
                       {integ.truncation}, integ.block_integrals};
    r.conditions.push_back(ci);
    return detail::finish(std::move(r));
}

/// Search c ∈ {2^-k} for a class-H witness; the first member found is reported.
inline MembershipReport find_class_h_witness(const GrowthFunction& h, int kmax = 12) {
    MembershipReport last;
    for (int k = 1; k <= kmax; ++k) {
        last = check_class_h(h, std::ldexp(1.0, -k));
        if (last.is_member) return last;
    }
    return last;
}

/// The convex nondecreasing φ of an optimized certainty equivalent, with φ*(1) = 0.
class OceFunction {
public:
    enum class Kind { exponential, power, renyi, tabulated };

    /// φ(t) = e^{t−1}
    static OceFunction exponential() { return OceFunction(Kind::exponential, 2.0, {}); }
    /// φ(t) = 1 + (p/q)(t/p)^q on t ≥ 0, 1 on t < 0
    static OceFunction power(double p) { return OceFunction(Kind::power, p, {}); }
    /// φ(t) = (q−1) + (t/q)^q on t ≥ 0, q−1 on t < 0
    static OceFunction renyi(double p) { return OceFunction(Kind::renyi, p, {}); }
    /// Piecewise-linear: constant left of the first node, last slope to the right.
    static OceFunction tabulated(std::vector<Node> nodes) { return OceFunction(Kind::tabulated, 2.0, std::move(nodes)); }

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::exponential: return std::exp(t - 1);
            case Kind::power: return t >= 0 ? 1 + (p_ / q_) * std::pow(t / p_, q_) : 1.0;
            case Kind::renyi: return t >= 0 ? (q_ - 1) + std::pow(t / q_, q_) : q_ - 1;
            case Kind::tabulated: return interpolate(t);
        }
        return kInf;
    }

    /// Right derivative φ′(t).
    double derivative(double t) const {
        switch (kind_) {
            case Kind::exponential: return std::exp(t - 1);
            case Kind::power: return t >= 0 ? std::pow(t / p_, q_ - 1) : 0.0;
            case Kind::renyi: return t >= 0 ? std::pow(t / q_, q_ - 1) : 0.0;
            case Kind::tabulated: {
                if (t < nodes_.front().first) return 0.0;
                for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
                    if (t < nodes_[i + 1].first) return slope(i);
                return slope(nodes_.size() - 2);
            }
        }
        return 0.0;
    }

    /// φ*(s) = sup_t (st − φ(t)).
    double conjugate(double s) const {
        if (std::isnan(s)) return s;
        if (s < 0) return kInf;
        switch (kind_) {
            case Kind::exponential: return s == 0 ? 0.0 : (s == kInf ? kInf : s * std::log(s));
            case Kind::power: return s == kInf ? kInf : std::pow(s, p_) - 1;
            case Kind::renyi: return s == kInf ? kInf : (std::pow(s, p_) - 1) / (p_ - 1);
            case Kind::tabulated:
                if (s > slope(nodes_.size() - 2) * (1 + 1e-15)) return kInf;
                return legendre_conjugate(nodes_, s);
        }
        return kInf;
    }

    /// A point x* with φ′(x*) = 1 (so x* − φ(x*) = 0).
    double pivot() const { return pivot_; }

    /// D(u) = φ(x*+u) − φ(x*) − u ≥ 0, evaluated without cancellation for small u.
    double bregman(double u) const {
        switch (kind_) {
            case Kind::exponential: return std::expm1(u) - u;
            case Kind::power: {
                if (u < -p_) return -p_ / q_ - u;
                const double v = u / p_;
                return (p_ / q_) * (std::expm1(q_ * std::log1p(v)) - q_ * v);
            }
            case Kind::renyi: {
                if (u < -q_) return -1 - u;
                const double w = u / q_;
                return std::expm1(q_ * std::log1p(w)) - q_ * w;
            }
            case Kind::tabulated: return interpolate(pivot_ + u) - interpolate(pivot_) - u;
        }
        return kInf;
    }

    /// Whether bregman() is an exact closed form (catalogued kinds).
    bool closed_form() const { return kind_ != Kind::tabulated; }

    std::string describe() const {
        switch (kind_) {
            case Kind::exponential: return "exponential";
            case Kind::power: return "power";
            case Kind::renyi: return "renyi";
            case Kind::tabulated: return "tabulated";
        }
        return "?";
    }

private:
    OceFunction(Kind k, double p, std::vector<Node> nodes) : kind_(k), p_(p), nodes_(std::move(nodes)) {
        if (kind_ == Kind::power || kind_ == Kind::renyi) {
            if (!(p_ > 1) || !std::isfinite(p_)) throw InvalidSpec("oce exponent must satisfy 1 < p < inf");
        }
        q_ = p_ / (p_ - 1);
        switch (kind_) {
            case Kind::exponential: pivot_ = 1.0; break;
            case Kind::power: pivot_ = p_; break;
            case Kind::renyi: pivot_ = q_; break;
            case Kind::tabulated: init_tabulated(); break;
        }
        // sup_x (x − φ(x)) must vanish
        const auto r = golden_section([this](double x) { return (*this)(x) - x; }, pivot_ - 50, pivot_ + 50, 1e-14);
        if (std::abs(r.value) > 1e-8) throw InvalidSpec("oce function must satisfy sup_x (x - phi(x)) = 0");
    }

    void init_tabulated() {
        if (nodes_.size() < 2) throw InvalidSpec("tabulated phi needs at least two nodes");
        double prev = 0;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            if (!(nodes_[i + 1].first > nodes_[i].first)) throw InvalidSpec("tabulated phi nodes must ascend");
            const double s = slope(i);
            if (s < prev - 1e-12) throw InvalidSpec("tabulated phi must be convex and nondecreasing");
            prev = s;
        }
        if (!(slope(nodes_.size() - 2) > 1)) throw InvalidSpec("tabulated phi must eventually grow faster than t");
        pivot_ = nodes_.back().first;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (slope(i) >= 1) { pivot_ = nodes_[i].first; break; }
    }

    double slope(std::size_t i) const {
        return (nodes_[i + 1].second - nodes_[i].second) / (nodes_[i + 1].first - nodes_[i].first);
    }
    double interpolate(double t) const {
        if (t <= nodes_.front().first) return nodes_.front().second;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (t <= nodes_[i + 1].first) return nodes_[i].second + slope(i) * (t - nodes_[i].first);
        return nodes_.back().second + slope(nodes_.size() - 2) * (t - nodes_.back().first);
    }

    Kind kind_;
    double p_, q_ = 2, pivot_ = 1;
    std::vector<Node> nodes_;
};

}  // namespace liqrisk
