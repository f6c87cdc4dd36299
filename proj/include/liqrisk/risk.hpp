#pragma once

/// Risk measures on finite distributions: entropic, shortfall and optimized certainty equivalent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "convex_core.hpp"
#include "measures.hpp"
#include "numeric.hpp"

namespace liqrisk {

struct RiskMeasureSpec {
    enum class Kind { entropic, shortfall, oce };
    Kind kind = Kind::entropic;
    std::optional<LossFunction> loss;
    std::optional<OceFunction> phi;
    /// Absolute bracket width at which root searches stop; 0 runs bisection to machine precision.
    double root_tolerance = 1e-10;
    int bracket_expansion_limit = 60;

    static RiskMeasureSpec entropic() { return {}; }
    static RiskMeasureSpec shortfall(LossFunction l) {
        RiskMeasureSpec s;
        s.kind = Kind::shortfall;
        s.loss = std::move(l);
        return s;
    }
    static RiskMeasureSpec oce(OceFunction f) {
        RiskMeasureSpec s;
        s.kind = Kind::oce;
        s.phi = std::move(f);
        return s;
    }

    RiskMeasureSpec with_tolerance(double tol) const {
        RiskMeasureSpec s = *this;
        s.root_tolerance = tol;
        return s;
    }

    std::string describe() const {
        switch (kind) {
            case Kind::entropic: return "entropic";
            case Kind::shortfall: return "shortfall(" + loss->describe() + ")";
            case Kind::oce: return "oce(" + phi->describe() + ")";
        }
        return "?";
    }
};

/// A real payoff on the atoms of a distribution. Values are materialized once.
class RandomVariable {
public:
    RandomVariable() = default;

    RandomVariable(std::vector<double> values, std::vector<double> weights)
        : x_(std::move(values)), w_(std::move(weights)) {
        if (x_.empty() || x_.size() != w_.size()) throw InvalidInput("random variable needs one value per atom");
        for (double v : x_)
            if (!std::isfinite(v)) throw InvalidInput("payoff must be finite on every atom");
    }

    /// Scalar atoms taken as the payoff itself.
    explicit RandomVariable(const DiscreteDistribution& base) : RandomVariable(base.values(), base.weights()) {}

    RandomVariable(const DiscreteDistribution& base, const std::function<double(const std::vector<double>&)>& payoff)
        : w_(base.weights()) {
        x_.reserve(base.size());
        for (const auto& p : base.points()) x_.push_back(payoff(p));
        for (double v : x_)
            if (!std::isfinite(v)) throw InvalidInput("payoff must be finite on every atom");
    }

    const std::vector<double>& values() const { return x_; }
    const std::vector<double>& weights() const { return w_; }
    std::size_t size() const { return x_.size(); }

    double mean() const { return weighted_sum(x_, w_); }
    double max() const { return *std::max_element(x_.begin(), x_.end()); }
    double min() const { return *std::min_element(x_.begin(), x_.end()); }

    RandomVariable scaled(double lambda) const {
        RandomVariable r = *this;
        for (auto& v : r.x_) v *= lambda;
        return r;
    }
    RandomVariable shifted(double c) const {
        RandomVariable r = *this;
        for (auto& v : r.x_) v += c;
        return r;
    }
    RandomVariable centered() const { return shifted(-mean()); }

    /// Atomwise sum; both variables must live on the same atoms.
    RandomVariable operator+(const RandomVariable& o) const {
        if (o.size() != size()) throw InvalidInput("random variables live on different atoms");
        RandomVariable r = *this;
        for (std::size_t i = 0; i < x_.size(); ++i) r.x_[i] += o.x_[i];
        return r;
    }

private:
    std::vector<double> x_;
    std::vector<double> w_;
};

/// Value of ρ together with the inner optimizer (shortfall root, or OCE minimizer m*).
struct RiskEvaluation {
    double value = 0;
    double argument = 0;
};

namespace detail {

inline RiskEvaluation shortfall_eval(const RiskMeasureSpec& spec, const std::vector<double>& x,
                                     const std::vector<double>& w) {
    const LossFunction& l = *spec.loss;
    const double mn = *std::min_element(x.begin(), x.end());
    const double mx = *std::max_element(x.begin(), x.end());
    if (mn == mx) return {mn, mn};
    auto excess = [&](double c) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * l.excess(x[i] - c);
        return s;
    };
    double lo = mn - 1, hi = mx + 1;
    // ℓ(1) > 1 and ℓ(−1) ≤ 1 certify this bracket; expansion guards tabulated rounding only
    for (int k = 0; excess(lo) <= 0; ++k) {
        if (k >= spec.bracket_expansion_limit) throw UnboundedRisk("shortfall bracket expansion exceeded the limit");
        lo -= std::ldexp(1.0, k) * (1 + mx - mn);
    }
    for (int k = 0; excess(hi) > 0; ++k) {
        if (k >= spec.bracket_expansion_limit) throw UnboundedRisk("shortfall bracket expansion exceeded the limit");
        hi += std::ldexp(1.0, k) * (1 + mx - mn);
    }
    // leftmost c with E[ℓ(X − c)] ≤ 1; keep going until the residual is tiny as well
    double f_hi = excess(hi);
    for (int it = 0; it < 4000; ++it) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        if (spec.root_tolerance > 0 && hi - lo <= spec.root_tolerance && f_hi >= -1e-11) break;
        const double f = excess(mid);
        if (f <= 0) { hi = mid; f_hi = f; } else lo = mid;
    }
    return {hi, hi};
}

inline RiskEvaluation oce_eval(const RiskMeasureSpec& spec, const std::vector<double>& x,
                               const std::vector<double>& w) {
    const OceFunction& phi = *spec.phi;
    const double mn = *std::min_element(x.begin(), x.end());
    const double mx = *std::max_element(x.begin(), x.end());
    const double mean = weighted_sum(x, w);
    const double xs = phi.pivot();
    if (mn == mx) return {mn, xs - mn};
    // ρ = E X + min_δ E[D(δ + X)], D the Bregman remainder of φ at its pivot x*.
    // The right derivative E φ′(x* + δ + X) − 1 changes sign on [−max X, −min X].
    auto slope_nonneg = [&](double d) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * phi.derivative(xs + d + x[i]);
        return s >= 1;
    };
    double lo = -mx, hi = -mn;
    if (slope_nonneg(lo)) hi = lo;
    double delta = hi;
    if (hi > lo) {
        const double tol = spec.root_tolerance > 0 ? spec.root_tolerance : 0.0;
        delta = bisect_boundary(slope_nonneg, lo, hi, tol);
    }
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * phi.bregman(delta + x[i]);
    return {mean + s, xs + delta};
}

}  // namespace detail

/// ρ on raw atom values and weights.
inline RiskEvaluation evaluate_risk(const RiskMeasureSpec& spec, const std::vector<double>& x,
                                    const std::vector<double>& w) {
    switch (spec.kind) {
        case RiskMeasureSpec::Kind::entropic: {
            const double v = log_mean_exp(x, w);
            return {v, v};
        }
        case RiskMeasureSpec::Kind::shortfall:
            if (!spec.loss) throw InvalidSpec("shortfall spec without a loss function");
            return detail::shortfall_eval(spec, x, w);
        case RiskMeasureSpec::Kind::oce:
            if (!spec.phi) throw InvalidSpec("oce spec without a phi function");
            return detail::oce_eval(spec, x, w);
    }
    throw InvalidSpec("unknown risk kind");
}

inline double rho(const RiskMeasureSpec& spec, const std::vector<double>& x, const std::vector<double>& w) {
    return evaluate_risk(spec, x, w).value;
}

inline double rho(const RiskMeasureSpec& spec, const RandomVariable& x) {
    return rho(spec, x.values(), x.weights());
}

/// ρ(λX) without materializing a RandomVariable.
inline double rho_scaled(const RiskMeasureSpec& spec, const RandomVariable& x, double lambda) {
    std::vector<double> v(x.values());
    for (auto& a : v) a *= lambda;
    return rho(spec, v, x.weights());
}

/// The penalty α(Q) matched to the risk kind.
inline double penalty(const RiskMeasureSpec& spec, const TiltedMeasure& q) {
    switch (spec.kind) {
        case RiskMeasureSpec::Kind::entropic: return relative_entropy(q);
        case RiskMeasureSpec::Kind::shortfall: return shortfall_penalty(q, *spec.loss);
        case RiskMeasureSpec::Kind::oce: return phi_divergence(q, *spec.phi);
    }
    return kInf;
}

/// The tilt attaining sup_Q (E^Q X − α(Q)).
inline TiltedMeasure optimal_tilt(const RiskMeasureSpec& spec, const std::vector<double>& x,
                                  const std::vector<double>& w) {
    std::vector<double> z(x.size());
    switch (spec.kind) {
        case RiskMeasureSpec::Kind::entropic: return exponential_tilt(w, x, 1.0);
        case RiskMeasureSpec::Kind::shortfall: {
            const double c = evaluate_risk(spec, x, w).value;
            for (std::size_t i = 0; i < x.size(); ++i) z[i] = spec.loss->derivative(x[i] - c);
            break;
        }
        case RiskMeasureSpec::Kind::oce: {
            const double m = evaluate_risk(spec, x, w).argument;
            for (std::size_t i = 0; i < x.size(); ++i) z[i] = spec.phi->derivative(m + x[i]);
            break;
        }
    }
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) s += w[i] * z[i];
    if (!(s > 0)) return TiltedMeasure::reference(w);
    for (auto& v : z) v /= s;
    return TiltedMeasure(w, std::move(z));
}

inline TiltedMeasure optimal_tilt(const RiskMeasureSpec& spec, const RandomVariable& x) {
    return optimal_tilt(spec, x.values(), x.weights());
}

/// max over the tilts of E^Q X − α(Q).
inline double dual_lower_bound(const RiskMeasureSpec& spec, const RandomVariable& x,
                               const std::vector<TiltedMeasure>& tilts) {
    if (tilts.empty()) throw InvalidInput("dual_lower_bound needs at least one tilt");
    double best = -kInf;
    for (const auto& q : tilts) {
        const double a = penalty(spec, q);
        if (a == kInf) continue;
        best = std::max(best, q.expectation(x.values()) - a);
    }
    return best;
}

/// E[X | G] where G is generated by a block label per atom, as a variable on the same atoms.
inline RandomVariable conditional_expectation(const RandomVariable& x, const std::vector<std::size_t>& block) {
    if (block.size() != x.size()) throw InvalidInput("one block label per atom is required");
    std::map<std::size_t, std::pair<double, double>> sums;  // label -> (mass, Σ p x)
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& s = sums[block[i]];
        s.first += x.weights()[i];
        s.second += x.weights()[i] * x.values()[i];
    }
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& s = sums[block[i]];
        v[i] = s.second / s.first;
    }
    return RandomVariable(v, x.weights());
}

/// ρ of the payoff conditional on the first coordinate of a two-coordinate joint.
inline std::map<double, double> conditional_rho(const RiskMeasureSpec& spec, const DiscreteDistribution& joint,
                                                const std::function<double(double, double)>& payoff) {
    if (joint.dim() != 2) throw InvalidInput("conditional_rho needs a two-coordinate joint");
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        const auto& p = joint.points()[i];
        auto& g = groups[p[0]];
        g.first.push_back(payoff(p[0], p[1]));
        g.second.push_back(joint.weights()[i]);
    }
    std::map<double, double> out;
    for (auto& [a, g] : groups) {
        const double mass = std::accumulate(g.second.begin(), g.second.end(), 0.0);
        if (!(mass > 0)) continue;
        for (auto& v : g.second) v /= mass;
        out[a] = rho(spec, g.first, g.second);
    }
    return out;
}

}  // namespace liqrisk
