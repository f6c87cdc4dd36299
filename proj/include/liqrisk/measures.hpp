#pragma once

/// Finite probability models, tilted measures Q ≪ P, and penalty functionals α(Q).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convex_core.hpp"
#include "numeric.hpp"

namespace liqrisk {

/// Weighted atoms standing in for (Ω, F, P). Atoms are points in ℝ^d (d = 1 for scalar payoffs).
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;

    DiscreteDistribution(std::vector<std::vector<double>> points, std::vector<double> weights, std::string label = "")
        : points_(std::move(points)), weights_(std::move(weights)), label_(std::move(label)) {
        if (points_.empty()) throw InvalidInput("distribution needs at least one atom");
        if (points_.size() != weights_.size()) throw InvalidInput("atom and weight counts differ");
        dim_ = points_.front().size();
        if (dim_ == 0) throw InvalidInput("atoms must have at least one coordinate");
        double s = 0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (points_[i].size() != dim_) throw InvalidInput("atoms have inconsistent dimension");
            for (double v : points_[i])
                if (!std::isfinite(v)) throw InvalidInput("atom values must be finite");
            if (!(weights_[i] > 0) || !std::isfinite(weights_[i])) throw InvalidInput("weights must be strictly positive");
            s += weights_[i];
        }
        if (std::abs(s - 1) > 1e-12) throw InvalidInput("weights must sum to 1 within 1e-12");
    }

    static DiscreteDistribution scalar(const std::vector<double>& values, std::vector<double> weights,
                                       std::string label = "") {
        std::vector<std::vector<double>> pts;
        pts.reserve(values.size());
        for (double v : values) pts.push_back({v});
        return DiscreteDistribution(std::move(pts), std::move(weights), std::move(label));
    }

    static DiscreteDistribution uniform(const std::vector<double>& values, std::string label = "") {
        return scalar(values, std::vector<double>(values.size(), 1.0 / static_cast<double>(values.size())),
                      std::move(label));
    }

    /// Normalizes arbitrary positive masses into weights.
    static std::vector<double> normalize(std::vector<double> m) {
        const double s = std::accumulate(m.begin(), m.end(), 0.0);
        for (auto& v : m) v /= s;
        return m;
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::vector<double>>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::string& label() const { return label_; }

    /// Scalar atom values (d = 1 only).
    std::vector<double> values() const {
        if (dim_ != 1) throw InvalidInput("values() requires scalar atoms");
        std::vector<double> v;
        v.reserve(points_.size());
        for (const auto& p : points_) v.push_back(p[0]);
        return v;
    }

    /// Coordinate i of every atom.
    std::vector<double> coordinate(std::size_t i) const {
        if (i >= dim_) throw InvalidInput("coordinate index out of range");
        std::vector<double> v;
        v.reserve(points_.size());
        for (const auto& p : points_) v.push_back(p[i]);
        return v;
    }

private:
    std::vector<std::vector<double>> points_;
    std::vector<double> weights_;
    std::string label_;
    std::size_t dim_ = 0;
};

/// A density z = dQ/dP on the atoms of a base distribution.
class TiltedMeasure {
public:
    TiltedMeasure(std::vector<double> base_weights, std::vector<double> density)
        : p_(std::move(base_weights)), z_(std::move(density)) {
        if (p_.size() != z_.size() || p_.empty()) throw InvalidInput("density size must match the atom count");
        double s = 0;
        for (std::size_t i = 0; i < z_.size(); ++i) {
            if (!(z_[i] >= 0) || !std::isfinite(z_[i])) throw InvalidInput("density must be finite and nonnegative");
            s += p_[i] * z_[i];
        }
        if (std::abs(s - 1) > 1e-10) throw InvalidInput("density must integrate to 1 within 1e-10");
    }

    TiltedMeasure(const DiscreteDistribution& base, std::vector<double> density)
        : TiltedMeasure(base.weights(), std::move(density)) {}

    /// Q given by its atom probabilities.
    static TiltedMeasure from_probabilities(const std::vector<double>& base_weights, const std::vector<double>& q) {
        std::vector<double> z(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) z[i] = q[i] / base_weights[i];
        return TiltedMeasure(base_weights, std::move(z));
    }

    static TiltedMeasure reference(const std::vector<double>& base_weights) {
        return TiltedMeasure(base_weights, std::vector<double>(base_weights.size(), 1.0));
    }

    const std::vector<double>& base_weights() const { return p_; }
    const std::vector<double>& density() const { return z_; }

    std::vector<double> probabilities() const {
        std::vector<double> q(p_.size());
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = p_[i] * z_[i];
        return q;
    }

    /// E^Q[x]
    double expectation(const std::vector<double>& x) const {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += p_[i] * z_[i] * x[i];
        return s;
    }

    double max_density() const { return *std::max_element(z_.begin(), z_.end()); }

private:
    std::vector<double> p_;
    std::vector<double> z_;
};

/// H(Q|P) = Σ p z log z with 0·log 0 = 0.
inline double relative_entropy(const TiltedMeasure& q) {
    const auto& p = q.base_weights();
    const auto& z = q.density();
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] > 0) s += p[i] * z[i] * std::log(z[i]);
    return s;
}

/// ‖dQ/dP‖_∞ − 1
inline double sup_norm_minus_one(const TiltedMeasure& q) { return q.max_density() - 1; }

/// ‖dQ/dP‖_{L^r} − 1
inline double lq_norm_minus_one(const TiltedMeasure& q, double r) {
    const auto& p = q.base_weights();
    const auto& z = q.density();
    const double zmax = q.max_density();
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) s += p[i] * std::pow(z[i] / zmax, r);
    return zmax * std::pow(s, 1 / r) - 1;
}

struct PenaltyResult {
    double value = kInf;
    double t_star = 0;
    bool bracket_edge = false;  ///< infimum sat at an end of the search bracket: boundary value returned
};

/// inf_{t>0} (1/t)(1 + E^P[ℓ*(t·z)]): golden section on log t over [1e-8/max(1, ‖z‖∞), 1e8]
/// (upper end clipped to the conjugate's effective domain). The objective is quasi-convex in t.
inline PenaltyResult shortfall_penalty_detail(const TiltedMeasure& q, const LossFunction& l) {
    const auto& p = q.base_weights();
    const auto& z = q.density();
    const double zmax = q.max_density();
    const double lo = std::log(1e-8) - std::log(std::max(1.0, zmax));
    double hi = std::log(1e8);
    bool clipped = false;
    const double dom = l.conjugate_domain_sup();
    if (std::isfinite(dom)) {
        const double cap = std::log(dom / zmax);
        if (cap < hi) { hi = cap; clipped = true; }
    }
    PenaltyResult out;
    if (hi < lo) {
        out.bracket_edge = true;
        return out;
    }
    auto g = [&](double s) {
        const double t = std::exp(s);
        double e = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double c = l.conjugate(t * z[i]);
            if (c == kInf) return kInf;
            e += p[i] * c;
        }
        return (1 + e) / t;
    };
    const auto r = golden_section(g, lo, hi, 1e-13);
    out.value = r.value;
    out.t_star = std::exp(r.x);
    out.bracket_edge = r.at_lower_edge || (r.at_upper_edge && !clipped);
    return out;
}

inline double shortfall_penalty(const TiltedMeasure& q, const LossFunction& l) {
    return shortfall_penalty_detail(q, l).value;
}

/// Σ p_i φ*(z_i); +inf for an infeasible tilt.
inline double phi_divergence(const TiltedMeasure& q, const std::function<double(double)>& phi_star) {
    const auto& p = q.base_weights();
    const auto& z = q.density();
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double v = phi_star(z[i]);
        if (v == kInf) return kInf;
        s += p[i] * v;
    }
    return s;
}

inline double phi_divergence(const TiltedMeasure& q, const OceFunction& phi) {
    return phi_divergence(q, [&phi](double s) { return phi.conjugate(s); });
}

/// Which α(Q) to evaluate.
struct PenaltySpec {
    enum class Kind { relative_entropy, sup_norm_minus_one, lq_norm_minus_one, shortfall, phi_divergence };
    Kind kind = Kind::relative_entropy;
    double exponent = 2;
    std::optional<LossFunction> loss;
    std::optional<OceFunction> phi;

    double operator()(const TiltedMeasure& q) const {
        switch (kind) {
            case Kind::relative_entropy: return relative_entropy(q);
            case Kind::sup_norm_minus_one: return sup_norm_minus_one(q);
            case Kind::lq_norm_minus_one: return lq_norm_minus_one(q, exponent);
            case Kind::shortfall: return shortfall_penalty(q, *loss);
            case Kind::phi_divergence: return phi_divergence(q, *phi);
        }
        return kInf;
    }
};

/// Tilt generators.
struct TiltStrategy {
    enum class Kind { simplex_grid, random, exponential_family };
    Kind kind = Kind::random;
    double step = 0.1;
    std::size_t count = 100;
    std::uint64_t seed = 1;
    std::vector<double> x;
    std::vector<double> thetas;

    static TiltStrategy simplex(double step) { TiltStrategy s; s.kind = Kind::simplex_grid; s.step = step; return s; }
    static TiltStrategy random(std::size_t count, std::uint64_t seed) {
        TiltStrategy s; s.kind = Kind::random; s.count = count; s.seed = seed; return s;
    }
    static TiltStrategy exponential_family(std::vector<double> x, std::vector<double> thetas) {
        TiltStrategy s; s.kind = Kind::exponential_family; s.x = std::move(x); s.thetas = std::move(thetas); return s;
    }
};

namespace detail {
inline double binomial(double n, double k) {
    double r = 1;
    for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
    return r;
}

inline void enumerate_simplex(int remaining, std::size_t pos, std::vector<int>& cur, int n,
                              const std::function<void(const std::vector<int>&)>& emit) {
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        emit(cur);
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        cur[pos] = k;
        enumerate_simplex(remaining - k, pos + 1, cur, n, emit);
    }
}
}  // namespace detail

/// Exponential tilt z ∝ e^{θx}, normalized under the base weights.
inline TiltedMeasure exponential_tilt(const std::vector<double>& weights, const std::vector<double>& x, double theta) {
    std::vector<double> tx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) tx[i] = theta * x[i];
    const double lse = log_mean_exp(tx, weights);
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::exp(tx[i] - lse);
    // renormalize the rounding residue
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) s += weights[i] * z[i];
    for (auto& v : z) v /= s;
    return TiltedMeasure(weights, std::move(z));
}

inline std::vector<TiltedMeasure> sample_tilts(const DiscreteDistribution& base, const TiltStrategy& strategy) {
    const auto& w = base.weights();
    const std::size_t n = base.size();
    std::vector<TiltedMeasure> out;
    switch (strategy.kind) {
        case TiltStrategy::Kind::simplex_grid: {
            if (n > 6) throw InvalidInput("simplex-grid tilts need at most 6 atoms");
            if (!(strategy.step > 0) || strategy.step > 1) throw InvalidInput("simplex step must lie in (0, 1]");
            const int m = static_cast<int>(std::lround(1.0 / strategy.step));
            if (std::abs(m * strategy.step - 1) > 1e-9) throw InvalidInput("simplex step must divide 1");
            const double count = detail::binomial(m + static_cast<double>(n) - 1, static_cast<double>(n) - 1);
            if (count > 1e7) throw SizeError("simplex grid exceeds 1e7 points");
            out.reserve(static_cast<std::size_t>(count));
            std::vector<int> cur(n);
            detail::enumerate_simplex(m, 0, cur, m, [&](const std::vector<int>& k) {
                std::vector<double> q(n);
                for (std::size_t i = 0; i < n; ++i) q[i] = static_cast<double>(k[i]) / m;
                out.push_back(TiltedMeasure::from_probabilities(w, q));
            });
            break;
        }
        case TiltStrategy::Kind::random: {
            std::mt19937_64 rng(strategy.seed);
            std::gamma_distribution<double> g1(1.0), g03(0.3);
            out.reserve(strategy.count);
            for (std::size_t c = 0; c < strategy.count; ++c) {
                const bool sparse = (c % 4) == 3;
                std::vector<double> q(n);
                double s = 0;
                for (auto& v : q) { v = sparse ? g03(rng) : g1(rng); s += v; }
                if (!(s > 0)) { q.assign(n, 1.0); s = static_cast<double>(n); }
                for (auto& v : q) v /= s;
                out.push_back(TiltedMeasure::from_probabilities(w, q));
            }
            break;
        }
        case TiltStrategy::Kind::exponential_family: {
            if (strategy.x.size() != n) throw InvalidInput("exponential family needs one value per atom");
            for (double th : strategy.thetas) out.push_back(exponential_tilt(w, strategy.x, th));
            break;
        }
    }
    return out;
}

}  // namespace liqrisk
