#pragma once

// Liquidity profiles of option payoffs on n-asset atom spaces: calls and puts control all
// 1-Lipschitz payoffs, plus the two direct comparison bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "concentration.hpp"
#include "convex_core.hpp"
#include "measures.hpp"
#include "profiles.hpp"
#include "risk.hpp"

namespace liqrisk {

inline double euclidean_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// A payoff on ℝⁿ₊ with a certified Lipschitz constant for the Euclidean norm.
class OptionPayoff {
public:
    enum class Kind { call, put, basket, affine_min, affine_max, distance };

    struct Piece {
        std::vector<double> a;
        double b = 0;
    };

    /// (x_i − k)⁺
    static OptionPayoff call(std::size_t i, double k) { return OptionPayoff(Kind::call, i, k); }
    /// (k − x_i)⁺
    static OptionPayoff put(std::size_t i, double k) { return OptionPayoff(Kind::put, i, k); }
    /// w · x
    static OptionPayoff basket(std::vector<double> w) {
        OptionPayoff o(Kind::basket, 0, 0);
        o.pieces_.push_back({std::move(w), 0.0});
        return o;
    }
    /// min_j (a_j · x + b_j), optionally floored at 0
    static OptionPayoff affine_min(std::vector<Piece> pieces, bool floor_at_zero = false) {
        return affine(Kind::affine_min, std::move(pieces), floor_at_zero);
    }
    /// max_j (a_j · x + b_j), optionally floored at 0
    static OptionPayoff affine_max(std::vector<Piece> pieces, bool floor_at_zero = false) {
        return affine(Kind::affine_max, std::move(pieces), floor_at_zero);
    }
    /// |x − y|₂
    static OptionPayoff distance(std::vector<double> y) {
        OptionPayoff o(Kind::distance, 0, 0);
        o.pieces_.push_back({std::move(y), 0.0});
        return o;
    }

    Kind kind() const { return kind_; }
    std::size_t asset() const { return i_; }
    double strike() const { return k_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool floored() const { return floor_; }

    double operator()(const std::vector<double>& x) const {
        switch (kind_) {
            case Kind::call: return std::max(x.at(i_) - k_, 0.0);
            case Kind::put: return std::max(k_ - x.at(i_), 0.0);
            case Kind::basket: return dot(pieces_.front().a, x);
            case Kind::distance: {
                const auto& y = pieces_.front().a;
                if (y.size() != x.size()) throw InvalidInput("payoff dimension differs from the atoms");
                double s = 0;
                for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
                return std::sqrt(s);
            }
            case Kind::affine_min:
            case Kind::affine_max: {
                double v = kind_ == Kind::affine_min ? kInf : -kInf;
                for (const auto& p : pieces_) {
                    const double a = dot(p.a, x) + p.b;
                    v = kind_ == Kind::affine_min ? std::min(v, a) : std::max(v, a);
                }
                return floor_ ? std::max(v, 0.0) : v;
            }
        }
        return 0.0;
    }

    /// Certified Euclidean Lipschitz constant: 1 for calls, puts and distances, the largest piece norm otherwise.
    double lipschitz_bound() const {
        switch (kind_) {
            case Kind::call:
            case Kind::put:
            case Kind::distance: return 1.0;
            default: {
                double L = 0;
                for (const auto& p : pieces_) L = std::max(L, euclidean_norm(p.a));
                return L;
            }
        }
    }

    RandomVariable on(const DiscreteDistribution& p) const {
        return RandomVariable(p, [this](const std::vector<double>& x) { return (*this)(x); });
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::call: return "call(" + std::to_string(i_) + ", " + std::to_string(k_) + ")";
            case Kind::put: return "put(" + std::to_string(i_) + ", " + std::to_string(k_) + ")";
            case Kind::basket: return "basket";
            case Kind::distance: return "distance";
            case Kind::affine_min: return std::string(floor_ ? "floored " : "") + "min-of-affine(" +
                                          std::to_string(pieces_.size()) + ")";
            case Kind::affine_max: return std::string(floor_ ? "floored " : "") + "max-of-affine(" +
                                          std::to_string(pieces_.size()) + ")";
        }
        return "payoff";
    }

private:
    OptionPayoff(Kind k, std::size_t i, double strike) : kind_(k), i_(i), k_(strike) {}

    static OptionPayoff affine(Kind k, std::vector<Piece> pieces, bool floor_at_zero) {
        if (pieces.empty()) throw InvalidInput("affine payoff needs at least one piece");
        const std::size_t n = pieces.front().a.size();
        for (const auto& p : pieces)
            if (p.a.size() != n || n == 0) throw InvalidInput("affine pieces must share one dimension");
        OptionPayoff o(k, 0, 0);
        o.pieces_ = std::move(pieces);
        o.floor_ = floor_at_zero;
        return o;
    }

    static double dot(const std::vector<double>& a, const std::vector<double>& x) {
        if (a.size() != x.size()) throw InvalidInput("payoff dimension differs from the atoms");
        double s = 0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * x[j];
        return s;
    }

    Kind kind_;
    std::size_t i_ = 0;
    double k_ = 0;
    std::vector<Piece> pieces_;
    bool floor_ = false;
};

/// min_j (a_j · x + b_j) with |a_j|₂ ≤ 1: a uniform direction scaled by a uniform radius, b_j standard normal.
inline OptionPayoff random_lipschitz(std::size_t n, std::size_t pieces, std::uint64_t seed) {
    if (pieces < 1 || n < 1) throw InvalidInput("random_lipschitz needs n ≥ 1 and pieces ≥ 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.0, 1.0);
    std::vector<OptionPayoff::Piece> ps;
    for (std::size_t j = 0; j < pieces; ++j) {
        std::vector<double> a(n);
        for (auto& v : a) v = nd(rng);
        const double norm = euclidean_norm(a);
        const double r = radius(rng);
        for (auto& v : a) v = norm > 0 ? v / norm * r : 0.0;
        ps.push_back({std::move(a), nd(rng)});
    }
    return OptionPayoff::affine_min(std::move(ps));
}

/// Largest |f(x) − f(y)| / |x − y|₂ over distinct atom pairs.
inline double empirical_lipschitz(const OptionPayoff& f, const DiscreteDistribution& p) {
    const auto& pts = p.points();
    std::vector<double> v;
    for (const auto& x : pts) v.push_back(f(x));
    double L = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double d = 0;
            for (std::size_t k = 0; k < pts[i].size(); ++k) d += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
            d = std::sqrt(d);
            if (d > 0) L = std::max(L, std::abs(v[i] - v[j]) / d);
        }
    return L;
}

/// Lower median of asset i.
inline double median_strike(const DiscreteDistribution& p, std::size_t i = 0) {
    const auto v = p.coordinate(i);
    std::vector<std::size_t> idx(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    double cum = 0;
    for (std::size_t k : idx) {
        cum += p.weights()[k];
        if (cum >= 0.5 - 1e-12) return v[k];
    }
    return v[idx.back()];
}

/// The 2n calls and puts struck at k.
inline std::vector<OptionPayoff> calls_and_puts(std::size_t n, double k) {
    std::vector<OptionPayoff> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(OptionPayoff::call(i, k));
        out.push_back(OptionPayoff::put(i, k));
    }
    return out;
}

struct SandwichCheck {
    bool identity_exact = true;   ///< C + P == |x_i − k| bitwise on every atom
    bool norm_bounds = true;      ///< |x − k⃗| ≤ √2 Σ(C + P) ≤ √(2n) |x − k⃗| on every atom
    double worst_lower = -kInf;   ///< max |x − k⃗| − √2 Σ(C + P)
    double worst_upper = -kInf;   ///< max √2 Σ(C + P) − √(2n) |x − k⃗|
};

inline SandwichCheck sandwich_check(const DiscreteDistribution& p, double k) {
    SandwichCheck s;
    const double n = static_cast<double>(p.dim());
    for (const auto& x : p.points()) {
        double sum = 0, sq = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double cp = OptionPayoff::call(i, k)(x) + OptionPayoff::put(i, k)(x);
            if (cp != std::abs(x[i] - k)) s.identity_exact = false;
            sum += cp;
            sq += (x[i] - k) * (x[i] - k);
        }
        const double norm = std::sqrt(sq);
        const double mid = std::sqrt(2.0) * sum;
        const double tol = 1e-12 * (1 + norm);
        s.worst_lower = std::max(s.worst_lower, norm - mid);
        s.worst_upper = std::max(s.worst_upper, mid - std::sqrt(2 * n) * norm);
        if (norm > mid + tol || mid > std::sqrt(2 * n) * norm + tol) s.norm_bounds = false;
    }
    return s;
}

struct OptionBatteryOptions {
    std::vector<double> lambda_grid;    ///< empty: the concentration battery's extended grid
    double moment_threshold = 1e6;      ///< condition (3) counts as finite when the integral stays below
    bool include_calls_puts = true;     ///< add the 2n calls and puts to the Lipschitz family of condition (2)
};

struct OptionBatteryReport {
    double strike = 0;
    std::vector<BatteryCondition> conditions;   ///< "1", "2", "3"
    std::vector<BatteryArrow> arrows;
    MembershipReport lgamma;
    MembershipReport class_h;
    bool premise = false;                        ///< both memberships certified
    double moment_log = kInf;                    ///< log ∫ ℓ(γ*(|x|/c₃)) dP at the witness
    std::vector<double> payoff_witness;          ///< per-payoff smallest c for condition (2); +inf when none
    std::vector<std::string> payoff_names;
    std::vector<double> lambda_grid;
    std::vector<double> call_put_envelope;       ///< max of the 2n centered call/put profiles; a reference curve only

    bool violation() const {
        return std::any_of(arrows.begin(), arrows.end(), [](const auto& a) { return a.asserted && !a.holds; });
    }
    const BatteryCondition& condition(const std::string& id) const {
        for (const auto& c : conditions)
            if (c.id == id) return c;
        throw InvalidInput("unknown option condition " + id);
    }
};

/// Witness constants for the call/put bound (1), the Lipschitz bound (2) over the supplied payoffs,
/// and the norm moment (3), with the proposition's arrows checked on the verdicts.
inline OptionBatteryReport option_profile_bound_battery(const DiscreteDistribution& p, const LossFunction& l,
                                                        const ShapeFunction& g, double k,
                                                        const std::vector<OptionPayoff>& test_payoffs,
                                                        const OptionBatteryOptions& opt = {}) {
    for (const auto& x : p.points())
        for (double v : x)
            if (v < 0) throw InvalidInput("option atoms must lie in the nonnegative orthant");
    const auto spec = RiskMeasureSpec::shortfall(l);
    const auto grid = opt.lambda_grid.empty() ? detail::battery_grid() : opt.lambda_grid;
    const std::size_t n = p.dim();

    OptionBatteryReport rep;
    rep.strike = k;
    rep.lambda_grid = grid;
    rep.lgamma = check_lgamma_membership(l, g);
    rep.class_h = find_class_h_witness(GrowthFunction::composed(l, g));
    rep.premise = rep.lgamma.is_member && rep.class_h.is_member;

    auto to_condition = [](const std::string& id, const ScalingConstant& s) {
        BatteryCondition c;
        c.id = id;
        c.found = s.found;
        c.c = s.c;
        c.index = s.index;
        return c;
    };

    std::vector<RandomVariable> cp;
    for (const auto& f : calls_and_puts(n, k)) cp.push_back(f.on(p));
    const auto s1 = find_scaling_constant(spec, cp, g, grid);
    rep.conditions.push_back(to_condition("1", s1));
    rep.call_put_envelope.assign(grid.size(), -kInf);
    for (const auto& prof : s1.profiles)
        for (std::size_t i = 0; i < grid.size(); ++i)
            rep.call_put_envelope[i] = std::max(rep.call_put_envelope[i], prof.values[i]);

    std::vector<OptionPayoff> family;
    if (opt.include_calls_puts) family = calls_and_puts(n, k);
    for (const auto& f : test_payoffs) {
        if (f.lipschitz_bound() > 1 + 1e-12) throw InvalidInput("test payoff " + f.describe() + " is not 1-Lipschitz");
        family.push_back(f);
    }
    if (family.empty()) throw InvalidInput("condition (2) needs at least one payoff");
    std::vector<RandomVariable> fx;
    for (const auto& f : family) fx.push_back(f.on(p));
    const auto s2 = find_scaling_constant(spec, fx, g, grid);
    rep.conditions.push_back(to_condition("2", s2));
    const auto& cs = witness_grid();
    for (std::size_t j = 0; j < family.size(); ++j) {
        const auto& prof = s2.profiles[j];
        const auto kj = first_true(cs.size(), [&](std::size_t i) { return check_concentration_refined(spec, fx[j], prof, g, cs[i]).certified(); });
        rep.payoff_witness.push_back(kj ? cs[*kj] : kInf);
        rep.payoff_names.push_back(family[j].describe());
    }

    std::vector<double> norms;
    for (const auto& x : p.points()) norms.push_back(euclidean_norm(x));
    const RandomVariable r(norms, p.weights());
    const double log_thr = std::log(opt.moment_threshold);
    const auto k3 = first_true(cs.size(), [&](std::size_t i) {
        return integral_moment(r, l, g, 1 / cs[i]).log_value <= log_thr;
    });
    BatteryCondition c3;
    c3.id = "3";
    if (k3) {
        c3.found = true;
        c3.index = *k3;
        c3.c = cs[*k3];
        rep.moment_log = integral_moment(r, l, g, 1 / c3.c).log_value;
    }
    rep.conditions.push_back(c3);

    const auto& c1 = rep.conditions[0];
    const auto& c2 = rep.conditions[1];
    // (3) ⇒ (2) needs only the LΓ pair; anything leaving (1) or (2) towards (3) needs ℓ∘γ* ∈ H.
    const bool lg = rep.lgamma.is_member, h = rep.class_h.is_member;
    rep.arrows.push_back({"(2)=>(1)", opt.include_calls_puts,
                          !c2.found || (c1.found && c1.index <= c2.index), "calls and puts are 1-Lipschitz"});
    rep.arrows.push_back({"(3)=>(2)", lg, !c3.found || c2.found, lg ? "" : "LGamma membership not certified"});
    rep.arrows.push_back({"(3)=>(1)", lg, !c3.found || c1.found, lg ? "" : "LGamma membership not certified"});
    rep.arrows.push_back({"(1)=>(3)", rep.premise, !c1.found || c3.found, rep.premise ? "" : "membership premise not certified"});
    rep.arrows.push_back({"(1)=>(2)", rep.premise, !c1.found || c2.found, rep.premise ? "" : "membership premise not certified"});
    rep.arrows.push_back({"(2)=>(3)", h, !c2.found || c3.found, h ? "" : "class H membership not certified"});
    return rep;
}

inline OptionBatteryReport option_profile_bound_battery(const DiscreteDistribution& p, const LossFunction& l,
                                                        const ShapeFunction& g,
                                                        const std::vector<OptionPayoff>& test_payoffs,
                                                        const OptionBatteryOptions& opt = {}) {
    return option_profile_bound_battery(p, l, g, median_strike(p, 0), test_payoffs, opt);
}

struct SimpleBoundComparison {
    bool crossing_found = false;         ///< a point y with f(y) = E f on the searched segment
    std::vector<double> y;
    std::vector<double> lambda_grid;
    std::vector<double> actual;          ///< ρ(λ(f − E f))
    std::vector<double> bound_a;         ///< ρ(λ Σ|x_i − y_i|), empty without a crossing
    std::vector<double> bound_b;         ///< Σ_j p_j ρ(λ Σ|x_i − y_{j,i}|) over the atoms y_j
    std::vector<double> worst_strike;    ///< max_j ρ(λ Σ|x_i − y_{j,i}|)
    std::vector<double> uniform;         ///< γ(cλ) when a constant is supplied
    bool a_holds = true;
    bool b_holds = true;
    bool worst_dominates = true;
    bool uniform_holds = true;
};

namespace detail {
inline RandomVariable l1_distance_to(const DiscreteDistribution& p, const std::vector<double>& y) {
    return RandomVariable(p, [&](const std::vector<double>& x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
        return s;
    });
}
}  // namespace detail

/// The two direct arguments: a mean-matching strike y (bound A) and the average over atom strikes (bound B),
/// compared with the actual centered profile and, when c > 0, with γ(cλ).
inline SimpleBoundComparison simple_bound_comparison(const DiscreteDistribution& p, const RiskMeasureSpec& spec,
                                                     const OptionPayoff& f, const std::vector<double>& grid,
                                                     const ShapeFunction* g = nullptr, double c = 0,
                                                     double tol = 1e-9) {
    for (double lam : grid)
        if (!(lam >= 0) || !std::isfinite(lam)) throw InvalidInput("lambda grid must be finite and nonnegative");
    SimpleBoundComparison out;
    out.lambda_grid = grid;
    const auto fx = f.on(p);
    const double mean = fx.mean();

    // Bisection along the segment from the argmin atom to the argmax atom, where f crosses E f.
    const auto& pts = p.points();
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (fx.values()[i] < fx.values()[lo]) lo = i;
        if (fx.values()[i] > fx.values()[hi]) hi = i;
    }
    auto point = [&](double t) {
        std::vector<double> y(pts[lo].size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = pts[lo][i] + t * (pts[hi][i] - pts[lo][i]);
        return y;
    };
    if (fx.values()[lo] == fx.values()[hi]) {
        out.crossing_found = true;
        out.y = pts[lo];
    } else if (fx.values()[lo] <= mean && mean <= fx.values()[hi]) {
        double a = 0, b = 1;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            const double m = 0.5 * (a + b);
            (f(point(m)) < mean ? a : b) = m;
        }
        out.y = point(b);
        // f(y) ≥ E f at the right end: f − E f ≤ f − f(y) ≤ |x − y|₂ ≤ ‖x − y‖₁ survives the residual.
        out.crossing_found = std::abs(f(out.y) - mean) <= 1e-9 * (1 + std::abs(mean));
    }

    const auto centered = fx.centered();
    std::vector<RandomVariable> strikes;
    for (const auto& y : pts) strikes.push_back(detail::l1_distance_to(p, y));
    RandomVariable ya;
    if (out.crossing_found) ya = detail::l1_distance_to(p, out.y);
    for (double lam : grid) {
        const double act = rho_scaled(spec, centered, lam);
        out.actual.push_back(act);
        if (out.crossing_found) {
            // the residual f(y) − E f (≥ 0 up to rounding) is added back so the bound stays rigorous
            const double a = rho_scaled(spec, ya, lam) + lam * std::max(0.0, f(out.y) - mean);
            out.bound_a.push_back(a);
            if (act > a + tol) out.a_holds = false;
        }
        double avg = 0, worst = -kInf;
        for (std::size_t j = 0; j < strikes.size(); ++j) {
            const double v = rho_scaled(spec, strikes[j], lam);
            avg += p.weights()[j] * v;
            worst = std::max(worst, v);
        }
        out.bound_b.push_back(avg);
        out.worst_strike.push_back(worst);
        if (act > avg + tol) out.b_holds = false;
        if (worst < avg - tol) out.worst_dominates = false;
        if (g && c > 0) {
            const double u = (*g)(c * lam);
            out.uniform.push_back(u);
            if (act > u + tol) out.uniform_holds = false;
        }
    }
    return out;
}

}  // namespace liqrisk
