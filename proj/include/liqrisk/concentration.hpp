#pragma once

/// Tail bounds implied by concentration inequalities, moment conditions, the four-way
/// equivalence battery for shortfall risk, and tensorization checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convex_core.hpp"
#include "duality.hpp"
#include "measures.hpp"
#include "numeric.hpp"
#include "profiles.hpp"
#include "risk.hpp"

namespace liqrisk {

// ---------------------------------------------------------------------------
// Tail bounds

/// P(X > t) ≤ 1/ℓ(γ*(t)) for X with ρ(λX) ≤ γ(λ); clipped to [0, 1].
inline double tail_bound_shortfall(const ShapeFunction& g, const LossFunction& l, double t) {
    const double y = g.conjugate(t);
    if (y == kInf) return 0.0;
    const double lv = l.log_value(y);
    if (lv == kInf) return 0.0;
    return std::clamp(std::exp(-lv), 0.0, 1.0);
}

struct TailBound {
    double value = 1;
    bool vacuous = false;  ///< the supremum runs off to the edge of the search range
};

/// P(X > s) ≤ sup_{m>0} m/φ(m + γ*(s)) for an OCE with φ > 0.
inline TailBound tail_bound_oce(const ShapeFunction& g, const OceFunction& phi, double s) {
    const double a = g.conjugate(s);
    if (a == kInf) return {0.0, false};
    if (phi.kind() == OceFunction::Kind::exponential) return {std::min(1.0, std::exp(-a)), false};
    if (phi.kind() == OceFunction::Kind::power && phi.exponent() == 2 && a >= 0) {
        const double r = std::sqrt(a * a + 4);
        return {std::min(1.0, 2 * r / (4 + a * a + a * r)), false};
    }
    if (!(phi(a) > 0)) throw InvalidInput("oce tail bound needs phi > 0");
    // m/φ(m + a) is quasi-concave in m; search on log m
    auto neg = [&](double u) {
        const double m = std::exp(u);
        return -m / phi(m + a);
    };
    const double lo = std::log(1e-12), hi = std::log(1e12);
    const auto r = golden_section(neg, lo, hi, 1e-12);
    TailBound out{std::min(1.0, -r.value), false};
    if (r.at_upper_edge) out = {1.0, true};
    return out;
}

// ---------------------------------------------------------------------------
// Moments

struct IntegralMoment {
    double value = 0;           ///< E ℓ(γ*(c X⁺)), +inf on overflow
    double log_value = 0;
    double max_term_share = 0;  ///< largest single-atom contribution over the total
};

/// E ℓ(γ*(c·X⁺)), or E ℓ(γ*(c·|X|)) when symmetric, as an exact weighted sum in log space.
inline IntegralMoment integral_moment(const RandomVariable& x, const LossFunction& l, const ShapeFunction& g, double c,
                                      bool symmetric = false) {
    if (!(c > 0)) throw InvalidInput("moment constant must be positive");
    std::vector<double> logs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.values()[i];
        const double arg = symmetric ? std::abs(v) : std::max(v, 0.0);
        logs[i] = l.log_value(g.conjugate(c * arg));
    }
    IntegralMoment m;
    if (std::all_of(logs.begin(), logs.end(), [](double v) { return v == -kInf; })) {
        m.value = 0;
        m.log_value = -kInf;
        return m;
    }
    m.log_value = log_mean_exp(logs, x.weights());
    m.value = m.log_value > std::log(std::numeric_limits<double>::max()) ? kInf : std::exp(m.log_value);
    double top = -kInf;
    for (std::size_t i = 0; i < x.size(); ++i) top = std::max(top, std::log(x.weights()[i]) + logs[i]);
    m.max_term_share = std::exp(top - m.log_value);
    return m;
}

/// 1 + C·∫ h′(t)/h(t/c) dt, a bound on E h(c X⁺) whenever P(X > t) ≤ C/h(t).
inline double tail_to_integral_bound(const GrowthFunction& h, double c, double tail_constant) {
    if (tail_constant < 0) throw InvalidInput("tail constant must be nonnegative");
    if (tail_constant == 0) return 1.0;
    const auto integ = class_h_integral(h, c);
    if (!integ.converged) throw InvalidInput("class H integral diverges: no finite moment bound for this constant");
    return 1 + tail_constant * integ.value;
}

// ---------------------------------------------------------------------------
// Exact discrete tail comparisons

struct TailDominance {
    bool holds = true;
    double worst_log_ratio = -kInf;  ///< max over positive atoms a of log P(X ≥ a) + log ℓ(γ*(a))
    double worst_atom = 0;
    std::size_t violations = 0;
};

namespace detail {
/// Positive atoms in descending order with P(X ≥ a).
inline std::vector<std::pair<double, double>> upper_tails(const RandomVariable& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x.values()[a] > x.values()[b]; });
    std::vector<std::pair<double, double>> out;
    double mass = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double v = x.values()[idx[k]];
        mass += x.weights()[idx[k]];
        if (v <= 0) break;
        const bool last_of_value = k + 1 == idx.size() || x.values()[idx[k + 1]] != v;
        if (last_of_value) out.emplace_back(v, std::min(mass, 1.0));
    }
    return out;
}
}  // namespace detail

/// P(X ≥ a) ≤ 1/ℓ(γ*(a)) at every positive atom a. This is the left limit of the bound on
/// P(X > t) as t ↑ a, hence implies it at every threshold t > 0.
inline TailDominance tail_dominance(const RandomVariable& x, const LossFunction& l, const ShapeFunction& g,
                                    double tol = 1e-9) {
    TailDominance r;
    for (const auto& [a, p] : detail::upper_tails(x)) {
        const double lr = std::log(p) + l.log_value(g.conjugate(a));
        if (lr > r.worst_log_ratio) {
            r.worst_log_ratio = lr;
            r.worst_atom = a;
        }
        if (lr > std::log1p(tol)) ++r.violations;
    }
    r.holds = r.violations == 0;
    return r;
}

/// Markov's inequality P(X ≥ a) ≤ E ℓ(γ*(X⁺))/ℓ(γ*(a)) at every positive atom; count of failures.
inline std::size_t markov_violations(const RandomVariable& x, const LossFunction& l, const ShapeFunction& g) {
    const auto m = integral_moment(x, l, g, 1.0);
    std::size_t bad = 0;
    for (const auto& [a, p] : detail::upper_tails(x)) {
        const double lhs = std::log(p) + l.log_value(g.conjugate(a));
        if (lhs > m.log_value + 1e-12 * (1 + std::abs(m.log_value))) ++bad;
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Equivalence battery

struct BatteryOptions {
    std::vector<double> lambda_grid;  ///< empty: default grid extended to 1e6
    std::size_t random_tilts = 8;
    std::uint64_t seed = 7;
    double moment_threshold = 1e6;    ///< a moment counts as finite when it stays below this
};

struct BatteryCondition {
    std::string id;
    bool found = false;
    double c = kInf;       ///< smallest witness c, in the γ(cλ) convention
    std::size_t index = 0;
    /// The witness expressed as the multiplier κ = 1/c inside γ*(κ·): tail and moment form.
    double kappa() const { return found ? 1 / c : 0.0; }
};

struct BatteryArrow {
    std::string name;
    bool asserted = false;
    bool holds = true;
    std::string note;
};

struct BatteryReport {
    std::vector<BatteryCondition> conditions;  ///< "1".."4"
    std::vector<BatteryArrow> arrows;
    MembershipReport lgamma;
    MembershipReport class_h;
    std::size_t members = 0;
    std::size_t markov_violations = 0;
    double max_moment_log = -kInf;  ///< log sup_X E ℓ(γ*(X⁺/c₄)) at the reported witness
    bool violation() const {
        if (markov_violations > 0) return true;
        return std::any_of(arrows.begin(), arrows.end(), [](const auto& a) { return a.asserted && !a.holds; });
    }
    const BatteryCondition& condition(const std::string& id) const {
        for (const auto& c : conditions)
            if (c.id == id) return c;
        throw InvalidInput("unknown battery condition " + id);
    }
};

namespace detail {
inline std::vector<double> battery_grid() {
    auto g = default_lambda_grid();
    for (double v : geometric_grid(1e2, 1e6, 5))
        if (v > g.back()) g.push_back(v);
    return g;
}

struct BatteryMember {
    RandomVariable x;
    RiskProfile profile;
    TiltTable tilts;
    std::map<double, double> extension;  ///< ρ(λX) beyond the grid, by λ
};
}  // namespace detail

/// Evaluates the four conditions of the equivalence theorem for shortfall(ℓ) on a centered family,
/// each with its own smallest witness on the shared constant grid, and checks the implication arrows.
inline BatteryReport equivalence_battery(const std::vector<RandomVariable>& family, const LossFunction& l,
                                         const ShapeFunction& g, const BatteryOptions& opt = {}) {
    if (family.empty()) throw InvalidInput("battery needs a nonempty family");
    const auto spec = RiskMeasureSpec::shortfall(l);
    const auto grid = opt.lambda_grid.empty() ? detail::battery_grid() : opt.lambda_grid;
    const auto& cs = witness_grid();

    std::vector<detail::BatteryMember> members;
    members.reserve(family.size());
    for (std::size_t k = 0; k < family.size(); ++k) {
        detail::BatteryMember m;
        m.x = family[k].centered();
        m.profile = compute_profile(spec, m.x, grid);
        std::vector<TiltedMeasure> qs{TiltedMeasure::reference(m.x.weights())};
        for (auto& q : profile_tilts(spec, m.x, grid)) qs.push_back(std::move(q));
        if (opt.random_tilts > 0) {
            const auto base = DiscreteDistribution::scalar(m.x.values(), m.x.weights());
            for (auto& q : sample_tilts(base, TiltStrategy::random(opt.random_tilts, opt.seed + k)))
                qs.push_back(std::move(q));
        }
        m.tilts = tabulate_tilts(spec, m.x, qs);
        members.push_back(std::move(m));
    }

    BatteryReport rep;
    rep.members = members.size();

    // Past the grid the profile is extended by factors of 10 until the certificate holds or the
    // bound breaks; a break adds the optimal tilt there so the dual side sees the same failure.
    auto extend = [&](detail::BatteryMember& m, double c) {
        double lam = m.profile.lambda_grid.back();
        for (int k = 0; k < 40; ++k) {
            lam *= 10;
            auto it = m.extension.find(lam);
            if (it == m.extension.end()) it = m.extension.emplace(lam, rho_scaled(spec, m.x, lam)).first;
            if (it->second - g(c * lam) > 1e-9) {
                m.tilts.add(spec, m.x, optimal_tilt(spec, m.x.scaled(lam)));
                return false;
            }
            if (tail_certificate_at(lam, it->second, m.profile.sup_slope, g, c)) return true;
        }
        return false;
    };
    auto primal_ok = [&](std::size_t i) {
        const double c = cs[i];
        for (auto& m : members) {
            auto conc = check_concentration(m.profile, g, c);
            if (!conc.holds) return false;
            const auto hits = refine_between_grid(m.profile, g, conc, [&](double lam) { return rho_scaled(spec, m.x, lam); });
            if (!hits.empty()) {
                for (double lam : hits) m.tilts.add(spec, m.x, optimal_tilt(spec, m.x.scaled(lam)));
                return false;
            }
            if (!conc.tail_certified && !extend(m, c)) return false;
            const auto dual = check_dual_inequality(m.tilts, g, c);
            for (std::size_t j : dual.violating) {
                const double lam = dual_witness_lambda(g, c, m.tilts.means[j], m.tilts.penalties[j]);
                if (rho_scaled(spec, m.x, lam) - g(c * lam) > 1e-9) return false;
            }
        }
        return true;
    };
    auto dual_ok = [&](std::size_t i) {
        for (const auto& m : members)
            if (!check_dual_inequality(m.tilts, g, cs[i]).holds) return false;
        return true;
    };
    auto tail_ok = [&](std::size_t i) {
        const auto gc = g.scaled(cs[i]);
        for (const auto& m : members)
            if (!tail_dominance(m.x, l, gc).holds) return false;
        return true;
    };
    const double log_threshold = std::log(opt.moment_threshold);
    auto moment_log = [&](std::size_t i) {
        double worst = -kInf;
        for (const auto& m : members) worst = std::max(worst, integral_moment(m.x, l, g, 1 / cs[i]).log_value);
        return worst;
    };
    auto moment_ok = [&](std::size_t i) { return moment_log(i) <= log_threshold; };

    const std::pair<const char*, std::function<bool(std::size_t)>> preds[] = {
        {"1", primal_ok}, {"2", dual_ok}, {"3", tail_ok}, {"4", moment_ok}};
    for (const auto& [id, pred] : preds) {
        BatteryCondition c;
        c.id = id;
        if (const auto k = first_true(cs.size(), pred)) {
            c.found = true;
            c.index = *k;
            c.c = cs[*k];
        }
        rep.conditions.push_back(c);
    }
    const auto& c1 = rep.conditions[0];
    const auto& c2 = rep.conditions[1];
    const auto& c3 = rep.conditions[2];
    const auto& c4 = rep.conditions[3];

    if (c4.found) {
        rep.max_moment_log = moment_log(c4.index);
        const auto gc = g.scaled(c4.c);
        for (const auto& m : members) rep.markov_violations += markov_violations(m.x, l, gc);
    }

    rep.lgamma = check_lgamma_membership(l, g);
    rep.class_h = find_class_h_witness(GrowthFunction::composed(l, g));

    rep.arrows.push_back({"(1)<=>(2)", true, c1.found == c2.found && (!c1.found || c1.index == c2.index),
                          "same witness constant"});
    rep.arrows.push_back({"(1)=>(3)", true, !c1.found || (c3.found && c3.index <= c1.index),
                          "tail bound at the concentration constant"});
    rep.arrows.push_back({"(4)=>(3)", true, !c4.found || c3.found, "Markov inequality"});
    {
        BatteryArrow a{"(3)=>(4)", rep.class_h.is_member, !c3.found || c4.found, ""};
        a.note = a.asserted ? "composed growth is in class H" : "not asserted: class H membership not certified";
        rep.arrows.push_back(a);
    }
    {
        BatteryArrow a{"(4)=>(1)", rep.lgamma.is_member, !c4.found || c1.found, ""};
        a.note = a.asserted ? "(loss, shape) pair is in LGamma" : "not asserted: LGamma membership not certified";
        rep.arrows.push_back(a);
    }
    return rep;
}

/// The limit lim_c limsup_n sup_{x≥c} ℓ(γ*(x/n))/ℓ(γ*(x)) that drives the integral criterion, tabulated.
struct ScaleRatioDiagnostic {
    std::vector<double> cs;
    std::vector<double> ns;
    std::vector<std::vector<double>> log_sup;  ///< [c][n]: log sup over x ≥ c on a geometric x-grid
    std::vector<double> log_limit;             ///< log ℓ(−γ(0)) − log ℓ(γ*(c)): the n → ∞ value
};

inline ScaleRatioDiagnostic scale_ratio_diagnostic(const LossFunction& l, const ShapeFunction& g,
                                                   std::vector<double> cs = geometric_grid(1, 1e4, 2),
                                                   std::vector<double> ns = {2, 4, 16, 64, 256, 1024}) {
    ScaleRatioDiagnostic d;
    d.cs = std::move(cs);
    d.ns = std::move(ns);
    auto lg = [&](double x) { return l.log_value(g.conjugate(x)); };
    for (double c : d.cs) {
        std::vector<double> row;
        for (double n : d.ns) {
            double best = -kInf;
            for (double x : geometric_grid(c, c * 1e6, 10)) {
                const double den = lg(x);
                if (den == kInf) continue;
                best = std::max(best, lg(x / n) - den);
            }
            row.push_back(best);
        }
        d.log_sup.push_back(std::move(row));
        d.log_limit.push_back(l.log_value(-g.value_at_zero()) - lg(c));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Tensorization

/// Kinds known to satisfy ρ(X) ≤ ρ(ρ(X | G)): entropic, and its shortfall/OCE representations.
/// Tabulated losses qualify when log-subadditive on a probe grid.
inline bool acceptance_consistent(const RiskMeasureSpec& spec) {
    switch (spec.kind) {
        case RiskMeasureSpec::Kind::entropic: return true;
        case RiskMeasureSpec::Kind::oce: return spec.phi->kind() == OceFunction::Kind::exponential;
        case RiskMeasureSpec::Kind::shortfall: {
            const auto& l = *spec.loss;
            if (l.kind() == LossFunction::Kind::exponential) return true;
            if (l.kind() != LossFunction::Kind::tabulated) return false;
            for (int i = -40; i <= 40; ++i)
                for (int j = -40; j <= 40; ++j) {
                    const double x = 0.125 * i, y = 0.125 * j;
                    if (l.log_value(x + y) > l.log_value(x) + l.log_value(y) + 1e-12) return false;
                }
            return true;
        }
    }
    return false;
}

inline DiscreteDistribution product_distribution(const std::vector<DiscreteDistribution>& marginals) {
    if (marginals.empty()) throw InvalidInput("product needs at least one marginal");
    std::vector<std::vector<double>> pts{{}};
    std::vector<double> w{1.0};
    for (const auto& m : marginals) {
        std::vector<std::vector<double>> np;
        std::vector<double> nw;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) {
                auto p = pts[i];
                p.insert(p.end(), m.points()[j].begin(), m.points()[j].end());
                np.push_back(std::move(p));
                nw.push_back(w[i] * m.weights()[j]);
            }
        pts = std::move(np);
        w = std::move(nw);
    }
    double s = 0;
    for (double v : w) s += v;
    for (auto& v : w) v /= s;
    return DiscreteDistribution(std::move(pts), std::move(w));
}

struct TensorSumReport {
    bool asserted = false;   ///< the measure is acceptance consistent, so the bound is a theorem
    bool holds = true;
    bool equality = false;   ///< entropic kind: both sides agree to 1e-10
    double worst_gap = -kInf;  ///< max of lhs − rhs
    double worst_abs_diff = 0;
    std::vector<double> lhs, rhs;
};

/// ρ(λ(X₁ + X₂)) ≤ ρ(λX₁) + ρ(λX₂) for independent X₁, X₂, on the product of their atoms.
inline TensorSumReport tensor_sum_check(const RiskMeasureSpec& spec, const RandomVariable& x1, const RandomVariable& x2,
                                        const std::vector<double>& grid = default_lambda_grid()) {
    detail::validate_grid(grid);
    std::vector<double> v, w;
    v.reserve(x1.size() * x2.size());
    w.reserve(x1.size() * x2.size());
    for (std::size_t i = 0; i < x1.size(); ++i)
        for (std::size_t j = 0; j < x2.size(); ++j) {
            v.push_back(x1.values()[i] + x2.values()[j]);
            w.push_back(x1.weights()[i] * x2.weights()[j]);
        }
    const RandomVariable sum(std::move(v), std::move(w));
    TensorSumReport r;
    r.asserted = acceptance_consistent(spec);
    for (double lam : grid) {
        const double a = rho_scaled(spec, sum, lam);
        const double b = rho_scaled(spec, x1, lam) + rho_scaled(spec, x2, lam);
        r.lhs.push_back(a);
        r.rhs.push_back(b);
        r.worst_gap = std::max(r.worst_gap, a - b);
        r.worst_abs_diff = std::max(r.worst_abs_diff, std::abs(a - b));
        if (a > b + 1e-9 * (1 + std::abs(b))) r.holds = false;
    }
    r.equality = r.worst_abs_diff <= 1e-10;
    return r;
}

/// A function on product atoms, given by its values in product order.
using ProductFunction = std::function<double(const std::vector<double>&)>;

/// Extremal 1-Lipschitz functions of a scalar marginal (modulo constants): increments ±gap between
/// sorted atoms. ρ(λ(f − Ef)) is convex in the increments, so its max over Lip₁ sits at one of them.
inline std::vector<std::vector<double>> extremal_lipschitz_values(const DiscreteDistribution& marginal) {
    if (marginal.dim() != 1) throw InvalidInput("extremal Lipschitz enumeration needs scalar atoms");
    const auto xs = marginal.values();
    const std::size_t n = xs.size();
    if (n > 21) throw SizeError("extremal Lipschitz enumeration limited to 21 atoms");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<std::vector<double>> out;
    const std::size_t count = n > 1 ? std::size_t{1} << (n - 1) : 1;
    for (std::size_t mask = 0; mask < count; ++mask) {
        std::vector<double> f(n, 0.0);
        double acc = 0;
        for (std::size_t k = 1; k < n; ++k) {
            const double gap = xs[order[k]] - xs[order[k - 1]];
            acc += (mask >> (k - 1) & 1) ? gap : -gap;
            f[order[k]] = acc;
        }
        out.push_back(std::move(f));
    }
    return out;
}

/// λ ↦ max over 1-Lipschitz f of ρ(λ(f − Ef)) for a scalar marginal, on a grid.
inline std::vector<double> lipschitz_profile_envelope(const RiskMeasureSpec& spec, const DiscreteDistribution& marginal,
                                                      const std::vector<double>& grid) {
    const auto fs = extremal_lipschitz_values(marginal);
    std::vector<double> env(grid.size(), -kInf);
    for (const auto& f : fs) {
        const RandomVariable v = RandomVariable(f, marginal.weights()).centered();
        for (std::size_t i = 0; i < grid.size(); ++i) env[i] = std::max(env[i], rho_scaled(spec, v, grid[i]));
    }
    return env;
}

struct TensorLipschitzReport {
    bool asserted = false;              ///< acceptance consistent and every marginal hypothesis certified
    bool hypothesis_certified = true;
    std::vector<bool> lipschitz;        ///< per f: 1-Lipschitz in the ℓ¹ product metric on the atoms
    std::vector<bool> holds;            ///< per f: ρ(λ(f − Ef)) ≤ Σγ_i(λ) + tol on the grid
    std::vector<double> worst_gap;      ///< per f
    std::vector<double> bound;          ///< Σγ_i(λ) on the grid
    std::size_t violations = 0;
};

/// Checks ρ(λ(f − Ef)) ≤ Σ_i γ_i(λ) for functions on a product of scalar marginals with the ℓ¹ metric.
/// Without supplied shapes, γ_i is the pointwise Lipschitz envelope of marginal i, which certifies
/// the marginal hypothesis by construction.
inline TensorLipschitzReport tensor_lipschitz_check(const RiskMeasureSpec& spec,
                                                    const std::vector<DiscreteDistribution>& marginals,
                                                    const std::vector<ProductFunction>& fs,
                                                    const std::vector<double>& grid = default_lambda_grid(),
                                                    const std::vector<ShapeFunction>& shapes = {}) {
    detail::validate_grid(grid);
    if (!shapes.empty() && shapes.size() != marginals.size())
        throw InvalidInput("one shape per marginal, or none");
    TensorLipschitzReport r;
    r.bound.assign(grid.size(), 0.0);
    for (std::size_t k = 0; k < marginals.size(); ++k) {
        const auto env = lipschitz_profile_envelope(spec, marginals[k], grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double gv = shapes.empty() ? env[i] : shapes[k](grid[i]);
            if (env[i] > gv + 1e-9) r.hypothesis_certified = false;
            r.bound[i] += gv;
        }
    }
    r.asserted = r.hypothesis_certified && acceptance_consistent(spec);

    const auto joint = product_distribution(marginals);
    for (const auto& f : fs) {
        const RandomVariable v(joint, f);
        bool lip = true;
        for (std::size_t a = 0; a < joint.size() && lip; ++a)
            for (std::size_t b = a + 1; b < joint.size(); ++b) {
                double d = 0;
                for (std::size_t j = 0; j < joint.dim(); ++j) d += std::abs(joint.points()[a][j] - joint.points()[b][j]);
                if (std::abs(v.values()[a] - v.values()[b]) > d * (1 + 1e-12) + 1e-12) {
                    lip = false;
                    break;
                }
            }
        r.lipschitz.push_back(lip);
        const auto c = v.centered();
        double worst = -kInf;
        for (std::size_t i = 0; i < grid.size(); ++i)
            worst = std::max(worst, rho_scaled(spec, c, grid[i]) - r.bound[i]);
        r.worst_gap.push_back(worst);
        const bool ok = worst <= 1e-9;
        r.holds.push_back(ok);
        if (!ok && lip && r.asserted) ++r.violations;
    }
    return r;
}

/// A random 1-Lipschitz function on the product atoms (ℓ¹ metric): McShane extension of
/// random anchor values, made consistent by taking the lower envelope.
inline ProductFunction random_product_lipschitz(const DiscreteDistribution& joint, std::size_t anchors,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, joint.size() - 1);
    std::normal_distribution<double> val(0.0, 1.0);
    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0;
        for (std::size_t j = 0; j < a.size(); ++j) d += std::abs(a[j] - b[j]);
        return d;
    };
    std::vector<std::vector<double>> ys;
    std::vector<double> vs;
    for (std::size_t k = 0; k < std::max<std::size_t>(anchors, 1); ++k) {
        ys.push_back(joint.points()[pick(rng)]);
        vs.push_back(val(rng));
    }
    std::vector<double> fixed(vs.size());
    for (std::size_t a = 0; a < ys.size(); ++a) {
        fixed[a] = kInf;
        for (std::size_t b = 0; b < ys.size(); ++b) fixed[a] = std::min(fixed[a], vs[b] + dist(ys[a], ys[b]));
    }
    return [ys, fixed, dist](const std::vector<double>& x) {
        double f = kInf;
        for (std::size_t a = 0; a < ys.size(); ++a) f = std::min(f, fixed[a] + dist(x, ys[a]));
        return f;
    };
}

struct TensorDependentReport {
    bool asserted = false;
    bool hypothesis_certified = true;
    bool holds = true;
    double worst_gap = -kInf;
    std::vector<double> gamma1, gamma2, lhs;
};

/// ρ(λ(X₁ + X₂)) ≤ γ₁(λ) + γ₂(λ) for a joint law of (X₁, X₂) given by its two coordinates.
/// Absent shapes, γ₁ is the profile of X₁ and γ₂ the worst conditional profile of X₂ given X₁.
inline TensorDependentReport tensor_dependent_check(const RiskMeasureSpec& spec, const DiscreteDistribution& joint,
                                                    const std::vector<double>& grid = default_lambda_grid(),
                                                    const std::optional<ShapeFunction>& g1 = std::nullopt,
                                                    const std::optional<ShapeFunction>& g2 = std::nullopt) {
    detail::validate_grid(grid);
    if (joint.dim() != 2) throw InvalidInput("dependent tensorization needs a two-coordinate joint");
    const RandomVariable x1(joint.coordinate(0), joint.weights());
    const RandomVariable sum(joint, [](const std::vector<double>& p) { return p[0] + p[1]; });
    TensorDependentReport r;
    for (double lam : grid) {
        const double p1 = rho_scaled(spec, x1, lam);
        double p2 = -kInf;
        for (const auto& [a, v] : conditional_rho(spec, joint, [lam](double, double y) { return lam * y; }))
            p2 = std::max(p2, v);
        const double b1 = g1 ? (*g1)(lam) : p1;
        const double b2 = g2 ? (*g2)(lam) : p2;
        if (p1 > b1 + 1e-9 || p2 > b2 + 1e-9) r.hypothesis_certified = false;
        const double lhs = rho_scaled(spec, sum, lam);
        r.gamma1.push_back(b1);
        r.gamma2.push_back(b2);
        r.lhs.push_back(lhs);
        r.worst_gap = std::max(r.worst_gap, lhs - b1 - b2);
    }
    r.holds = r.worst_gap <= 1e-9;
    r.asserted = r.hypothesis_certified && acceptance_consistent(spec);
    return r;
}

struct ConsistencyCounterexample {
    DiscreteDistribution joint;
    std::vector<double> payoff;  ///< X on the joint atoms
    double rho_x = 0;
    double rho_nested = 0;
};

struct ConsistencyProbe {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_gap = -kInf;  ///< max of ρ(X) − ρ(ρ(X | G))
    std::vector<ConsistencyCounterexample> counterexamples;
};

/// ρ(ρ(X | G)) with G generated by the first coordinate.
inline double nested_rho(const RiskMeasureSpec& spec, const DiscreteDistribution& joint,
                         const std::vector<double>& payoff) {
    std::map<double, double> mass;
    std::map<std::pair<double, double>, double> value;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        mass[joint.points()[i][0]] += joint.weights()[i];
        value[{joint.points()[i][0], joint.points()[i][1]}] = payoff[i];
    }
    const auto inner = conditional_rho(spec, joint, [&](double a, double b) { return value.at({a, b}); });
    std::vector<double> v, w;
    for (const auto& [a, r] : inner) {
        v.push_back(r);
        w.push_back(mass.at(a));
    }
    return rho(spec, v, w);
}

/// Random rows×cols joints with random payoffs; records every violation of ρ(X) ≤ ρ(ρ(X | G)).
inline ConsistencyProbe acceptance_consistency_probe(const RiskMeasureSpec& spec, std::size_t trials,
                                                     std::uint64_t seed, std::size_t rows = 3, std::size_t cols = 3) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gam(1.0, 1.0);
    std::normal_distribution<double> nrm(0.0, 1.0);
    ConsistencyProbe out;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<std::vector<double>> pts;
        std::vector<double> w, x;
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t b = 0; b < cols; ++b) {
                pts.push_back({double(a), double(b)});
                w.push_back(gam(rng) + 1e-3);
            }
        const double scale = std::exp(nrm(rng));
        for (std::size_t i = 0; i < pts.size(); ++i) x.push_back(scale * nrm(rng));
        DiscreteDistribution joint(std::move(pts), DiscreteDistribution::normalize(std::move(w)));
        const double lhs = rho(spec, x, joint.weights());
        const double rhs = nested_rho(spec, joint, x);
        ++out.trials;
        out.worst_gap = std::max(out.worst_gap, lhs - rhs);
        if (lhs > rhs + 1e-9 * (1 + std::abs(rhs))) {
            ++out.violations;
            out.counterexamples.push_back({joint, x, lhs, rhs});
        }
    }
    return out;
}

}  // namespace liqrisk
