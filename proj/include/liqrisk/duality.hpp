#pragma once

// Dual form of a concentration bound: γ*(E^Q X / c) ≤ α(Q) over a set of tilts.

#include <algorithm>
#include <cmath>
#include <vector>

#include "convex_core.hpp"
#include "measures.hpp"
#include "numeric.hpp"
#include "profiles.hpp"
#include "risk.hpp"

namespace liqrisk {

/// Tilts with their means E^Q X and penalties α(Q), computed once and reused across constants.
struct TiltTable {
    std::vector<TiltedMeasure> tilts;
    std::vector<double> means;
    std::vector<double> penalties;

    void add(const RiskMeasureSpec& spec, const RandomVariable& x, TiltedMeasure q) {
        means.push_back(q.expectation(x.values()));
        penalties.push_back(penalty(spec, q));
        tilts.push_back(std::move(q));
    }
    std::size_t size() const { return tilts.size(); }
};

inline TiltTable tabulate_tilts(const RiskMeasureSpec& spec, const RandomVariable& x,
                                const std::vector<TiltedMeasure>& tilts) {
    TiltTable t;
    for (const auto& q : tilts) {
        if (q.base_weights().size() != x.size()) throw InvalidInput("tilt and variable live on different atoms");
        t.add(spec, x, q);
    }
    return t;
}

/// Q concentrated on the atoms where X is maximal.
inline TiltedMeasure max_atom_tilt(const RandomVariable& x) {
    const double mx = x.max();
    std::vector<double> z(x.size(), 0.0);
    double mass = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.values()[i] == mx) mass += x.weights()[i];
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.values()[i] == mx) z[i] = 1 / mass;
    return TiltedMeasure(x.weights(), std::move(z));
}

/// Optimal tilts of λX on a λ grid plus the max-atom tilt: enough to witness any failed grid bound.
inline std::vector<TiltedMeasure> profile_tilts(const RiskMeasureSpec& spec, const RandomVariable& x,
                                                const std::vector<double>& grid) {
    std::vector<TiltedMeasure> out;
    out.reserve(grid.size() + 1);
    for (double lam : grid) {
        if (lam == 0) continue;
        out.push_back(optimal_tilt(spec, x.scaled(lam)));
    }
    out.push_back(max_atom_tilt(x));
    return out;
}

struct DualCheck {
    bool holds = true;
    double c = 1;
    double worst_excess = -kInf;     ///< max over tilts of γ*(m/c) − α
    std::size_t worst_tilt = 0;
    std::size_t violations = 0;
    std::vector<std::size_t> violating;
};

/// γ*(E^Q X / c) ≤ α(Q) + tol for every tabulated tilt; tilts with α = ∞ are vacuous.
inline DualCheck check_dual_inequality(const TiltTable& table, const ShapeFunction& g, double c = 1,
                                       double tol = 1e-9) {
    if (!(c > 0)) throw InvalidInput("scaling constant must be positive");
    DualCheck r;
    r.c = c;
    for (std::size_t j = 0; j < table.size(); ++j) {
        const double a = table.penalties[j];
        if (a == kInf) continue;
        const double excess = g.conjugate(table.means[j] / c) - a;
        if (excess > r.worst_excess) {
            r.worst_excess = excess;
            r.worst_tilt = j;
        }
        if (excess > tol) {
            ++r.violations;
            r.violating.push_back(j);
        }
    }
    r.holds = r.violations == 0;
    return r;
}

inline DualCheck check_dual_inequality(const RiskMeasureSpec& spec, const RandomVariable& x, const ShapeFunction& g,
                                       const std::vector<TiltedMeasure>& tilts, double c = 1) {
    return check_dual_inequality(tabulate_tilts(spec, x, tilts), g, c);
}

/// The λ at which a violated dual inequality transfers to the primal side:
/// a maximizer of λm − γ(cλ), or a point past the crossing for linear γ.
inline double dual_witness_lambda(const ShapeFunction& g, double c, double mean, double pen) {
    const double arg = g.conjugate_argmax(mean / c);
    if (std::isfinite(arg)) return arg / c;
    const double slope = c * g.right_derivative(0.0);
    return 2 * (pen + g.value_at_zero() + 1) / std::max(mean - slope, 1e-300);
}

struct DualEquivalence {
    bool concentration_holds = false;  ///< grid, tail certificate and every dual-witness λ
    bool dual_holds = false;
    bool concordant = false;
    double worst_gap = -kInf;
    double worst_excess = -kInf;
    std::size_t tilt_count = 0;
    std::vector<double> witness_lambdas;
};

/// Both sides of ρ(λX) ≤ γ(cλ) ∀λ  ⟺  γ*(E^Q X / c) ≤ α(Q) ∀Q, on one variable.
/// The supplied tilts are augmented with the optimal tilts along the profile grid.
inline DualEquivalence dual_equivalence(const RiskMeasureSpec& spec, const RandomVariable& x, const ShapeFunction& g,
                                        double c, const std::vector<TiltedMeasure>& tilts,
                                        const std::vector<double>& grid = default_lambda_grid()) {
    DualEquivalence r;
    const auto profile = compute_profile(spec, x, grid);
    auto conc = check_concentration(profile, g, c);
    const auto hits = refine_between_grid(profile, g, conc, [&](double lam) { return rho_scaled(spec, x, lam); });
    r.worst_gap = conc.worst_gap;

    auto table = tabulate_tilts(spec, x, tilts);
    for (auto& q : profile_tilts(spec, x, grid)) table.add(spec, x, std::move(q));
    for (double lam : hits) table.add(spec, x, optimal_tilt(spec, x.scaled(lam)));
    r.tilt_count = table.size();
    const auto dual = check_dual_inequality(table, g, c);
    r.dual_holds = dual.holds;
    r.worst_excess = dual.worst_excess;

    bool primal = conc.certified();
    for (std::size_t j : dual.violating) {
        const double lam = dual_witness_lambda(g, c, table.means[j], table.penalties[j]);
        r.witness_lambdas.push_back(lam);
        const double gap = rho_scaled(spec, x, lam) - g(c * lam);
        r.worst_gap = std::max(r.worst_gap, gap);
        if (gap > 1e-9) primal = false;
    }
    r.concentration_holds = primal;
    r.concordant = r.concentration_holds == r.dual_holds;
    return r;
}

}  // namespace liqrisk
