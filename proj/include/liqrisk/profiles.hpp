#pragma once

/// Liquidity risk profiles λ ↦ ρ(λX), marginal risk, and concentration checks ρ(λX) ≤ γ(cλ).

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "convex_core.hpp"
#include "numeric.hpp"
#include "risk.hpp"

namespace liqrisk {

/// {0} ∪ geometric 1e-4..1e2 at 25 points per decade.
inline std::vector<double> default_lambda_grid() {
    std::vector<double> g{0.0};
    const auto geo = geometric_grid(1e-4, 1e2, 25);
    g.insert(g.end(), geo.begin(), geo.end());
    return g;
}

struct RiskProfile {
    std::vector<double> lambda_grid;
    std::vector<double> values;
    bool centered = false;
    bool convex = false;
    bool normalized = false;
    bool nonnegative = false;  ///< only meaningful for centered profiles
    double mean = 0;           ///< E X of the uncentered variable
    double sup_slope = 0;      ///< max atom of the profiled variable: bounds every slope of the curve
};

namespace detail {
inline bool convex_on_grid(const std::vector<double>& x, const std::vector<double>& y, double tol) {
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double t = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        const double chord = (1 - t) * y[i - 1] + t * y[i + 1];
        if (y[i] > chord + tol * (1 + std::abs(chord))) return false;
    }
    return true;
}

inline void validate_grid(const std::vector<double>& grid) {
    if (grid.empty() || grid.front() != 0.0) throw InvalidInput("lambda grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidInput("lambda grid must be strictly ascending");
}

template <class E>
[[noreturn]] inline void rethrow_at(const E& e, double lambda) {
    throw E(std::string(e.what()) + " (at lambda = " + std::to_string(lambda) + ")");
}
}  // namespace detail

/// ρ(λ(X − E X·center)) per grid point, with structural flags.
inline RiskProfile compute_profile(const RiskMeasureSpec& spec, const RandomVariable& x,
                                   const std::vector<double>& grid = default_lambda_grid(), bool center = false) {
    detail::validate_grid(grid);
    RiskProfile p;
    p.lambda_grid = grid;
    p.centered = center;
    p.mean = x.mean();
    const RandomVariable v = center ? x.centered() : x;
    p.sup_slope = v.max();
    p.values = parallel_map<double>(
        grid.size(),
        [&](std::size_t i) {
            try {
                return rho_scaled(spec, v, grid[i]);
            } catch (const UnboundedRisk& e) {
                detail::rethrow_at(e, grid[i]);
            } catch (const InvalidSpec& e) {
                detail::rethrow_at(e, grid[i]);
            }
        },
        thread_cap());
    p.normalized = std::abs(p.values.front()) <= 1e-10;
    p.convex = detail::convex_on_grid(p.lambda_grid, p.values, 1e-9);
    p.nonnegative = std::all_of(p.values.begin(), p.values.end(), [](double a) { return a >= -1e-9; });
    return p;
}

/// Profile of X relative to an initial position Y: ρ(Y + λX) − ρ(Y).
inline RiskProfile relative_profile(const RiskMeasureSpec& spec, const RandomVariable& x, const RandomVariable& y,
                                    const std::vector<double>& grid = default_lambda_grid()) {
    detail::validate_grid(grid);
    const double base = rho(spec, y);
    if (!std::isfinite(base)) throw InvalidInput("initial position has infinite risk");
    RiskProfile p;
    p.lambda_grid = grid;
    p.mean = x.mean();
    p.sup_slope = x.max();
    p.values = parallel_map<double>(
        grid.size(), [&](std::size_t i) { return rho(spec, y + x.scaled(grid[i])) - base; }, thread_cap());
    p.normalized = std::abs(p.values.front()) <= 1e-10;
    p.convex = detail::convex_on_grid(p.lambda_grid, p.values, 1e-9);
    p.nonnegative = std::all_of(p.values.begin(), p.values.end(), [](double a) { return a >= -1e-9; });
    return p;
}

struct MarginalRisk {
    double value = 0;                 ///< lim_{λ↓0} ρ(λX)/λ
    std::vector<double> steps;
    std::vector<double> sequence;     ///< ρ(λX)/λ per step
    std::optional<double> left_value; ///< lim_{λ↓0} −ρ(−λX)/λ
};

namespace detail {
inline std::vector<double> marginal_sequence(const RiskMeasureSpec& spec, const RandomVariable& x,
                                             const std::vector<double>& steps) {
    std::vector<double> s;
    s.reserve(steps.size());
    for (double h : steps) s.push_back(rho_scaled(spec, x, h) / h);
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[i - 1] + 1e-10 * (1 + std::abs(s[i - 1])))
            throw NumericalInstability("difference quotients of the profile are not nonincreasing");
    return s;
}
}  // namespace detail

/// Marginal (coherent) risk from difference quotients on a step sequence decreasing to 0.
inline MarginalRisk marginal_risk(const RiskMeasureSpec& spec, const RandomVariable& x,
                                  std::vector<double> steps = {}, bool with_left = false) {
    if (steps.empty())
        for (int k = 1; k <= 30; ++k) steps.push_back(std::ldexp(1.0, -k));
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0)) throw InvalidInput("steps must be positive");
        if (i > 0 && !(steps[i] < steps[i - 1])) throw InvalidInput("steps must decrease strictly");
    }
    const auto precise = spec.with_tolerance(0.0);
    MarginalRisk m;
    m.steps = steps;
    m.sequence = detail::marginal_sequence(precise, x, steps);
    m.value = m.sequence.back();
    if (with_left) m.left_value = -detail::marginal_sequence(precise, x.scaled(-1), steps).back();
    return m;
}

struct ConcentrationCheck {
    bool holds = false;           ///< ρ(λX) ≤ γ(cλ) + 1e-9 at every grid point
    bool tail_certified = false;  ///< the bound provably persists beyond the last grid point
    double worst_gap = -kInf;
    double worst_lambda = 0;
    double c = 1;
    std::size_t probes = 0;  ///< between-grid evaluations made by refine_between_grid

    bool certified() const { return holds && tail_certified; }
};

/// Beyond the last grid point λ_N the profile grows with slope at most s = sup X, so
/// γ_c′(λ_N) ≥ s, or γ_c*(s) ≤ λ_N s − ρ(λ_N X), rules out a later crossing.
inline bool tail_certificate_at(double lam, double value, double s, const ShapeFunction& g, double c,
                                double tol = 1e-9) {
    if (s <= 0) return true;
    if (c * lam < g.effective_domain_sup() && c * g.right_derivative(c * lam) >= s) return true;
    const double conj = g.conjugate(s / c);
    return conj <= lam * s - value + tol;
}

inline bool tail_certificate(const RiskProfile& p, const ShapeFunction& g, double c, double tol = 1e-9) {
    return tail_certificate_at(p.lambda_grid.back(), p.values.back(), p.sup_slope, g, c, tol);
}

inline ConcentrationCheck check_concentration(const RiskProfile& p, const ShapeFunction& g, double c) {
    if (!(c > 0)) throw InvalidInput("scaling constant must be positive");
    ConcentrationCheck r;
    r.c = c;
    for (std::size_t i = 0; i < p.lambda_grid.size(); ++i) {
        const double gap = p.values[i] - g(c * p.lambda_grid[i]);
        if (gap > r.worst_gap) {
            r.worst_gap = gap;
            r.worst_lambda = p.lambda_grid[i];
        }
    }
    r.holds = r.worst_gap <= 1e-9;
    r.tail_certified = tail_certificate(p, g, c);
    return r;
}

/// A convex profile stays below its chord between grid points, so a crossing of γ(c·) inside
/// [λ_i, λ_{i+1}] is only possible where chord − γ(c·) peaks above zero. The profile is evaluated
/// there with `eval` (λ ↦ ρ of the profiled variable at λ) and both halves are re-examined, largest
/// chord excess first, for at most `budget` evaluations per grid interval. Returns violating λ's.
template <class Eval>
std::vector<double> refine_between_grid(const RiskProfile& p, const ShapeFunction& g, ConcentrationCheck& r,
                                        Eval&& eval, double tol = 1e-9, std::size_t budget = 12) {
    struct Piece {
        double excess, a, ra, b, rb, peak;
        bool operator<(const Piece& o) const { return excess < o.excess; }
    };
    const double c = r.c;
    // chord peak on [a, b], or nothing when the chord stays under γ(c·)
    auto piece = [&](double a, double ra, double b, double rb) -> std::optional<Piece> {
        const double s = (rb - ra) / (b - a);
        const double m = g.conjugate_argmax(s / c);
        if (!std::isfinite(m)) return std::nullopt;  // chord − γ(c·) increases: its peak is b
        const double lam = std::clamp(m / c, a, b);
        const double excess = ra + s * (lam - a) - g(c * lam);
        if (!(lam > a && lam < b) || excess <= tol) return std::nullopt;
        return Piece{excess, a, ra, b, rb, lam};
    };
    std::vector<double> hits;
    for (std::size_t i = 0; i + 1 < p.lambda_grid.size(); ++i) {
        if (!std::isfinite(p.values[i]) || !std::isfinite(p.values[i + 1])) continue;
        std::priority_queue<Piece> queue;
        if (auto q = piece(p.lambda_grid[i], p.values[i], p.lambda_grid[i + 1], p.values[i + 1])) queue.push(*q);
        for (std::size_t n = 0; n < budget && !queue.empty(); ++n) {
            const Piece q = queue.top();
            queue.pop();
            ++r.probes;
            const double v = eval(q.peak);
            const double gap = v - g(c * q.peak);
            if (gap > r.worst_gap) {
                r.worst_gap = gap;
                r.worst_lambda = q.peak;
            }
            if (gap > tol) {
                r.holds = false;
                hits.push_back(q.peak);
                break;
            }
            if (auto left = piece(q.a, q.ra, q.peak, v)) queue.push(*left);
            if (auto right = piece(q.peak, v, q.b, q.rb)) queue.push(*right);
        }
    }
    return hits;
}

/// Grid check, tail certificate and between-grid probes for the variable the profile was built from.
inline ConcentrationCheck check_concentration_refined(const RiskMeasureSpec& spec, const RandomVariable& x,
                                                      const RiskProfile& p, const ShapeFunction& g, double c) {
    auto r = check_concentration(p, g, c);
    if (!r.holds) return r;
    const auto y = p.centered ? x.centered() : x;
    refine_between_grid(p, g, r, [&](double lam) { return rho_scaled(spec, y, lam); });
    return r;
}

/// The shared witness grid for constant searches: ratio 1.05 on [1e-4, 1e6].
inline const std::vector<double>& witness_grid() {
    static const std::vector<double> g = ratio_grid(1e-4, 1e6, 1.05);
    return g;
}

struct ScalingConstant {
    bool found = false;
    double c = kInf;   ///< +inf marker when no grid value works
    std::size_t index = 0;
    std::vector<RiskProfile> profiles;
};

/// Smallest index in `grid` with pred true, assuming pred monotone (false … false true … true).
inline std::optional<std::size_t> first_true(std::size_t n, const std::function<bool(std::size_t)>& pred) {
    if (n == 0 || !pred(n - 1)) return std::nullopt;
    std::size_t lo = 0, hi = n - 1;
    if (pred(0)) return 0;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (pred(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

/// Smallest grid c with ρ(λ(X − EX)) ≤ γ(cλ) certified for every member.
inline ScalingConstant find_scaling_constant(const RiskMeasureSpec& spec, const std::vector<RandomVariable>& family,
                                             const ShapeFunction& g,
                                             const std::vector<double>& lambda_grid = default_lambda_grid()) {
    if (family.empty()) throw InvalidInput("scaling-constant search needs a nonempty family");
    ScalingConstant out;
    for (const auto& x : family) out.profiles.push_back(compute_profile(spec, x, lambda_grid, true));
    const auto& cs = witness_grid();
    auto ok = [&](std::size_t k) {
        for (std::size_t j = 0; j < family.size(); ++j)
            if (!check_concentration_refined(spec, family[j], out.profiles[j], g, cs[k]).certified()) return false;
        return true;
    };
    if (const auto k = first_true(cs.size(), ok)) {
        out.found = true;
        out.index = *k;
        out.c = cs[*k];
    }
    return out;
}

struct InitialPositionReport {
    bool bound_holds_for_all = true;
    std::optional<std::size_t> counterexample;  ///< index into the Y family
    double worst_gap = -kInf;
    bool predicate = false;  ///< max X ≤ γ′(0) + 1e-8
};

/// Indicator-like positions concentrating mass on each atom: Y = −K off atom i.
inline std::vector<RandomVariable> steep_positions(const RandomVariable& x, const std::vector<double>& depths = {5, 20, 60}) {
    std::vector<RandomVariable> ys;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (double k : depths) {
            std::vector<double> y(x.size(), -k);
            y[i] = 0;
            ys.emplace_back(std::move(y), x.weights());
        }
    return ys;
}

/// Checks ρ(λX + Y) − ρ(Y) ≤ γ(λ) over the grid and the family of positions.
inline InitialPositionReport initial_position_test(const RiskMeasureSpec& spec, const RandomVariable& x,
                                                   const ShapeFunction& g, const std::vector<RandomVariable>& ys,
                                                   const std::vector<double>& grid = default_lambda_grid()) {
    if (std::abs(g.value_at_zero()) > 1e-12) throw InvalidInput("initial-position test needs gamma(0) = 0");
    InitialPositionReport r;
    r.predicate = x.max() <= g.right_derivative_at_zero() + 1e-8;
    for (std::size_t j = 0; j < ys.size(); ++j) {
        const auto p = relative_profile(spec, x, ys[j], grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double gap = p.values[i] - g(grid[i]);
            r.worst_gap = std::max(r.worst_gap, gap);
            if (gap > 1e-9 && r.bound_holds_for_all) {
                r.bound_holds_for_all = false;
                r.counterexample = j;
            }
        }
    }
    return r;
}

}  // namespace liqrisk
