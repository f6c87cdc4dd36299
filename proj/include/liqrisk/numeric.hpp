#pragma once

/// Shared numeric plumbing: error types, 1-D solvers, grids and limit verdicts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace liqrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateFunction : std::domain_error {
    using std::domain_error::domain_error;
};
struct UnboundedRisk : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SizeError : std::length_error {
    using std::length_error::length_error;
};
struct NumericalInstability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "inconclusive";
    }
}

/// Ascending geometric grid from lo to hi with `per_decade` points per factor 10.
inline std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0) || !(hi >= lo) || per_decade < 1) throw InvalidInput("geometric_grid: bad range");
    const double decades = std::log10(hi / lo);
    const int n = static_cast<int>(std::lround(decades * per_decade));
    std::vector<double> g;
    g.reserve(n + 1);
    for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    if (n > 0) g.back() = hi;
    return g;
}

/// Geometric grid with a fixed ratio, lo * ratio^k <= hi.
inline std::vector<double> ratio_grid(double lo, double hi, double ratio) {
    if (!(lo > 0) || !(ratio > 1)) throw InvalidInput("ratio_grid: bad range");
    std::vector<double> g;
    for (int k = 0;; ++k) {
        double v = lo * std::pow(ratio, k);
        if (v > hi * (1 + 1e-12)) break;
        g.push_back(v);
    }
    return g;
}

/// Result of a bracketed 1-D minimization.
struct MinResult {
    double x = 0;
    double value = kInf;
    bool at_lower_edge = false;
    bool at_upper_edge = false;
};

/// Golden-section minimization of a unimodal function on [a, b].
/// Endpoint values are compared at the end so boundary minima are reported as such.
inline MinResult golden_section(const std::function<double(double)>& f, double a, double b,
                                double xtol = 1e-12, int max_iter = 400) {
    const double invphi = (std::sqrt(5.0) - 1) / 2;
    double lo = a, hi = b;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (hi - lo) > xtol * (1 + std::abs(lo) + std::abs(hi)); ++it) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - invphi * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + invphi * (hi - lo); f2 = f(x2);
        }
    }
    MinResult r;
    if (f1 <= f2) { r.x = x1; r.value = f1; } else { r.x = x2; r.value = f2; }
    const double fa = f(a), fb = f(b);
    if (fa <= r.value) { r.x = a; r.value = fa; }
    if (fb < r.value) { r.x = b; r.value = fb; }
    const double edge = 1e-9 * (b - a);
    r.at_lower_edge = (r.x - a) <= edge;
    r.at_upper_edge = (b - r.x) <= edge;
    return r;
}

/// Bisection on a nonincreasing predicate boundary: returns the smallest x in [lo, hi]
/// (to tolerance) with ok(x) true, assuming ok(lo) false and ok(hi) true.
/// Stops at abs_tol (if > 0) or when the midpoint no longer separates the endpoints.
inline double bisect_boundary(const std::function<bool(double)>& ok, double lo, double hi,
                              double abs_tol = 0.0, int max_iter = 2000) {
    for (int it = 0; it < max_iter; ++it) {
        if (abs_tol > 0 && hi - lo <= abs_tol) break;
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        if (ok(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

/// Stable log(sum_i w_i exp(x_i)) with weights summing to one.
inline double log_mean_exp(const std::vector<double>& x, const std::vector<double>& w) {
    if (x.empty()) throw InvalidInput("log_mean_exp: empty");
    double mx = -kInf, mn = kInf;
    for (double v : x) { mx = std::max(mx, v); mn = std::min(mn, v); }
    if (mx == kInf) return kInf;
    if (std::max(std::abs(mx), std::abs(mn)) < 1.0) {
        // small arguments: log1p/expm1 keep relative precision as lambda -> 0
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::expm1(x[i]);
        return std::log1p(s);
    }
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::exp(x[i] - mx);
    return mx + std::log(s);
}

/// Kahan-compensated weighted sum.
inline double weighted_sum(const std::vector<double>& x, const std::vector<double>& w) {
    double s = 0, comp = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = w[i] * x[i] - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return s;
}

/// Limit verdict for a sampled sequence on a geometric grid (log-domain values).
/// "to infinity": monotone nondecreasing over the last decade and exceeding 1e6.
/// "to zero": monotone nonincreasing over the last decade and below 1e-6.
/// A sequence that settles (last-decade variation under 1%) at a finite level
/// on the wrong side of the threshold is a falsified limit; anything else is inconclusive.
struct LimitEvidence {
    std::vector<double> x;
    std::vector<double> log_values;
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
};

enum class LimitTarget { infinity, zero };

inline LimitEvidence limit_verdict(const std::vector<double>& x, const std::vector<double>& log_values,
                                   LimitTarget target) {
    LimitEvidence ev{x, log_values, Verdict::inconclusive, ""};
    if (x.size() < 2 || x.size() != log_values.size()) {
        ev.reason = "too few samples";
        return ev;
    }
    const double last_x = x.back();
    std::size_t start = 0;
    while (start < x.size() && x[start] < last_x / 10 * (1 - 1e-12)) ++start;
    bool mono = true;
    const double slack = 1e-12;
    for (std::size_t i = start + 1; i < x.size(); ++i) {
        const double a = log_values[i - 1], b = log_values[i];
        if (std::isnan(a) || std::isnan(b)) { mono = false; break; }
        if (target == LimitTarget::infinity ? (b < a - slack * (1 + std::abs(a)))
                                            : (b > a + slack * (1 + std::abs(a))))
            mono = false;
    }
    const double last = log_values.back();
    const double thr = std::log(1e6);
    const bool beyond = target == LimitTarget::infinity ? last > thr : last < -thr;
    if (mono && beyond) {
        ev.verdict = Verdict::holds;
        ev.reason = "monotone over last decade, threshold crossed";
        return ev;
    }
    const double first = log_values[start];
    const bool finite_pair = std::isfinite(first) && std::isfinite(last);
    if (finite_pair && std::abs(last - first) < std::log(1.01) && !beyond) {
        ev.verdict = Verdict::fails;
        ev.reason = "sequence settled at a finite level";
        return ev;
    }
    ev.reason = mono ? "monotone but threshold not crossed" : "not monotone over last decade";
    return ev;
}

/// Thread cap from LIQRISK_THREADS (0 or unset = serial).
inline unsigned thread_cap() {
    const char* s = std::getenv("LIQRISK_THREADS");
    if (!s) return 0;
    try {
        const long v = std::stol(s);
        return v > 0 ? static_cast<unsigned>(v) : 0u;
    } catch (...) {
        return 0;
    }
}

/// Evaluate fn(i) for i in [0, n) into a vector; output order never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, unsigned threads) {
    std::vector<T> out(n);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(t);
    for (unsigned k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            try {
                for (std::size_t i = k; i < n; i += t) out[i] = fn(i);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace liqrisk
