#pragma once

// Optimal transport on finite metric spaces, transport inequalities and concentration functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "convex_core.hpp"
#include "duality.hpp"
#include "measures.hpp"
#include "numeric.hpp"
#include "profiles.hpp"
#include "risk.hpp"

namespace liqrisk {

using Matrix = std::vector<std::vector<double>>;

/// Largest instance the exact solver accepts, per side.
inline constexpr std::size_t kMaxTransportPoints = 64;

/// (Ω, d) on finitely many labelled points; a genuine metric is enforced at construction.
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;

    FiniteMetricSpace(std::vector<std::string> labels, Matrix d) : labels_(std::move(labels)), d_(std::move(d)) {
        const std::size_t n = d_.size();
        if (n == 0) throw InvalidInput("metric space needs at least one point");
        if (labels_.empty()) {
            for (std::size_t i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
        }
        if (labels_.size() != n) throw InvalidInput("label count differs from matrix size");
        double scale = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d_[i].size() != n) throw InvalidInput("distance matrix must be square");
            for (std::size_t j = 0; j < n; ++j) {
                const double v = d_[i][j];
                if (!std::isfinite(v) || v < 0) throw InvalidInput("distances must be finite and nonnegative");
                scale = std::max(scale, v);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (d_[i][i] != 0) throw InvalidInput("distance matrix needs a zero diagonal");
            for (std::size_t j = 0; j < n; ++j) {
                if (d_[i][j] != d_[j][i]) throw InvalidInput("distance matrix must be symmetric");
                if (i != j && !(d_[i][j] > 0)) throw InvalidInput("distinct points must be at positive distance");
            }
        }
        // Rounding in computed distances can break the inequality by an ulp or two.
        const double tol = 1e-12 * scale;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (d_[i][k] > d_[i][j] + d_[j][k] + tol)
                        throw InvalidInput("triangle inequality fails at (" + labels_[i] + ", " + labels_[j] + ", " +
                                           labels_[k] + ")");
    }

    /// Points in ℝ^k with the Euclidean distance.
    static FiniteMetricSpace euclidean(const std::vector<std::vector<double>>& pts) {
        const std::size_t n = pts.size();
        Matrix d(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (pts[i].size() != pts[j].size()) throw InvalidInput("points have inconsistent dimension");
                double s = 0;
                for (std::size_t k = 0; k < pts[i].size(); ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
                d[i][j] = d[j][i] = std::sqrt(s);
            }
        return FiniteMetricSpace({}, std::move(d));
    }

    static FiniteMetricSpace line(const std::vector<double>& xs) {
        std::vector<std::vector<double>> pts;
        for (double x : xs) pts.push_back({x});
        return euclidean(pts);
    }

    std::size_t size() const { return d_.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d_[i][j]; }
    const Matrix& matrix() const { return d_; }
    const std::vector<std::string>& labels() const { return labels_; }

    double diameter() const {
        double m = 0;
        for (const auto& row : d_) m = std::max(m, *std::max_element(row.begin(), row.end()));
        return m;
    }

private:
    std::vector<std::string> labels_;
    Matrix d_;
};

/// A cost c(x, y) ≥ 0 normalized so that every row has infimum 0.
class TransportCost {
public:
    TransportCost() = default;

    explicit TransportCost(Matrix c) : c_(std::move(c)) {
        if (c_.empty()) throw InvalidInput("cost matrix is empty");
        const std::size_t m = c_.front().size();
        for (const auto& row : c_) {
            if (row.size() != m || m == 0) throw InvalidInput("cost matrix must be rectangular");
            double lo = kInf;
            for (double v : row) {
                if (!std::isfinite(v) || v < 0) throw InvalidInput("costs must be finite and nonnegative");
                lo = std::min(lo, v);
            }
            if (lo > 1e-12) throw InvalidInput("every row of the cost needs infimum 0");
        }
    }

    /// d^order on a metric space.
    static TransportCost from_metric(const FiniteMetricSpace& s, double order = 1) {
        Matrix c = s.matrix();
        for (auto& row : c)
            for (auto& v : row) v = std::pow(v, order);
        return TransportCost(std::move(c));
    }

    std::size_t rows() const { return c_.size(); }
    std::size_t cols() const { return c_.front().size(); }
    double operator()(std::size_t i, std::size_t j) const { return c_[i][j]; }
    const Matrix& matrix() const { return c_; }

private:
    Matrix c_;
};

struct TransportSolution {
    double primal = 0;        ///< Σ π_ij c_ij at the optimal plan
    double dual = 0;          ///< E^P φ + E^Q ψ
    Matrix plan;
    std::vector<double> phi;  ///< potential on the P side
    std::vector<double> psi;  ///< potential on the Q side; φ(x) + ψ(y) ≤ c(x, y)
    std::size_t pivots = 0;
};

namespace detail {

inline void validate_marginals(const std::vector<double>& p, const std::vector<double>& q, const Matrix& c) {
    if (p.empty() || q.empty()) throw InvalidInput("marginals must be nonempty");
    if (p.size() > kMaxTransportPoints || q.size() > kMaxTransportPoints)
        throw SizeError("exact transport is limited to 64 points per side");
    if (c.size() != p.size()) throw InvalidInput("cost rows must match the first marginal");
    for (const auto& row : c)
        if (row.size() != q.size()) throw InvalidInput("cost columns must match the second marginal");
    double sp = 0, sq = 0;
    for (double v : p) {
        if (!(v >= 0) || !std::isfinite(v)) throw InvalidInput("marginal masses must be finite and nonnegative");
        sp += v;
    }
    for (double v : q) {
        if (!(v >= 0) || !std::isfinite(v)) throw InvalidInput("marginal masses must be finite and nonnegative");
        sq += v;
    }
    if (!(sp > 0)) throw InvalidInput("marginals carry no mass");
    if (std::abs(sp - sq) > 1e-10 * std::max(1.0, sp)) throw InvalidInput("marginals have different total mass");
}

/// Transportation simplex on the supported rows and columns: northwest-corner start,
/// MODI potentials, Dantzig entering rule with a switch to Bland's rule after a run of degenerate pivots.
struct TransportSimplex {
    std::size_t n = 0, m = 0;
    Matrix c, flow;
    std::vector<std::vector<char>> basic;
    std::vector<double> u, v;

    void potentials() {
        std::vector<char> ku(n, 0), kv(m, 0);
        u.assign(n, 0.0);
        v.assign(m, 0.0);
        ku[0] = 1;
        std::queue<std::size_t> todo;  // nodes: rows 0..n−1, columns n..n+m−1
        todo.push(0);
        while (!todo.empty()) {
            const std::size_t k = todo.front();
            todo.pop();
            if (k < n) {
                for (std::size_t j = 0; j < m; ++j)
                    if (basic[k][j] && !kv[j]) {
                        v[j] = c[k][j] - u[k];
                        kv[j] = 1;
                        todo.push(n + j);
                    }
            } else {
                const std::size_t j = k - n;
                for (std::size_t i = 0; i < n; ++i)
                    if (basic[i][j] && !ku[i]) {
                        u[i] = c[i][j] - v[j];
                        ku[i] = 1;
                        todo.push(i);
                    }
            }
        }
    }

    /// Basic cells on the tree path from row r to column s, in order.
    std::vector<std::pair<std::size_t, std::size_t>> tree_path(std::size_t r, std::size_t s) const {
        const std::size_t nodes = n + m;
        std::vector<std::size_t> parent(nodes, nodes);
        std::vector<char> seen(nodes, 0);
        std::queue<std::size_t> todo;
        todo.push(r);
        seen[r] = 1;
        while (!todo.empty()) {
            const std::size_t k = todo.front();
            todo.pop();
            if (k == n + s) break;
            if (k < n) {
                for (std::size_t j = 0; j < m; ++j)
                    if (basic[k][j] && !seen[n + j]) {
                        seen[n + j] = 1;
                        parent[n + j] = k;
                        todo.push(n + j);
                    }
            } else {
                const std::size_t j = k - n;
                for (std::size_t i = 0; i < n; ++i)
                    if (basic[i][j] && !seen[i]) {
                        seen[i] = 1;
                        parent[i] = k;
                        todo.push(i);
                    }
            }
        }
        if (!seen[n + s]) throw NumericalInstability("transport basis is not a spanning tree");
        std::vector<std::pair<std::size_t, std::size_t>> path;
        for (std::size_t k = n + s; k != r; k = parent[k]) {
            const std::size_t a = parent[k];
            if (k >= n) path.emplace_back(a, k - n);
            else path.emplace_back(k, a - n);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    std::size_t solve(std::vector<double> a, std::vector<double> b) {
        flow.assign(n, std::vector<double>(m, 0.0));
        basic.assign(n, std::vector<char>(m, 0));
        {
            std::size_t i = 0, j = 0;
            for (;;) {
                const double x = std::min(a[i], b[j]);
                flow[i][j] = x;
                basic[i][j] = 1;
                a[i] -= x;
                b[j] -= x;
                if (i == n - 1 && j == m - 1) break;
                if (i == n - 1) ++j;
                else if (j == m - 1) ++i;
                else if (a[i] <= b[j]) ++i;
                else ++j;
            }
        }
        double cmax = 0;
        for (const auto& row : c)
            for (double x : row) cmax = std::max(cmax, x);
        const double tol = 1e-12 * (1 + cmax);
        const std::size_t cap = 200000;
        std::size_t degenerate = 0, pivots = 0;
        bool bland = false;
        for (; pivots < cap; ++pivots) {
            potentials();
            double best = -tol;
            std::size_t er = n, es = m;
            for (std::size_t i = 0; i < n && !(bland && er < n); ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (basic[i][j]) continue;
                    const double rc = c[i][j] - u[i] - v[j];
                    if (rc < best) {
                        best = rc;
                        er = i;
                        es = j;
                        if (bland) break;
                    }
                }
            if (er == n) return pivots;
            const auto path = tree_path(er, es);
            // Path cells alternate in sign, starting with − next to the entering row.
            double theta = kInf;
            std::size_t leave = path.size();
            for (std::size_t k = 0; k < path.size(); k += 2) {
                const auto [i, j] = path[k];
                const double f = flow[i][j];
                const bool better = f < theta || (f == theta && leave < path.size() &&
                                                  i * m + j < path[leave].first * m + path[leave].second);
                if (better) {
                    theta = f;
                    leave = k;
                }
            }
            theta = std::max(theta, 0.0);
            for (std::size_t k = 0; k < path.size(); ++k) {
                const auto [i, j] = path[k];
                flow[i][j] += (k % 2 == 0) ? -theta : theta;
            }
            flow[er][es] = theta;
            basic[er][es] = 1;
            const auto [li, lj] = path[leave];
            flow[li][lj] = 0;
            basic[li][lj] = 0;
            if (theta == 0) {
                if (++degenerate > n + m) bland = true;
            } else {
                degenerate = 0;
            }
        }
        throw NumericalInstability("transport simplex did not converge");
    }
};

}  // namespace detail

/// Exact optimal transport between masses p and q under cost c, with optimal potentials on every point.
inline TransportSolution solve_transport(const std::vector<double>& p, const std::vector<double>& q, const Matrix& c) {
    detail::validate_marginals(p, q, c);
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) rows.push_back(i);
    for (std::size_t j = 0; j < q.size(); ++j)
        if (q[j] > 0) cols.push_back(j);

    detail::TransportSimplex lp;
    lp.n = rows.size();
    lp.m = cols.size();
    lp.c.assign(lp.n, std::vector<double>(lp.m));
    for (std::size_t a = 0; a < lp.n; ++a)
        for (std::size_t b = 0; b < lp.m; ++b) lp.c[a][b] = c[rows[a]][cols[b]];
    std::vector<double> a(lp.n), b(lp.m);
    for (std::size_t k = 0; k < lp.n; ++k) a[k] = p[rows[k]];
    for (std::size_t k = 0; k < lp.m; ++k) b[k] = q[cols[k]];

    TransportSolution s;
    s.pivots = lp.solve(a, b);
    lp.potentials();

    s.plan.assign(p.size(), std::vector<double>(q.size(), 0.0));
    for (std::size_t x = 0; x < lp.n; ++x)
        for (std::size_t y = 0; y < lp.m; ++y) {
            const double f = std::max(lp.flow[x][y], 0.0);
            s.plan[rows[x]][cols[y]] = f;
            s.primal += f * lp.c[x][y];
        }

    // c-transforms extend the potentials to unsupported points and restore exact feasibility.
    s.psi.assign(q.size(), kInf);
    for (std::size_t j = 0; j < q.size(); ++j)
        for (std::size_t x = 0; x < lp.n; ++x) s.psi[j] = std::min(s.psi[j], c[rows[x]][j] - lp.u[x]);
    s.phi.assign(p.size(), kInf);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) s.phi[i] = std::min(s.phi[i], c[i][j] - s.psi[j]);
    for (std::size_t i = 0; i < p.size(); ++i) s.dual += p[i] * s.phi[i];
    for (std::size_t j = 0; j < q.size(); ++j) s.dual += q[j] * s.psi[j];
    return s;
}

/// T_c(P, Q)
inline double transport_cost(const std::vector<double>& p, const std::vector<double>& q, const TransportCost& c) {
    return solve_transport(p, q, c.matrix()).primal;
}

/// W_order(P, Q) on a metric space.
inline double transport_cost(const std::vector<double>& p, const std::vector<double>& q, const FiniteMetricSpace& s,
                             double order = 1) {
    if (!(order >= 1)) throw InvalidInput("transport order must be at least 1");
    if (p.size() != s.size() || q.size() != s.size()) throw InvalidInput("marginals must live on the space's points");
    const double t = solve_transport(p, q, TransportCost::from_metric(s, order).matrix()).primal;
    return order == 1 ? t : std::pow(std::max(t, 0.0), 1 / order);
}

struct KantorovichDual {
    double value = 0;
    double primal = 0;
    std::vector<double> phi;
    std::vector<double> psi;
    double max_constraint_excess = 0;  ///< max φ(x) + ψ(y) − c(x, y)
};

inline KantorovichDual kantorovich_dual(const std::vector<double>& p, const std::vector<double>& q,
                                        const TransportCost& c) {
    const auto s = solve_transport(p, q, c.matrix());
    KantorovichDual k{s.dual, s.primal, s.phi, s.psi, -kInf};
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            k.max_constraint_excess = std::max(k.max_constraint_excess, s.phi[i] + s.psi[j] - c(i, j));
    return k;
}

inline KantorovichDual kantorovich_dual(const std::vector<double>& p, const std::vector<double>& q,
                                        const FiniteMetricSpace& s) {
    return kantorovich_dual(p, q, TransportCost::from_metric(s, 1));
}

/// W_order between scalar atom sets by the merged quantile sweep; zero weights allowed.
inline double wasserstein_1d(const std::vector<double>& xp, const std::vector<double>& wp,
                             const std::vector<double>& xq, const std::vector<double>& wq, int order = 1) {
    if (order != 1 && order != 2) throw InvalidInput("wasserstein_1d supports order 1 or 2");
    auto sorted = [](const std::vector<double>& x, const std::vector<double>& w) {
        if (x.size() != w.size() || x.empty()) throw InvalidInput("values and weights differ in length");
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
        std::vector<std::pair<double, double>> out;
        for (std::size_t i : idx)
            if (w[i] > 0) out.emplace_back(x[i], w[i]);
        return out;
    };
    const auto a = sorted(xp, wp);
    const auto b = sorted(xq, wq);
    std::size_t i = 0, j = 0;
    double ra = a.empty() ? 0 : a[0].second, rb = b.empty() ? 0 : b[0].second, total = 0;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(ra, rb);
        const double gap = std::abs(a[i].first - b[j].first);
        total += t * (order == 1 ? gap : gap * gap);
        ra -= t;
        rb -= t;
        if (ra <= 0) {
            if (++i < a.size()) ra = a[i].second;
        }
        if (rb <= 0) {
            if (++j < b.size()) rb = b[j].second;
        }
    }
    return order == 1 ? total : std::sqrt(total);
}

inline double wasserstein_1d(const DiscreteDistribution& p, const DiscreteDistribution& q, int order = 1) {
    if (p.dim() != 1 || q.dim() != 1) throw InvalidInput("wasserstein_1d needs scalar atoms");
    return wasserstein_1d(p.values(), p.weights(), q.values(), q.weights(), order);
}

/// Both distributions placed on the union of their atoms, as a line metric with two weight vectors.
struct LineEmbedding {
    FiniteMetricSpace space;
    std::vector<double> p, q;
};

inline LineEmbedding embed_on_line(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    std::map<double, std::pair<double, double>> mass;
    const auto pv = p.values(), qv = q.values();
    for (std::size_t i = 0; i < pv.size(); ++i) mass[pv[i]].first += p.weights()[i];
    for (std::size_t i = 0; i < qv.size(); ++i) mass[qv[i]].second += q.weights()[i];
    LineEmbedding e;
    std::vector<double> xs;
    for (const auto& [x, w] : mass) {
        xs.push_back(x);
        e.p.push_back(w.first);
        e.q.push_back(w.second);
    }
    e.space = FiniteMetricSpace::line(xs);
    return e;
}

// ---- subsets and Lipschitz functions -------------------------------------------------------

using PointSet = std::uint64_t;  ///< bitmask over the points of a space

inline double set_mass(const std::vector<double>& p, PointSet a) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (a >> i & 1u) s += p[i];
    return s;
}

/// d(·, A); +inf for the empty set.
inline std::vector<double> distance_to_set(const FiniteMetricSpace& s, PointSet a) {
    std::vector<double> d(s.size(), kInf);
    for (std::size_t j = 0; j < s.size(); ++j)
        if (a >> j & 1u)
            for (std::size_t i = 0; i < s.size(); ++i) d[i] = std::min(d[i], s(i, j));
    return d;
}

/// A^r = {ω : d(ω, A) < r}
inline PointSet enlargement(const FiniteMetricSpace& s, PointSet a, double r) {
    const auto d = distance_to_set(s, a);
    PointSet out = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (d[i] < r) out |= PointSet{1} << i;
    return out;
}

inline double set_distance(const FiniteMetricSpace& s, PointSet a, PointSet b) {
    double m = kInf;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if ((a >> i & 1u) && (b >> j & 1u)) m = std::min(m, s(i, j));
    return m;
}

/// P_C = P(· ∩ C)/P(C) as a weight vector on all points.
inline std::vector<double> conditional(const std::vector<double>& p, PointSet c) {
    const double m = set_mass(p, c);
    if (!(m > 0)) throw InvalidInput("conditioning set has zero mass");
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (c >> i & 1u) out[i] = p[i] / m;
    return out;
}

/// Density of P_C with respect to P.
inline TiltedMeasure conditional_tilt(const std::vector<double>& p, PointSet c) {
    const double m = set_mass(p, c);
    if (!(m > 0)) throw InvalidInput("conditioning set has zero mass");
    std::vector<double> z(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (c >> i & 1u) z[i] = 1 / m;
    return TiltedMeasure(p, std::move(z));
}

/// 1-Lipschitz probes: every d(·, a), then `random_count` McShane extensions
/// f(x) = min_{s∈S}(v_s + d(x, s)) of random values on random subsets S.
inline std::vector<std::vector<double>> lipschitz_family(const FiniteMetricSpace& s, std::size_t random_count,
                                                         std::uint64_t seed) {
    const std::size_t n = s.size();
    std::vector<std::vector<double>> out;
    for (std::size_t a = 0; a < n; ++a) out.push_back(distance_to_set(s, PointSet{1} << a));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-s.diameter(), s.diameter());
    std::bernoulli_distribution pick(0.5);
    for (std::size_t k = 0; k < random_count; ++k) {
        std::vector<double> f(n, kInf);
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            const double vj = val(rng);
            if (!pick(rng)) continue;
            any = true;
            for (std::size_t i = 0; i < n; ++i) f[i] = std::min(f[i], vj + s(i, j));
        }
        if (!any) f.assign(n, 0.0);
        out.push_back(std::move(f));
    }
    return out;
}

/// Largest |f(x) − f(y)| / d(x, y) over distinct pairs.
inline double lipschitz_constant(const FiniteMetricSpace& s, const std::vector<double>& f) {
    double L = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) L = std::max(L, std::abs(f[i] - f[j]) / s(i, j));
    return L;
}

// ---- generalized dual inequality -----------------------------------------------------------

struct GeneralizedDualReport {
    bool primal_holds = true;   ///< ρ(λX + Y) − ρ(Y) ≤ γ(cλ) on the grid and at every dual-witness λ
    bool dual_holds = true;     ///< γ*(E^Q X / c) ≤ ᾱ(Q) on every tilt
    bool concordant = true;
    double worst_gap = -kInf;
    double worst_excess = -kInf;
    std::vector<double> adjusted_penalties;  ///< ᾱ(Q) = α(Q) − sup_Y (E^Q Y − ρ(Y)), per tilt
    std::size_t tilt_count = 0;
};

/// Relative bounds over initial positions Y ∈ Φ against the adjusted penalty ᾱ.
/// Failing (λ, Y) pairs contribute their optimal tilts; failing tilts are replayed at their witness λ.
inline GeneralizedDualReport check_generalized_dual(const RiskMeasureSpec& spec, const RandomVariable& x,
                                                    const ShapeFunction& g, const std::vector<RandomVariable>& phi,
                                                    const std::vector<TiltedMeasure>& tilts, double c = 1,
                                                    const std::vector<double>& grid = default_lambda_grid(),
                                                    double tol = 1e-9) {
    if (phi.empty()) throw InvalidInput("the family of initial positions is empty");
    if (!(c > 0)) throw InvalidInput("scaling constant must be positive");
    GeneralizedDualReport r;
    std::vector<double> base;
    for (const auto& y : phi) {
        if (y.size() != x.size()) throw InvalidInput("initial positions must live on the atoms of X");
        base.push_back(rho(spec, y));
        if (!std::isfinite(base.back())) throw InvalidInput("initial position has infinite risk");
    }
    auto table = tabulate_tilts(spec, x, tilts);
    for (std::size_t k = 0; k < phi.size(); ++k)
        for (double lam : grid) {
            const auto pos = phi[k] + x.scaled(lam);
            const double gap = rho(spec, pos) - base[k] - g(c * lam);
            r.worst_gap = std::max(r.worst_gap, gap);
            if (gap > tol) {
                r.primal_holds = false;
                table.add(spec, x, optimal_tilt(spec, pos));
            }
        }
    r.tilt_count = table.size();
    for (std::size_t j = 0; j < table.size(); ++j) {
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            const double v = table.tilts[j].expectation(phi[k].values()) - base[k];
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        const double abar = table.penalties[j] - best;
        r.adjusted_penalties.push_back(abar);
        if (abar == kInf) continue;
        const double excess = g.conjugate(table.means[j] / c) - abar;
        r.worst_excess = std::max(r.worst_excess, excess);
        if (excess > tol) {
            r.dual_holds = false;
            const double lam = dual_witness_lambda(g, c, table.means[j], abar);
            const double gap = rho(spec, phi[arg] + x.scaled(lam)) - base[arg] - g(c * lam);
            r.worst_gap = std::max(r.worst_gap, gap);
            if (gap > tol) r.primal_holds = false;
        }
    }
    r.concordant = r.primal_holds == r.dual_holds;
    return r;
}

// ---- transport inequalities ----------------------------------------------------------------

struct TransportInequalityReport {
    bool dual_holds = true;       ///< γ*(T(P, Q)/c) ≤ α(Q) + tol on every tilt
    bool function_holds = true;   ///< ρ(λY) ≤ γ(cλ) for every probe Y on the grid and witness λ
    bool concordant = true;
    double worst_excess = -kInf;
    double worst_gap = -kInf;
    std::size_t violations = 0;
    std::size_t tilt_count = 0;
    std::size_t function_count = 0;
    std::vector<double> distances;  ///< transport cost per tilt
    std::optional<TiltedMeasure> witness;
};

namespace detail {

/// Shared engine: `cost_of(q)` returns the transport cost and the probe Y with E^Q Y − (shift) equal to it.
/// Probes Y are centered variables on P's atoms (for T₁: f − E^P f; for T_c: ψ + E^P φ).
struct ProbeResult {
    double cost;
    std::vector<double> probe;
};

template <class CostFn>
TransportInequalityReport transport_inequality(const RiskMeasureSpec& spec, const std::vector<double>& p,
                                               const ShapeFunction& g, std::vector<TiltedMeasure> tilts,
                                               std::vector<std::vector<double>> probes, double c,
                                               const std::vector<double>& grid, CostFn&& cost_of, double tol) {
    if (!(c > 0)) throw InvalidInput("scaling constant must be positive");
    TransportInequalityReport r;
    auto check_probe = [&](const std::vector<double>& y, std::vector<TiltedMeasure>& extra) {
        const RandomVariable v(y, p);
        for (double lam : grid) {
            const double gap = rho_scaled(spec, v, lam) - g(c * lam);
            r.worst_gap = std::max(r.worst_gap, gap);
            if (gap > tol) {
                r.function_holds = false;
                extra.push_back(optimal_tilt(spec, v.scaled(lam)));
            }
        }
    };
    std::vector<TiltedMeasure> extra;
    for (const auto& y : probes) check_probe(y, extra);
    for (auto& q : extra) tilts.push_back(std::move(q));
    r.function_count = probes.size();

    for (const auto& q : tilts) {
        if (q.base_weights().size() != p.size()) throw InvalidInput("tilt and reference live on different atoms");
        const double a = penalty(spec, q);
        const auto pr = cost_of(q);
        r.distances.push_back(pr.cost);
        ++r.tilt_count;
        if (a == kInf) continue;
        const double excess = g.conjugate(pr.cost / c) - a;
        if (excess > r.worst_excess) {
            r.worst_excess = excess;
            if (excess > tol) r.witness = q;
        }
        if (excess > tol) {
            r.dual_holds = false;
            ++r.violations;
            const double lam = dual_witness_lambda(g, c, pr.cost, a);
            const double gap = rho_scaled(spec, RandomVariable(pr.probe, p), lam) - g(c * lam);
            r.worst_gap = std::max(r.worst_gap, gap);
            ++r.function_count;
            if (gap > tol) r.function_holds = false;
        }
    }
    r.concordant = r.dual_holds == r.function_holds;
    return r;
}

inline std::vector<double> centered(std::vector<double> f, const std::vector<double>& p) {
    const double m = weighted_sum(f, p);
    for (auto& v : f) v -= m;
    return f;
}

}  // namespace detail

/// γ*(W₁(P, Q)/c) ≤ α(Q) per tilt, against ρ(λ(f − E f)) ≤ γ(cλ) for 1-Lipschitz probes f.
/// Probes are distance functions, random McShane extensions and the optimal W₁ potentials of failing tilts.
inline TransportInequalityReport check_t1(const FiniteMetricSpace& s, const std::vector<double>& p,
                                          const RiskMeasureSpec& spec, const ShapeFunction& g,
                                          const std::vector<TiltedMeasure>& tilts, double c = 1,
                                          std::size_t random_functions = 8, std::uint64_t seed = 7,
                                          const std::vector<double>& grid = default_lambda_grid(),
                                          double tol = 1e-9) {
    if (p.size() != s.size()) throw InvalidInput("reference weights must match the space");
    std::vector<std::vector<double>> probes;
    for (auto& f : lipschitz_family(s, random_functions, seed)) {
        probes.push_back(detail::centered(f, p));
        for (auto& v : f) v = -v;
        probes.push_back(detail::centered(std::move(f), p));
    }
    const auto cost = TransportCost::from_metric(s, 1);
    auto cost_of = [&](const TiltedMeasure& q) {
        const auto sol = solve_transport(q.probabilities(), p, cost.matrix());
        // With P on the ψ side, ψ is 1-Lipschitz and E^Q φ + E^P ψ = W₁ with φ = −ψ.
        std::vector<double> f(sol.psi.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = -sol.psi[i];
        return detail::ProbeResult{sol.primal, detail::centered(std::move(f), p)};
    };
    return detail::transport_inequality(spec, p, g, tilts, std::move(probes), c, grid, cost_of, tol);
}

/// γ*(T_c(P, Q)/c) ≤ α(Q) per tilt, against ρ(λ(ψ + E^P φ)) ≤ γ(cλ) for the LP-optimal pair of every tilt.
inline TransportInequalityReport check_tc(const std::vector<double>& p, const TransportCost& cost,
                                          const RiskMeasureSpec& spec, const ShapeFunction& g,
                                          const std::vector<TiltedMeasure>& tilts, double c = 1,
                                          const std::vector<double>& grid = default_lambda_grid(),
                                          double tol = 1e-9) {
    if (cost.rows() != p.size() || cost.cols() != p.size()) throw InvalidInput("cost must be square on P's atoms");
    std::vector<std::vector<double>> probes;
    auto cost_of = [&](const TiltedMeasure& q) {
        const auto sol = solve_transport(p, q.probabilities(), cost.matrix());
        const double shift = weighted_sum(sol.phi, p);
        std::vector<double> y(sol.psi);
        for (auto& v : y) v += shift;
        return detail::ProbeResult{sol.primal, std::move(y)};
    };
    for (const auto& q : tilts) probes.push_back(cost_of(q).probe);
    return detail::transport_inequality(spec, p, g, tilts, std::move(probes), c, grid, cost_of, tol);
}

struct SupNormReport {
    bool holds = true;          ///< H(Q|P) ≤ log ‖dQ/dP‖_∞ + 1e-10 on every tilt
    double worst_gap = -kInf;   ///< max H − log ‖z‖_∞
    double c_transport = 0;     ///< sup W_p / √H
    double c_supnorm = 0;       ///< sup W_p / √(log ‖z‖_∞)
    double c_transport_grid = kInf;  ///< smallest witness-grid constant covering every tilt
    double c_supnorm_grid = kInf;
    std::vector<double> distances;
};

/// The trivial direction of the T_p / sup-norm equivalence per tilt, plus witness constants for both forms.
inline SupNormReport tp_supnorm_check(const FiniteMetricSpace& s, const std::vector<double>& p, int order,
                                      const std::vector<TiltedMeasure>& tilts) {
    if (order != 1 && order != 2) throw InvalidInput("order must be 1 or 2");
    if (p.size() != s.size()) throw InvalidInput("reference weights must match the space");
    SupNormReport r;
    std::vector<double> w, h, lz;
    for (const auto& q : tilts) {
        const double wp = transport_cost(q.probabilities(), p, s, order);
        const double ent = relative_entropy(q);
        const double lmax = std::log(q.max_density());
        r.worst_gap = std::max(r.worst_gap, ent - lmax);
        if (ent > lmax + 1e-10) r.holds = false;
        r.distances.push_back(wp);
        w.push_back(wp);
        h.push_back(ent);
        lz.push_back(lmax);
        if (wp > 1e-14) {
            r.c_transport = std::max(r.c_transport, ent > 0 ? wp / std::sqrt(ent) : kInf);
            r.c_supnorm = std::max(r.c_supnorm, lmax > 0 ? wp / std::sqrt(lmax) : kInf);
        }
    }
    const auto& cs = witness_grid();
    auto covers = [&](const std::vector<double>& div) {
        return [&, div](std::size_t k) {
            for (std::size_t i = 0; i < w.size(); ++i)
                if (w[i] > cs[k] * std::sqrt(std::max(div[i], 0.0)) + 1e-12) return false;
            return true;
        };
    };
    if (const auto k = first_true(cs.size(), covers(h))) r.c_transport_grid = cs[*k];
    if (const auto k = first_true(cs.size(), covers(lz))) r.c_supnorm_grid = cs[*k];
    return r;
}

// ---- concentration functions ----------------------------------------------------------------

/// Sets with P(A) ≥ 1/2 are admitted up to this rounding allowance.
inline constexpr double kHalfMassTol = 1e-12;

inline constexpr std::size_t kMaxEnumerationPoints = 15;

struct ConcentrationFunction {
    std::vector<double> radii;
    std::vector<double> values;         ///< exact C_P(r)
    std::vector<PointSet> worst_sets;
    std::vector<double> lipschitz;      ///< sup P(f ≥ m_f + r) over the probe family
    bool agrees = true;                 ///< |exact − lipschitz| ≤ 1e-12 at every radius
};

namespace detail {

inline void check_enumerable(const FiniteMetricSpace& s, const std::vector<double>& p) {
    if (s.size() > kMaxEnumerationPoints) throw SizeError("subset enumeration is limited to 15 points");
    if (p.size() != s.size()) throw InvalidInput("weights must match the space");
}

/// d(·, A) for every subset A, built from A without its lowest point.
inline std::vector<std::vector<double>> all_set_distances(const FiniteMetricSpace& s) {
    const std::size_t n = s.size();
    const std::size_t total = std::size_t{1} << n;
    std::vector<std::vector<double>> d(total, std::vector<double>(n, kInf));
    for (std::size_t a = 1; a < total; ++a) {
        const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(a));
        const auto& prev = d[a & (a - 1)];
        for (std::size_t i = 0; i < n; ++i) d[a][i] = std::min(prev[i], s(i, low));
    }
    return d;
}

/// Smallest median of f under p.
inline double lower_median(const std::vector<double>& f, const std::vector<double>& p) {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    double cum = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        cum += p[idx[k]];
        const bool tie_next = k + 1 < idx.size() && f[idx[k + 1]] == f[idx[k]];
        if (!tie_next && cum >= 0.5 - kHalfMassTol) return f[idx[k]];
    }
    return f[idx.back()];
}

}  // namespace detail

/// C_P(r) = sup{1 − P(A^r) : P(A) ≥ 1/2} by enumeration, with the median form
/// sup P(f ≥ m_f + r) over d(·, A) for every A and any extra 1-Lipschitz probes.
inline ConcentrationFunction concentration_function(const FiniteMetricSpace& s, const std::vector<double>& p,
                                                    const std::vector<double>& radii,
                                                    const std::vector<std::vector<double>>& extra_probes = {}) {
    detail::check_enumerable(s, p);
    for (double r : radii)
        if (!(r > 0)) throw InvalidInput("radii must be positive");
    const std::size_t n = s.size();
    const std::size_t total = std::size_t{1} << n;
    const auto dist = detail::all_set_distances(s);
    ConcentrationFunction out;
    out.radii = radii;
    out.values.assign(radii.size(), 0.0);
    out.worst_sets.assign(radii.size(), (PointSet{1} << n) - 1);
    out.lipschitz.assign(radii.size(), 0.0);
    auto median_tail = [&](const std::vector<double>& f, std::size_t k) {
        const double m = detail::lower_median(f, p);
        double t = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (f[i] >= m + radii[k]) t += p[i];
        return t;
    };
    for (std::size_t a = 1; a < total; ++a) {
        const bool half = set_mass(p, a) >= 0.5 - kHalfMassTol;
        for (std::size_t k = 0; k < radii.size(); ++k) {
            if (half) {
                double miss = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (!(dist[a][i] < radii[k])) miss += p[i];
                if (miss > out.values[k]) {
                    out.values[k] = miss;
                    out.worst_sets[k] = a;
                }
            }
            out.lipschitz[k] = std::max(out.lipschitz[k], median_tail(dist[a], k));
        }
    }
    for (const auto& f : extra_probes)
        for (std::size_t k = 0; k < radii.size(); ++k) out.lipschitz[k] = std::max(out.lipschitz[k], median_tail(f, k));
    for (std::size_t k = 0; k < radii.size(); ++k)
        if (std::abs(out.values[k] - out.lipschitz[k]) > 1e-12) out.agrees = false;
    return out;
}

inline double concentration_function(const FiniteMetricSpace& s, const std::vector<double>& p, double r) {
    return concentration_function(s, p, std::vector<double>{r}).values.front();
}

// ---- the Marton argument --------------------------------------------------------------------

struct MartonBound {
    double value = 0;   ///< lower bound on P(A^r)
    double r0 = 0;      ///< (γ*)⁻¹(ℓ⁻¹(2))
    bool vacuous = false;
};

/// 1 − 1/ℓ(γ*(r − r₀)), or 0 when r ≤ r₀. Valid under γ*(W₁(P, Q)) ≤ α(Q) for the shortfall penalty of ℓ.
inline MartonBound marton_enlargement_bound(const LossFunction& l, const ShapeFunction& g, double r) {
    MartonBound b;
    const double level = l.inverse(2.0);
    if (!std::isfinite(level)) {
        b.vacuous = true;
        b.r0 = kInf;
        return b;
    }
    b.r0 = g.conjugate_inverse(level);
    if (!std::isfinite(b.r0)) {
        b.vacuous = true;
        return b;
    }
    if (r <= b.r0) return b;
    const double lv = l(g.conjugate(r - b.r0));
    b.value = std::isfinite(lv) ? std::max(0.0, 1 - 1 / lv) : 1.0;
    return b;
}

struct MartonCheck {
    std::size_t sets = 0;              ///< (A, r) pairs with P(A) ≥ 1/2
    std::size_t certified = 0;         ///< pairs where the premise held at P_A and P_B
    std::size_t premise_failures = 0;
    std::size_t violations = 0;        ///< certified pairs with bound > P(A^r) + 1e-12
    double worst_margin = -kInf;       ///< max bound − P(A^r) over certified pairs
};

/// Replays the Marton argument on every half-mass A and radius: the premise γ*(W₁(P, P_C)) ≤ α(P_C)
/// is checked at C = A and C = B = Ω \ A^r, and the bound compared with the exact P(A^r).
inline MartonCheck marton_check(const FiniteMetricSpace& s, const std::vector<double>& p, const LossFunction& l,
                                const ShapeFunction& g, const std::vector<double>& radii, double tol = 1e-9) {
    detail::check_enumerable(s, p);
    const std::size_t n = s.size();
    const std::size_t total = std::size_t{1} << n;
    const auto dist = detail::all_set_distances(s);
    std::map<PointSet, bool> premise;
    auto premise_at = [&](PointSet cset) {
        if (auto it = premise.find(cset); it != premise.end()) return it->second;
        const auto q = conditional_tilt(p, cset);
        const double w = transport_cost(q.probabilities(), p, s, 1);
        const bool ok = g.conjugate(w) <= shortfall_penalty(q, l) + tol;
        premise.emplace(cset, ok);
        return ok;
    };
    MartonCheck out;
    for (std::size_t a = 1; a < total; ++a) {
        if (set_mass(p, a) < 0.5 - kHalfMassTol) continue;
        for (double r : radii) {
            ++out.sets;
            PointSet enl = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (dist[a][i] < r) enl |= PointSet{1} << i;
            const PointSet b = (PointSet{1} << n) - 1 - enl;
            const bool ok = premise_at(a) && (b == 0 || premise_at(b));
            if (!ok) {
                ++out.premise_failures;
                continue;
            }
            ++out.certified;
            const double margin = marton_enlargement_bound(l, g, r).value - set_mass(p, enl);
            out.worst_margin = std::max(out.worst_margin, margin);
            if (margin > 1e-12) ++out.violations;
        }
    }
    return out;
}

struct InfSupPredicate {
    bool grid_side = false;     ///< a·t ≤ 1 + b·ℓ*(t/b) at every grid t
    bool closed_side = false;   ///< a ≤ ℓ⁻¹(1/b)
    bool agree() const { return grid_side == closed_side; }
};

/// Both sides of the inf-sup step for a, b > 0. The grid includes the maximizer t = b·ℓ′(a).
inline InfSupPredicate marton_infsup_predicate(const LossFunction& l, double a, double b, double tol = 1e-12) {
    if (!(a > 0) || !(b > 0)) throw InvalidInput("a and b must be positive");
    auto grid = geometric_grid(1e-6, 1e6, 20);
    grid.push_back(b * l.derivative(a));
    InfSupPredicate r;
    r.grid_side = true;
    for (double t : grid) {
        if (!(t > 0)) continue;
        const double rhs = 1 + b * l.conjugate(t / b);
        if (a * t > rhs + tol * std::max(1.0, std::abs(rhs))) {
            r.grid_side = false;
            break;
        }
    }
    r.closed_side = a <= l.inverse(1 / b);
    return r;
}

}  // namespace liqrisk
