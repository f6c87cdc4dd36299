#include "catch_amalgamated.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "liqrisk/transport.hpp"

using namespace liqrisk;
using Catch::Approx;

namespace {

// Optimal cost over all integer couplings of integer marginals. Transportation polytopes with
// integral margins have integral vertices, so this is the exact optimum.
double integer_coupling_optimum(const std::vector<int>& a, const std::vector<int>& b, const Matrix& c) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> col(b);
    std::vector<std::vector<int>> pi(n, std::vector<int>(m, 0));
    double best = kInf;
    std::function<void(std::size_t, std::size_t, int)> rec = [&](std::size_t i, std::size_t j, int left) {
        if (i == n) {
            for (int v : col)
                if (v != 0) return;
            double s = 0;
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < m; ++y) s += pi[x][y] * c[x][y];
            best = std::min(best, s);
            return;
        }
        if (j == m - 1) {
            if (left > col[j]) return;
            pi[i][j] = left;
            col[j] -= left;
            rec(i + 1, 0, i + 1 < n ? a[i + 1] : 0);
            col[j] += left;
            return;
        }
        for (int v = 0; v <= std::min(left, col[j]); ++v) {
            pi[i][j] = v;
            col[j] -= v;
            rec(i, j + 1, left - v);
            col[j] += v;
        }
    };
    rec(0, 0, a[0]);
    return best;
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, bool allow_zero = false) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::bernoulli_distribution zero(0.2);
    std::vector<double> w(n);
    for (auto& v : w) v = allow_zero && zero(rng) ? 0.0 : u(rng);
    if (allow_zero) w[0] = std::max(w[0], 0.1);
    double s = 0;
    for (double v : w) s += v;
    for (auto& v : w) v /= s;
    return w;
}

FiniteMetricSpace random_plane_space(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(2));
    for (auto& p : pts)
        for (auto& x : p) x = u(rng);
    return FiniteMetricSpace::euclidean(pts);
}

std::vector<TiltedMeasure> random_tilts(const std::vector<double>& p, std::size_t count, std::uint64_t seed) {
    const auto base = DiscreteDistribution::scalar(std::vector<double>(p.size(), 0.0), p);
    return sample_tilts(base, TiltStrategy::random(count, seed));
}

}  // namespace

TEST_CASE("metric space and cost invariants", "[transport]") {
    CHECK_NOTHROW(FiniteMetricSpace::line({0, 1, 2}));
    CHECK_THROWS_AS(FiniteMetricSpace({}, {{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}), InvalidInput);
    CHECK_THROWS_AS(FiniteMetricSpace({}, {{0, 1}, {2, 0}}), InvalidInput);
    CHECK_THROWS_AS(FiniteMetricSpace({}, {{0, 0}, {0, 0}}), InvalidInput);
    CHECK_THROWS_AS(FiniteMetricSpace::line({0, 1, 1}), InvalidInput);
    CHECK_THROWS_AS(TransportCost({{1, 2}, {0, 1}}), InvalidInput);
    CHECK_NOTHROW(TransportCost({{0, 2}, {0, 1}}));
    const auto s = FiniteMetricSpace::line({0, 1, 3});
    CHECK(s.diameter() == 3);
}

TEST_CASE("transport examples", "[transport]") {
    const auto two = FiniteMetricSpace::line({0, 1});
    CHECK(transport_cost({1, 0}, {0, 1}, two) == Approx(1.0));
    CHECK(transport_cost({0.3, 0.7}, {0.3, 0.7}, two) == Approx(0.0).margin(1e-15));

    const auto line3 = FiniteMetricSpace::line({0, 1, 2});
    CHECK(transport_cost({0.5, 0.5, 0}, {0, 0.5, 0.5}, line3) == Approx(1.0).epsilon(1e-14));
    CHECK(integer_coupling_optimum({1, 1, 0}, {0, 1, 1}, line3.matrix()) / 2 == Approx(1.0));

    const auto p = DiscreteDistribution::uniform({0, 1});
    const auto q = DiscreteDistribution::uniform({0, 2});
    CHECK(wasserstein_1d(p, q, 1) == Approx(0.5).epsilon(1e-15));
    CHECK(wasserstein_1d(p, q, 2) == Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(wasserstein_1d(p, p, 1) == 0.0);
    CHECK(wasserstein_1d(DiscreteDistribution::uniform({-2}), DiscreteDistribution::uniform({3.5}), 1) == 5.5);

    CHECK_THROWS_AS(transport_cost({0.5, 0.5}, {0.5, 0.6}, two), InvalidInput);
    std::vector<double> big(65, 1.0 / 65);
    std::vector<double> xs(65);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
    CHECK_THROWS_AS(transport_cost(big, big, FiniteMetricSpace::line(xs)), SizeError);
}

TEST_CASE("simplex agrees with integer coupling enumeration", "[transport]") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> mass(0, 4);
    std::uniform_real_distribution<double> cost(0.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + trial % 3, m = 2 + (trial / 3) % 3;
        std::vector<int> a(n), b(m);
        int total = 0;
        for (auto& v : a) total += v = mass(rng);
        if (total == 0) { a[0] = 1; total = 1; }
        // spread the same total over the columns
        int left = total;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            b[j] = std::uniform_int_distribution<int>(0, left)(rng);
            left -= b[j];
        }
        b[m - 1] = left;
        Matrix c(n, std::vector<double>(m));
        for (auto& row : c) {
            for (auto& v : row) v = cost(rng);
            row[trial % m] = 0;
        }
        std::vector<double> p(n), q(m);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(a[i]) / total;
        for (std::size_t j = 0; j < m; ++j) q[j] = static_cast<double>(b[j]) / total;
        const auto sol = solve_transport(p, q, c);
        CHECK(sol.primal == Approx(integer_coupling_optimum(a, b, c) / total).margin(1e-12));
        CHECK(std::abs(sol.primal - sol.dual) <= 1e-12);
    }
}

TEST_CASE("quantile sweep matches the LP on embedded 1-D pairs", "[transport]") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(1, 20);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xp(size(rng)), xq(size(rng));
        for (auto& v : xp) v = std::round(nd(rng) * 100) / 100;
        for (auto& v : xq) v = std::round(nd(rng) * 100) / 100 + 0.3;
        const auto wp = random_weights(rng, xp.size());
        const auto wq = random_weights(rng, xq.size());
        // merge duplicated atoms so the distribution is well formed
        const auto p = DiscreteDistribution::scalar(xp, wp);
        const auto q = DiscreteDistribution::scalar(xq, wq);
        const auto e = embed_on_line(p, q);
        for (int order : {1, 2}) {
            const double lp = transport_cost(e.p, e.q, e.space, order);
            CHECK(std::abs(lp - wasserstein_1d(p, q, order)) <= 1e-8);
        }
    }
}

TEST_CASE("Kantorovich duality", "[transport]") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 2 + trial % 30;
        const auto s = random_plane_space(rng, n);
        const auto p = random_weights(rng, n, true);
        const auto q = random_weights(rng, n, true);
        for (double order : {1.0, 2.0}) {
            const auto cost = TransportCost::from_metric(s, order);
            const auto k = kantorovich_dual(p, q, cost);
            CHECK(std::abs(k.value - k.primal) <= 1e-8);
            CHECK(k.max_constraint_excess <= 1e-10);
            const auto sol = solve_transport(p, q, cost.matrix());
            double mass = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    mass += sol.plan[i][j];
                    if (sol.plan[i][j] > 1e-12) CHECK(sol.phi[i] + sol.psi[j] == Approx(cost(i, j)).margin(1e-10));
                }
            CHECK(mass == Approx(1.0).epsilon(1e-12));
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0, col = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    row += sol.plan[i][j];
                    col += sol.plan[j][i];
                }
                CHECK(row == Approx(p[i]).margin(1e-12));
                CHECK(col == Approx(q[i]).margin(1e-12));
            }
            if (order == 1) {
                // metric cost: ψ is 1-Lipschitz and φ = −ψ
                CHECK(lipschitz_constant(s, k.psi) <= 1 + 1e-10);
                for (std::size_t i = 0; i < n; ++i) CHECK(k.phi[i] == Approx(-k.psi[i]).margin(1e-10));
            }
        }
    }
    const auto two = FiniteMetricSpace::line({0, 1});
    const auto k = kantorovich_dual({1, 0}, {0, 1}, two);
    CHECK(k.value == Approx(1.0));
    CHECK(k.phi[0] + k.psi[1] == Approx(1.0));
    const auto same = kantorovich_dual({0.4, 0.6}, {0.4, 0.6}, two);
    CHECK(same.value == Approx(0.0).margin(1e-15));
}

TEST_CASE("degenerate and larger instances", "[transport]") {
    std::vector<double> xs(64);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i % 8) + 0.01 * static_cast<double>(i);
    const auto s = FiniteMetricSpace::line(xs);
    std::vector<double> p(64, 1.0 / 64), q(64, 0.0);
    for (std::size_t i = 0; i < 64; i += 2) q[i] = 1.0 / 32;
    const auto k = kantorovich_dual(p, q, TransportCost::from_metric(s, 1));
    CHECK(std::abs(k.value - k.primal) <= 1e-8);
    CHECK(k.max_constraint_excess <= 1e-10);
    const double sweep = wasserstein_1d(xs, p, xs, q, 1);
    CHECK(std::abs(k.primal - sweep) <= 1e-8);
}

TEST_CASE("Wasserstein metric properties", "[transport]") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + trial % 8;
        const auto s = random_plane_space(rng, n);
        const auto a = random_weights(rng, n, true), b = random_weights(rng, n, true), c = random_weights(rng, n, true);
        const double ab = transport_cost(a, b, s), bc = transport_cost(b, c, s), ac = transport_cost(a, c, s);
        CHECK(ac <= ab + bc + 1e-8);
        CHECK(transport_cost(b, a, s) == Approx(ab).margin(1e-12));
    }
    // conditionals on disjoint sets are at least d(A, B) apart
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + trial % 7;
        const auto s = random_plane_space(rng, n);
        const auto p = random_weights(rng, n);
        std::uniform_int_distribution<int> side(0, 2);
        PointSet A = 0, B = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int k = side(rng);
            if (k == 0) A |= PointSet{1} << i;
            if (k == 1) B |= PointSet{1} << i;
        }
        if (A == 0 || B == 0) continue;
        CHECK(transport_cost(conditional(p, A), conditional(p, B), s) >= set_distance(s, A, B) - 1e-12);
    }
}

TEST_CASE("Lipschitz probes", "[transport]") {
    std::mt19937_64 rng(2);
    const auto s = random_plane_space(rng, 9);
    const auto fam = lipschitz_family(s, 20, 4);
    CHECK(fam.size() == 29);
    for (const auto& f : fam) CHECK(lipschitz_constant(s, f) <= 1 + 1e-12);
    CHECK(lipschitz_family(s, 20, 4) == fam);
    CHECK(enlargement(s, 1, 1e-9) == 1);
    CHECK(enlargement(s, 1, 10) == (PointSet{1} << 9) - 1);
}

TEST_CASE("generalized dual inequality", "[transport][dual]") {
    const auto spec = RiskMeasureSpec::entropic();
    const auto quad = ShapeFunction::quadratic();
    const std::vector<double> w{0.2, 0.3, 0.5};
    const RandomVariable x({-1.0, 0.2, 0.28}, w);
    const auto tilts = sample_tilts(DiscreteDistribution::scalar({0, 1, 2}, w), TiltStrategy::simplex(0.05));
    const RandomVariable zero({0, 0, 0}, w);

    SECTION("the zero position reduces to the plain dual inequality") {
        for (double c : {0.3, 0.6, 1.0, 1.5}) {
            const auto g = check_generalized_dual(spec, x, quad, {zero}, tilts, c);
            const auto d = dual_equivalence(spec, x, quad, c, tilts);
            CHECK(g.concordant);
            CHECK(g.dual_holds == d.dual_holds);
            CHECK(g.primal_holds == d.concentration_holds);
        }
    }
    SECTION("constant positions leave the penalty unchanged") {
        const auto g = check_generalized_dual(spec, x, quad, {zero, zero.shifted(2), zero.shifted(-3)}, tilts, 1);
        for (std::size_t j = 0; j < tilts.size(); ++j)
            CHECK(g.adjusted_penalties[j] == Approx(relative_entropy(tilts[j])).margin(1e-12));
    }
    SECTION("random positions: brute-force equivalence") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> nd(0, 1);
        std::vector<RandomVariable> phi;
        for (int k = 0; k < 5; ++k) phi.emplace_back(std::vector<double>{nd(rng), nd(rng), nd(rng)}, w);
        // a positive γ(0) leaves room for the slope E^{Q_Y} X at λ = 0
        const auto shifted = ShapeFunction::quadratic(1.0, 0.05);
        std::size_t held = 0, failed = 0;
        for (double c : {0.2, 0.5, 0.8, 1.0, 1.3, 2.0, 4.0}) {
            const auto g = check_generalized_dual(spec, x, shifted, phi, tilts, c);
            CHECK(g.concordant);
            (g.dual_holds ? held : failed)++;
            // the adjusted penalty recomputed independently
            for (std::size_t j = 0; j < tilts.size(); ++j) {
                double best = -kInf;
                for (const auto& y : phi) best = std::max(best, tilts[j].expectation(y.values()) - rho(spec, y));
                CHECK(g.adjusted_penalties[j] == Approx(relative_entropy(tilts[j]) - best).margin(1e-10));
            }
        }
        CHECK(held > 0);
        CHECK(failed > 0);
    }
}

TEST_CASE("T1 inequality", "[transport]") {
    const auto spec = RiskMeasureSpec::entropic();
    const auto two = FiniteMetricSpace::line({0, 1});
    const std::vector<double> p{0.5, 0.5};
    auto tilts = random_tilts(p, 40, 3);
    tilts.push_back(TiltedMeasure::reference(p));

    SECTION("Pinsker-type constant passes, W₁ and entropy match their closed forms") {
        // γ = λ²/4, i.e. γ*(t) = t²
        const auto r = check_t1(two, p, spec, ShapeFunction::quadratic(0.5), tilts);
        CHECK(r.dual_holds);
        CHECK(r.function_holds);
        for (std::size_t j = 0; j < tilts.size(); ++j) {
            const double q1 = tilts[j].probabilities()[0];
            CHECK(r.distances[j] == Approx(std::abs(q1 - 0.5)).margin(1e-14));
            const double h = (q1 > 0 ? q1 * std::log(2 * q1) : 0) + (q1 < 1 ? (1 - q1) * std::log(2 * (1 - q1)) : 0);
            CHECK(relative_entropy(tilts[j]) == Approx(h).margin(1e-12));
            CHECK(r.distances[j] * r.distances[j] <= h + 1e-12);
        }
        // Q = P alone: 0 ≤ 0
        const auto self = check_t1(two, p, spec, ShapeFunction::quadratic(0.5), {TiltedMeasure::reference(p)}, 1, 0);
        CHECK(self.dual_holds);
        CHECK(self.distances[0] == Approx(0).margin(1e-15));
    }
    SECTION("a weak shape yields a witness tilt and a failing Lipschitz probe") {
        const auto r = check_t1(two, p, spec, ShapeFunction::quadratic(0.1), tilts);
        CHECK_FALSE(r.dual_holds);
        CHECK_FALSE(r.function_holds);
        CHECK(r.concordant);
        REQUIRE(r.witness.has_value());
        // grid search oracle: some tilt with 5W² > H exists among the samples
        bool found = false;
        for (const auto& q : tilts) {
            const double d = std::abs(q.probabilities()[0] - 0.5);
            if (5 * d * d > relative_entropy(q) + 1e-9) found = true;
        }
        CHECK(found);
    }
    SECTION("probes alone can expose the failure") {
        const auto r = check_t1(two, p, spec, ShapeFunction::quadratic(0.2), {TiltedMeasure::reference(p)});
        CHECK_FALSE(r.function_holds);
        CHECK_FALSE(r.dual_holds);
    }
    SECTION("random spaces stay concordant") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 6; ++trial) {
            const auto s = random_plane_space(rng, 5);
            const auto w = random_weights(rng, 5);
            const double d = s.diameter();
            for (double a : {d * d / 4, d * d / 40}) {
                const auto r = check_t1(s, w, spec, ShapeFunction::quadratic(a), random_tilts(w, 30, trial), 1, 4,
                                        trial);
                CHECK(r.concordant);
                if (a == d * d / 4) CHECK(r.dual_holds);
            }
        }
    }
}

TEST_CASE("T_c inequality", "[transport]") {
    const auto spec = RiskMeasureSpec::entropic();
    const std::vector<double> p{0.5, 0.5};
    const auto cost = TransportCost::from_metric(FiniteMetricSpace::line({0, 1}), 2);
    auto tilts = random_tilts(p, 40, 8);
    tilts.push_back(TiltedMeasure::reference(p));
    const auto good = check_tc(p, cost, spec, ShapeFunction::quadratic(0.5), tilts);
    CHECK(good.dual_holds);
    CHECK(good.concordant);
    for (std::size_t j = 0; j < tilts.size(); ++j)
        CHECK(good.distances[j] == Approx(std::abs(tilts[j].probabilities()[0] - 0.5)).margin(1e-14));
    const auto bad = check_tc(p, cost, spec, ShapeFunction::quadratic(0.1), tilts);
    CHECK_FALSE(bad.dual_holds);
    CHECK_FALSE(bad.function_holds);
    CHECK(bad.witness.has_value());

    // an asymmetric normalized cost
    const TransportCost asym({{0, 2, 1}, {1, 0, 3}, {0.5, 0.5, 0}});
    const std::vector<double> w{0.2, 0.3, 0.5};
    for (double a : {0.5, 5.0, 50.0}) {
        const auto r = check_tc(w, asym, spec, ShapeFunction::quadratic(a), random_tilts(w, 40, 1));
        CHECK(r.concordant);
    }
}

TEST_CASE("sup-norm form of the transport inequality", "[transport]") {
    std::vector<double> xs, w;
    for (int i = 0; i < 20; ++i) {
        const double x = -2 + 4.0 * i / 19;
        xs.push_back(x);
        w.push_back(std::exp(-x * x / 2));
    }
    w = DiscreteDistribution::normalize(w);
    const auto s = FiniteMetricSpace::line(xs);
    auto tilts = random_tilts(w, 60, 4);
    for (const auto& t : sample_tilts(DiscreteDistribution::scalar(xs, w),
                                      TiltStrategy::exponential_family(xs, {-2, -0.5, 0.5, 2})))
        tilts.push_back(t);
    for (int order : {1, 2}) {
        const auto r = tp_supnorm_check(s, w, order, tilts);
        CHECK(r.holds);
        CHECK(r.worst_gap <= 1e-10);
        CHECK(std::isfinite(r.c_transport));
        CHECK(std::isfinite(r.c_supnorm));
        CHECK(r.c_supnorm <= r.c_transport + 1e-12);
        CHECK(r.c_transport_grid >= r.c_transport);
        CHECK(r.c_transport_grid <= r.c_transport * 1.05 + 1e-12);
    }
    const auto self = tp_supnorm_check(s, w, 1, {TiltedMeasure::reference(w)});
    CHECK(self.distances[0] == Approx(0).margin(1e-15));
    CHECK(self.holds);
}

TEST_CASE("concentration function", "[transport][concentration-fn]") {
    const auto two = FiniteMetricSpace::line({0, 1});
    CHECK(concentration_function(two, {0.5, 0.5}, 0.5) == 0.5);
    CHECK(concentration_function(two, {0.5, 0.5}, 1.5) == 0.0);
    CHECK(concentration_function(two, {0.5, 0.5}, 1e-6) == 0.5);

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + trial % 8;
        const auto s = random_plane_space(rng, n);
        const auto p = random_weights(rng, n);
        std::vector<double> radii;
        for (int k = 1; k <= 12; ++k) radii.push_back(0.1 * k);
        const auto probes = lipschitz_family(s, 30, trial);
        const auto cf = concentration_function(s, p, radii, probes);
        CHECK(cf.agrees);
        // independent oracle through explicit enlargements
        for (std::size_t k = 0; k < radii.size(); ++k) {
            double best = 0;
            for (PointSet a = 1; a < (PointSet{1} << n); ++a)
                if (set_mass(p, a) >= 0.5 - 1e-12) best = std::max(best, 1 - set_mass(p, enlargement(s, a, radii[k])));
            CHECK(cf.values[k] == Approx(best).margin(1e-12));
            if (radii[k] > s.diameter()) CHECK(cf.values[k] == 0.0);
        }
        for (std::size_t k = 1; k < radii.size(); ++k) CHECK(cf.values[k] <= cf.values[k - 1]);
    }
    std::vector<double> xs(16);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
    CHECK_THROWS_AS(concentration_function(FiniteMetricSpace::line(xs), std::vector<double>(16, 1.0 / 16), 1.0),
                    SizeError);
}

TEST_CASE("Marton enlargement bound", "[transport][marton]") {
    const auto ex = LossFunction::exponential();
    const auto quad = ShapeFunction::quadratic();
    const auto b = marton_enlargement_bound(ex, quad, 3);
    CHECK(b.r0 == Approx(std::sqrt(2 * std::log(2.0))).epsilon(1e-14));
    CHECK(b.value == Approx(1 - std::exp(-(3 - b.r0) * (3 - b.r0) / 2)).epsilon(1e-14));
    CHECK(marton_enlargement_bound(ex, quad, 1.0).value == 0.0);
    // linear γ: γ* is 0 on [0, 1] and +inf beyond, so r₀ = 1 and every r > 1 gives the full bound
    const auto lin = marton_enlargement_bound(ex, ShapeFunction::linear(1), 1.5);
    CHECK(lin.r0 == 1.0);
    CHECK(lin.value == 0.0);
    CHECK(marton_enlargement_bound(ex, ShapeFunction::linear(1), 2.5).value == 1.0);

    // shortfall penalty of a conditional matches ℓ⁻¹(1/P(A))
    const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    for (PointSet a : {PointSet{3}, PointSet{6}, PointSet{13}, PointSet{15}})
        for (const auto& l : {ex, LossFunction::power_hinge(2)})
            CHECK(shortfall_penalty(conditional_tilt(w, a), l) == Approx(l.inverse(1 / set_mass(w, a))).epsilon(1e-6));

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 4; ++trial) {
        const auto s = random_plane_space(rng, 10);
        const auto p = random_weights(rng, 10);
        const double d = s.diameter();
        // W₁ ≤ diam·TV ≤ diam·√(H/2), i.e. γ*(t) = 2t²/diam²
        const auto g = ShapeFunction::quadratic(d * d / 4);
        const auto chk = marton_check(s, p, ex, g, {0.25 * d, 0.5 * d, 0.75 * d, d, 1.5 * d});
        CHECK(chk.premise_failures == 0);
        CHECK(chk.certified == chk.sets);
        CHECK(chk.violations == 0);
        CHECK(chk.worst_margin <= 1e-12);
        // the tighter, uncertified shape breaks the premise somewhere
        const auto weak = marton_check(s, p, ex, ShapeFunction::quadratic(d * d / 400), {0.5 * d});
        CHECK(weak.premise_failures > 0);
        CHECK(weak.violations == 0);
    }
}

TEST_CASE("inf-sup step of the Marton argument", "[transport][marton]") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    for (const auto& l : {LossFunction::exponential(), LossFunction::hinge(), LossFunction::power_hinge(2),
                          LossFunction::power_hinge(3)}) {
        int yes = 0, no = 0;
        for (int trial = 0; trial < 300; ++trial) {
            const double a = u(rng), b = u(rng);
            const auto r = marton_infsup_predicate(l, a, b);
            CHECK(r.agree());
            (r.closed_side ? yes : no)++;
        }
        CHECK(yes > 0);
        CHECK(no > 0);
    }
}
