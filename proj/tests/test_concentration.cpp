#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "liqrisk/concentration.hpp"

using namespace liqrisk;
using Catch::Approx;

namespace {
// sup_{m>0} m/φ(m + a) on a dense log grid
double brute_oce_sup(const OceFunction& phi, double a) {
    double best = 0;
    for (int i = 0; i <= 400000; ++i) {
        const double m = std::exp(-12 + 24.0 * i / 400000);
        best = std::max(best, m / phi(m + a));
    }
    return best;
}
}  // namespace

TEST_CASE("shortfall tail bound", "[concentration]") {
    const auto quad = ShapeFunction::quadratic();
    CHECK(tail_bound_shortfall(quad, LossFunction::exponential(), 2) == Approx(std::exp(-2.0)).epsilon(1e-14));
    const auto lin = ShapeFunction::linear(1);
    CHECK(tail_bound_shortfall(lin, LossFunction::exponential(), 1.5) == 0.0);
    CHECK(tail_bound_shortfall(lin, LossFunction::exponential(), 0.5) == 1.0);
    CHECK(tail_bound_shortfall(quad, LossFunction::power_hinge(2), 1e-9) == Approx(1.0));
    // ((1+x)⁺)² with γ* = t²/2 at t = 2: 1/9
    CHECK(tail_bound_shortfall(quad, LossFunction::power_hinge(2), 2) == Approx(1.0 / 9));
    // huge t: ℓ overflows in value but not in log, bound is 0 or denormal-small
    CHECK(tail_bound_shortfall(quad, LossFunction::exponential(), 1e5) == 0.0);
}

TEST_CASE("oce tail bound", "[concentration]") {
    const auto quad = ShapeFunction::quadratic();
    for (double s : {0.5, 1.0, 2.0, 3.0}) {
        const double a = s * s / 2;
        const auto e = tail_bound_oce(quad, OceFunction::exponential(), s);
        CHECK(e.value == Approx(std::exp(-a)).epsilon(1e-14));
        CHECK(e.value == Approx(brute_oce_sup(OceFunction::exponential(), a)).epsilon(1e-6));
        const auto p2 = tail_bound_oce(quad, OceFunction::power(2), s);
        CHECK(p2.value == Approx(brute_oce_sup(OceFunction::power(2), a)).epsilon(1e-6));
        // numeric path: no closed form for these
        for (const auto& phi : {OceFunction::power(3), OceFunction::renyi(2)}) {
            const auto r = tail_bound_oce(quad, phi, s);
            CHECK_FALSE(r.vacuous);
            CHECK(r.value == Approx(std::min(1.0, brute_oce_sup(phi, a))).epsilon(1e-6));
        }
    }
    CHECK(tail_bound_oce(quad, OceFunction::exponential(), 0.0).value == 1.0);
    // last piece 1.5t − 0.5: with a = 1/2, m/φ(m + a) increases towards 2/3 without attaining it
    const auto flat = OceFunction::tabulated({{-1, 0.5}, {0, 0.5}, {1, 1.0}, {2, 2.5}});
    const auto v = tail_bound_oce(quad, flat, 1.0);
    CHECK(v.vacuous);
    CHECK(v.value == 1.0);
}

TEST_CASE("integral moments", "[concentration]") {
    const auto quad = ShapeFunction::quadratic();
    // X ≤ 0: every term is ℓ(γ*(0)) = ℓ(−γ(0))
    const RandomVariable neg({-3, -1, 0}, {0.2, 0.3, 0.5});
    CHECK(integral_moment(neg, LossFunction::exponential(), quad, 1).value == Approx(1.0));
    CHECK(integral_moment(neg, LossFunction::exponential(), ShapeFunction::quadratic(1, 0.5), 1).value ==
          Approx(std::exp(-0.5)));

    // lognormal sample against direct summation of (1 + x²/2)²
    const auto ln = corpus::lognormal_sample(10000, 1.0, 5);
    double direct = 0;
    for (std::size_t i = 0; i < ln.size(); ++i) {
        const double x = ln.values()[i];
        direct += ln.weights()[i] * (1 + x * x / 2) * (1 + x * x / 2);
    }
    const auto m = integral_moment(ln, LossFunction::power_hinge(2), quad, 1);
    CHECK(std::isfinite(m.value));
    CHECK(m.value == Approx(direct).epsilon(1e-12));

    // Gaussian with c = 2: E e^{2x²} diverges in the population; on a sample one atom dominates
    const auto gs = corpus::gaussian_sample(10000, 1.0, 9);
    const auto big = integral_moment(gs, LossFunction::exponential(), quad, 2);
    CHECK(big.max_term_share > 0.3);
    const auto small = integral_moment(gs, LossFunction::exponential(), quad, 0.5);
    CHECK(small.max_term_share < 0.01);
    // E e^{(X⁺)²/8} = (1 + 1/√(1 − 1/4))/2 for X ~ N(0,1), up to sample noise
    CHECK(small.value == Approx((1 + 1 / std::sqrt(0.75)) / 2).epsilon(0.02));

    // symmetric variant uses |X|
    const RandomVariable sym({-2, 2}, {0.5, 0.5});
    CHECK(integral_moment(sym, LossFunction::exponential(), quad, 1, true).value == Approx(std::exp(2.0)));
    CHECK(integral_moment(sym, LossFunction::exponential(), quad, 1).value == Approx((1 + std::exp(2.0)) / 2));

    // overflow → +inf, log value stays finite
    const RandomVariable huge({0.0, 100.0}, {0.5, 0.5});
    const auto o = integral_moment(huge, LossFunction::exponential(), quad, 1);
    CHECK(o.value == kInf);
    CHECK(o.log_value == Approx(5000 - std::log(2.0)));
}

TEST_CASE("tail-to-integral bound", "[concentration]") {
    CHECK(tail_to_integral_bound(GrowthFunction::exp_linear(), 0.5, 1) == Approx(2.0).epsilon(1e-10));
    CHECK(tail_to_integral_bound(GrowthFunction::exp_linear(), 0.5, 0) == 1.0);
    CHECK(tail_to_integral_bound(GrowthFunction::exp_square(), 0.5, 2) == Approx(1 + 2.0 / 3).epsilon(1e-10));
    CHECK_THROWS_AS(tail_to_integral_bound(GrowthFunction::one_plus(), 0.5, 1), InvalidInput);

    // dominance over the moment of a variable meeting the tail hypothesis: X exponential(1)
    // discretized on bins has P(X > t) ≤ e^{-t} = 1/h(t) for h = e^t
    std::vector<double> v, w;
    for (int k = 0; k < 400; ++k) {
        v.push_back(0.05 * k);  // mass of [0.05k, 0.05(k+1)) moved to its left end
        w.push_back(std::exp(-0.05 * k) - std::exp(-0.05 * (k + 1)));
    }
    w.back() += std::exp(-0.05 * 400);
    const RandomVariable x(v, w);
    for (const auto& [a, p] : std::vector<std::pair<double, double>>{{0.5, 1}, {0.25, 1}}) {
        double lhs = 0;  // E e^{cX⁺}
        for (std::size_t i = 0; i < v.size(); ++i) lhs += w[i] * std::exp(a * v[i]);
        CHECK(lhs <= tail_to_integral_bound(GrowthFunction::exp_linear(), a, p));
    }
}

TEST_CASE("exact tail comparisons", "[concentration]") {
    const auto ex = LossFunction::exponential();
    const auto quad = ShapeFunction::quadratic();
    const auto x = corpus::plus_minus_one();
    // Hoeffding: P(X ≥ 1) = 1/2 ≤ e^{-1/2}
    const auto t = tail_dominance(x, ex, quad);
    CHECK(t.holds);
    CHECK(t.worst_log_ratio == Approx(std::log(0.5) + 0.5));
    // a scale too small for the bound: c = 0.5 makes γ*(1/c) = 2
    const auto bad = tail_dominance(x, ex, quad.scaled(0.5));
    CHECK_FALSE(bad.holds);
    CHECK(bad.worst_log_ratio == Approx(std::log(0.5) + 2));
    CHECK_FALSE(tail_dominance(RandomVariable({2.0, -2.0}, {0.5, 0.5}), ex, quad).holds);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(20);
        for (auto& a : v) a = nd(rng) * 2;
        const auto r = corpus::uniform_sample(v);
        for (double c : {0.3, 1.0, 3.0}) CHECK(markov_violations(r, ex, quad.scaled(c)) == 0);
    }
}

TEST_CASE("equivalence battery examples", "[concentration][battery]") {
    const auto ex = LossFunction::exponential();
    const auto quad = ShapeFunction::quadratic();

    SECTION("two-point family: all four conditions hold") {
        const auto rep = equivalence_battery({corpus::plus_minus_one()}, ex, quad);
        for (const auto& c : rep.conditions) CHECK(c.found);
        CHECK(rep.condition("1").c >= 1.0);
        CHECK(rep.condition("1").c <= 1.05);
        CHECK(rep.condition("1").index == rep.condition("2").index);
        CHECK_FALSE(rep.violation());
        CHECK(rep.lgamma.is_member);
        CHECK(rep.class_h.is_member);
    }
    SECTION("zero family: everything at the smallest constant") {
        const auto rep = equivalence_battery({RandomVariable({0.0}, {1.0})}, ex, quad);
        for (const auto& c : rep.conditions) {
            CHECK(c.found);
            CHECK(c.index == 0);
        }
        CHECK_FALSE(rep.violation());
    }
    SECTION("heavy tail: the moment condition fails at every constant") {
        const auto rep = equivalence_battery(corpus::pareto_family(2.5, 12), LossFunction::power_hinge(4), quad);
        CHECK_FALSE(rep.condition("4").found);
        CHECK_FALSE(rep.condition("3").found);
        CHECK_FALSE(rep.condition("1").found);
        CHECK_FALSE(rep.violation());
    }
    SECTION("non-centered members are centered first") {
        const auto a = equivalence_battery({corpus::plus_minus_one().shifted(3)}, ex, quad);
        const auto b = equivalence_battery({corpus::plus_minus_one()}, ex, quad);
        for (std::size_t k = 0; k < 4; ++k) CHECK(a.conditions[k].index == b.conditions[k].index);
    }
    CHECK_THROWS_AS(equivalence_battery({}, ex, quad), InvalidInput);
}

TEST_CASE("scale ratio diagnostic", "[concentration]") {
    const auto d = scale_ratio_diagnostic(LossFunction::exponential(), ShapeFunction::quadratic());
    REQUIRE(d.log_limit.size() == d.cs.size());
    // ℓ(γ*(x)) = e^{x²/2}: sup over x ≥ c of the ratio sits at x = c, value −c²(1 − 1/n²)/2
    for (std::size_t i = 0; i < d.cs.size(); ++i) {
        const double c = d.cs[i];
        CHECK(d.log_limit[i] == Approx(-c * c / 2));
        for (std::size_t j = 0; j < d.ns.size(); ++j) {
            const double n = d.ns[j];
            CHECK(d.log_sup[i][j] == Approx(-c * c * (1 - 1 / (n * n)) / 2).epsilon(1e-9));
        }
    }
}

TEST_CASE("independent sums", "[concentration][tensor]") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.05, 1);
    auto random_var = [&](std::size_t n) {
        std::vector<double> v(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = nd(rng);
            w[i] = ud(rng);
        }
        return RandomVariable(v, DiscreteDistribution::normalize(w));
    };
    for (int t = 0; t < 20; ++t) {
        const auto x1 = random_var(2 + t % 18), x2 = random_var(3 + t % 17);
        const auto e = tensor_sum_check(RiskMeasureSpec::entropic(), x1, x2);
        CHECK(e.asserted);
        CHECK(e.equality);
        CHECK(e.holds);
        // log-MGF factorization oracle
        for (std::size_t i : {10ul, 80ul, 150ul}) {
            const double lam = default_lambda_grid()[i];
            double s1 = 0, s2 = 0;
            for (std::size_t k = 0; k < x1.size(); ++k) s1 += x1.weights()[k] * std::exp(lam * x1.values()[k]);
            for (std::size_t k = 0; k < x2.size(); ++k) s2 += x2.weights()[k] * std::exp(lam * x2.values()[k]);
            CHECK(e.lhs[i] == Approx(std::log(s1) + std::log(s2)).epsilon(1e-12).margin(1e-12));
        }
        auto grid = geometric_grid(1e-2, 10, 5);
        grid.insert(grid.begin(), 0.0);
        const auto s = tensor_sum_check(RiskMeasureSpec::shortfall(LossFunction::exponential()), x1, x2, grid);
        CHECK(s.asserted);
        CHECK(s.worst_abs_diff < 1e-8);
    }
    const auto x = corpus::plus_minus_one();
    const auto zero = tensor_sum_check(RiskMeasureSpec::entropic(), x, RandomVariable({0.0}, {1.0}));
    for (std::size_t i = 0; i < zero.lhs.size(); ++i) CHECK(zero.lhs[i] == Approx(zero.rhs[i]).margin(1e-14));
    const auto h = tensor_sum_check(RiskMeasureSpec::shortfall(LossFunction::hinge()), x, x);
    CHECK_FALSE(h.asserted);
}

TEST_CASE("Lipschitz tensorization on products", "[concentration][tensor]") {
    const auto ent = RiskMeasureSpec::entropic();
    const auto m1 = DiscreteDistribution::scalar({0, 1}, {0.5, 0.5});
    const auto m2 = DiscreteDistribution::scalar({0, 2}, {0.3, 0.7});
    const auto grid = default_lambda_grid();

    SECTION("extremal enumeration") {
        const auto fs = extremal_lipschitz_values(DiscreteDistribution::uniform({0, 1, 3}));
        CHECK(fs.size() == 4);
        for (const auto& f : fs) {
            CHECK(std::abs(f[1] - f[0]) == Approx(1));
            CHECK(std::abs(f[2] - f[1]) == Approx(2));
        }
    }
    SECTION("averaging function under Hoeffding shapes") {
        // a 1-Lipschitz f of a marginal with range d has range ≤ d: ρ(λ(f − Ef)) ≤ λ²d²/8
        const std::vector<ShapeFunction> shapes{ShapeFunction::quadratic(1.0 / 4), ShapeFunction::quadratic(4.0 / 4)};
        const ProductFunction avg = [](const std::vector<double>& p) { return (p[0] + p[1]) / 2; };
        const ProductFunction cst = [](const std::vector<double>&) { return 3.0; };
        const auto r = tensor_lipschitz_check(ent, {m1, m2}, {avg, cst}, grid, shapes);
        CHECK(r.hypothesis_certified);
        CHECK(r.asserted);
        CHECK(r.lipschitz[0]);
        CHECK(r.holds[0]);
        CHECK(r.worst_gap[0] <= 1e-12);
        CHECK(r.holds[1]);
        CHECK(r.violations == 0);
    }
    SECTION("one marginal reduces to the single-variable bound") {
        const ProductFunction id = [](const std::vector<double>& p) { return p[0]; };
        const auto r = tensor_lipschitz_check(ent, {m2}, {id}, grid, {ShapeFunction::quadratic(1.0)});
        const auto p = compute_profile(ent, RandomVariable(m2.values(), m2.weights()), grid, true);
        CHECK(r.holds[0] == check_concentration(p, ShapeFunction::quadratic(1.0), 1.0).holds);
    }
    SECTION("a shape below the envelope leaves the hypothesis unverified") {
        const ProductFunction id = [](const std::vector<double>& p) { return p[0] + p[1]; };
        const auto r = tensor_lipschitz_check(ent, {m1, m2}, {id}, grid,
                                              {ShapeFunction::quadratic(0.01), ShapeFunction::quadratic(0.01)});
        CHECK_FALSE(r.hypothesis_certified);
        CHECK_FALSE(r.asserted);
        CHECK(r.violations == 0);
    }
    SECTION("random McShane functions are Lipschitz and within the envelope sum") {
        const auto m3 = DiscreteDistribution::scalar({-1, 0.5, 2}, {0.2, 0.5, 0.3});
        const auto joint = product_distribution({m1, m2, m3});
        std::vector<ProductFunction> fs;
        for (std::uint64_t s = 0; s < 10; ++s) fs.push_back(random_product_lipschitz(joint, 4, s));
        const auto r = tensor_lipschitz_check(ent, {m1, m2, m3}, fs, grid);
        CHECK(r.asserted);
        for (std::size_t k = 0; k < fs.size(); ++k) {
            CHECK(r.lipschitz[k]);
            CHECK(r.holds[k]);
        }
    }
    CHECK_THROWS_AS(tensor_lipschitz_check(ent, {m1, m2}, {}, grid, {ShapeFunction::quadratic()}), InvalidInput);
}

TEST_CASE("dependent tensorization", "[concentration][tensor]") {
    const auto ent = RiskMeasureSpec::entropic();
    const auto grid = default_lambda_grid();
    // two-state chain: X₁ ∈ {−1, 1}, X₂ | X₁ = a takes a ± 1 with probabilities (0.7, 0.3) or (0.4, 0.6)
    const DiscreteDistribution chain({{-1, -2}, {-1, 0}, {1, 0}, {1, 2}}, {0.5 * 0.7, 0.5 * 0.3, 0.5 * 0.4, 0.5 * 0.6});
    const auto r = tensor_dependent_check(ent, chain, grid);
    CHECK(r.hypothesis_certified);
    CHECK(r.asserted);
    CHECK(r.holds);
    for (std::size_t i : {20ul, 100ul, 150ul}) {
        const double l = grid[i];
        // exhaustive four-atom oracle
        const double lhs = std::log(0.35 * std::exp(-3 * l) + 0.15 * std::exp(-l) + 0.2 * std::exp(l) + 0.3 * std::exp(3 * l));
        CHECK(r.lhs[i] == Approx(lhs).epsilon(1e-12).margin(1e-15));
        const double g1 = std::log(std::cosh(l));
        const double g2a = std::log(0.7 * std::exp(-2 * l) + 0.3);
        const double g2b = std::log(0.4 + 0.6 * std::exp(2 * l));
        CHECK(r.gamma1[i] == Approx(g1).epsilon(1e-12).margin(1e-15));
        CHECK(r.gamma2[i] == Approx(std::max(g2a, g2b)).epsilon(1e-12).margin(1e-15));
        // the top atom of the sum carries the product of the top probabilities: equality as λ grows
        CHECK(r.lhs[i] <= r.gamma1[i] + r.gamma2[i] + 1e-9);
    }
    // independent joint: conditional profile is the same for every first coordinate
    const auto ind = product_distribution({DiscreteDistribution::scalar({-1, 1}, {0.5, 0.5}),
                                           DiscreteDistribution::scalar({0, 3}, {0.25, 0.75})});
    const auto ri = tensor_dependent_check(ent, ind, grid);
    const auto rs = tensor_sum_check(ent, RandomVariable({-1, 1}, {0.5, 0.5}), RandomVariable({0, 3}, {0.25, 0.75}), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(ri.gamma1[i] + ri.gamma2[i] == Approx(rs.rhs[i]).margin(1e-12));
        CHECK(ri.lhs[i] == Approx(ri.gamma1[i] + ri.gamma2[i]).margin(1e-10));
    }
    // a supplied γ₂ below the worst conditional profile is flagged
    const auto weak = tensor_dependent_check(ent, chain, grid, ShapeFunction::quadratic(), ShapeFunction::quadratic(0.1));
    CHECK_FALSE(weak.hypothesis_certified);
    CHECK_FALSE(weak.asserted);
}

TEST_CASE("acceptance consistency probe", "[concentration][tensor]") {
    const auto e = acceptance_consistency_probe(RiskMeasureSpec::entropic(), 500, 1);
    CHECK(e.trials == 500);
    CHECK(e.violations == 0);
    const auto s = acceptance_consistency_probe(RiskMeasureSpec::shortfall(LossFunction::exponential()), 200, 1);
    CHECK(s.violations == 0);

    // G-measurable payoff: ρ(X | G) = X, both sides equal
    const DiscreteDistribution joint({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0.1, 0.2, 0.3, 0.4});
    const std::vector<double> x{2, 2, -1, -1};
    for (const auto& spec : {RiskMeasureSpec::entropic(), RiskMeasureSpec::shortfall(LossFunction::hinge()),
                             RiskMeasureSpec::oce(OceFunction::power(2))})
        CHECK(nested_rho(spec, joint, x) == Approx(rho(spec, x, joint.weights())).margin(1e-9));

    // hinge shortfall: every recorded counterexample is a genuine violation
    const auto h = acceptance_consistency_probe(RiskMeasureSpec::shortfall(LossFunction::hinge()), 300, 2);
    for (const auto& cx : h.counterexamples) {
        CHECK(cx.rho_x > cx.rho_nested);
        CHECK(rho(RiskMeasureSpec::shortfall(LossFunction::hinge()), cx.payoff, cx.joint.weights()) ==
              Approx(cx.rho_x));
    }
    CHECK(acceptance_consistent(RiskMeasureSpec::oce(OceFunction::exponential())));
    CHECK_FALSE(acceptance_consistent(RiskMeasureSpec::shortfall(LossFunction::power_hinge(2))));
}
