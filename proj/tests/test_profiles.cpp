#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "liqrisk/profiles.hpp"

using namespace liqrisk;
using Catch::Approx;

namespace {
RandomVariable gaussian_sample(std::size_t n, double sigma, std::uint64_t seed, bool symmetric = false) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0, sigma);
    std::vector<double> x;
    while (x.size() < n) {
        const double v = z(rng);
        x.push_back(v);
        if (symmetric) x.push_back(-v);
    }
    x.resize(n);
    return RandomVariable(x, std::vector<double>(n, 1.0 / n));
}

double sample_sd(const RandomVariable& x) {
    const double m = x.mean();
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.weights()[i] * (x.values()[i] - m) * (x.values()[i] - m);
    return std::sqrt(s);
}

std::vector<RiskMeasureSpec> specs() {
    return {RiskMeasureSpec::entropic(), RiskMeasureSpec::shortfall(LossFunction::hinge()),
            RiskMeasureSpec::shortfall(LossFunction::power_hinge(2)), RiskMeasureSpec::oce(OceFunction::power(2)),
            RiskMeasureSpec::oce(OceFunction::renyi(2))};
}
}  // namespace

TEST_CASE("Gaussian sample profile is close to λ²/2", "[profiles]") {
    const auto x = gaussian_sample(100000, 1.0, 1);
    const auto p = compute_profile(RiskMeasureSpec::entropic(), x, default_lambda_grid(), true);
    CHECK(p.normalized);
    CHECK(p.convex);
    CHECK(p.nonnegative);
    for (std::size_t i = 0; i < p.lambda_grid.size(); ++i) {
        const double lam = p.lambda_grid[i];
        if (lam > 1) break;
        CHECK(p.values[i] == Approx(lam * lam / 2).margin(0.02 * lam * lam + 1e-12));
    }
}

TEST_CASE("trivial profiles", "[profiles]") {
    const RandomVariable zero({0, 0, 0}, {0.2, 0.3, 0.5});
    for (const auto& s : specs()) {
        const auto p = compute_profile(s, zero);
        for (double v : p.values) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(compute_profile(RiskMeasureSpec::entropic(), zero, {0.1, 1}), InvalidInput);
    CHECK_THROWS_AS(compute_profile(RiskMeasureSpec::entropic(), zero, {0, 1, 0.5}), InvalidInput);
}

TEST_CASE("structural flags on random profiles", "[profiles]") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0, 1.5);
    for (const auto& s : specs())
        for (int k = 0; k < 5; ++k) {
            std::vector<double> v(7);
            for (auto& a : v) a = z(rng);
            const RandomVariable x(v, std::vector<double>(7, 1.0 / 7));
            const auto p = compute_profile(s, x, default_lambda_grid(), true);
            CHECK(p.normalized);
            CHECK(p.convex);
            CHECK(p.nonnegative);
            const auto q = compute_profile(s, x);
            CHECK(q.convex);
        }
}

TEST_CASE("marginal risk", "[profiles]") {
    const RandomVariable x({-1, 0.5, 3}, {0.3, 0.5, 0.2});
    const auto e = RiskMeasureSpec::entropic();
    const auto m = marginal_risk(e, x, {}, true);
    CHECK(m.value == Approx(x.mean()).margin(1e-8));
    REQUIRE(m.left_value);
    CHECK(*m.left_value == Approx(x.mean()).margin(1e-8));
    for (std::size_t i = 1; i < m.sequence.size(); ++i) CHECK(m.sequence[i] <= m.sequence[i - 1] + 1e-10);
    // finite differences of the closed form log E e^{λX}
    auto lmgf = [&](double l) {
        double s = 0;
        for (std::size_t i = 0; i < 3; ++i) s += x.weights()[i] * std::exp(l * x.values()[i]);
        return std::log(s);
    };
    CHECK(m.value == Approx((lmgf(1e-6) - lmgf(-1e-6)) / 2e-6).margin(1e-7));

    CHECK(marginal_risk(e, x.centered()).value == Approx(0).margin(1e-8));
    CHECK(marginal_risk(e, RandomVariable({2.5, 2.5}, {0.5, 0.5})).value == Approx(2.5).margin(1e-12));
    // hinge shortfall is coherent near 0: ρ(λX) = λ E X for small λ
    CHECK(marginal_risk(RiskMeasureSpec::shortfall(LossFunction::hinge()), x).value == Approx(x.mean()).margin(1e-9));
    CHECK_THROWS_AS(marginal_risk(e, x, {0.5, 0.6}), InvalidInput);
    for (const auto& s : specs()) {
        const auto mm = marginal_risk(s, x);
        // E X ≤ Mρ ≤ E X + γ′(0) with γ linear of slope max(X − EX), which bounds the centered profile
        const double slope = x.max() - x.mean();
        const auto p = compute_profile(s, x, default_lambda_grid(), true);
        REQUIRE(check_concentration(p, ShapeFunction::linear(slope), 1.0).holds);
        CHECK(mm.value >= x.mean() - 1e-9);
        CHECK(mm.value <= x.mean() + slope + 1e-9);
    }
}

TEST_CASE("concentration checks", "[profiles]") {
    const auto x = gaussian_sample(20000, 1.3, 4, true);
    const double sd = sample_sd(x);
    const auto p = compute_profile(RiskMeasureSpec::entropic(), x, default_lambda_grid(), true);
    const auto ok = check_concentration(p, ShapeFunction::quadratic(), 1.05 * sd);
    CHECK(ok.holds);
    CHECK(ok.tail_certified);
    CHECK_FALSE(check_concentration(p, ShapeFunction::quadratic(), 0.9 * sd).holds);

    // Hoeffding on [a, b] = [-1, 3] with mass making E X = 0
    const RandomVariable bounded({-1, 3}, {0.75, 0.25});
    const auto pb = compute_profile(RiskMeasureSpec::entropic(), bounded);
    const auto h = check_concentration(pb, ShapeFunction::quadratic(16.0 / 4), 1.0);
    CHECK(h.certified());

    const auto g0 = ShapeFunction::tabulated({{0, 0}, {1e3, 0}});
    const auto pos = compute_profile(RiskMeasureSpec::entropic(), RandomVariable({0.5, 1}, {0.5, 0.5}));
    const auto f = check_concentration(pos, g0, 1.0);
    CHECK_FALSE(f.holds);
    CHECK(f.worst_gap > 0);
    CHECK(f.worst_lambda == 100);
}

TEST_CASE("crossings between grid points", "[profiles]") {
    // a rare large atom: ρ(λX) ≈ 100λ − 20 past λ ≈ 0.2, which pokes above c²λ²/2 only near 100/c²
    const auto spec = RiskMeasureSpec::entropic();
    const RandomVariable x({0.0, 100.0}, {1 - std::exp(-20.0), std::exp(-20.0)});
    const auto g = ShapeFunction::quadratic();
    const double c = std::sqrt(1e4 / 40.2);
    const auto prof = compute_profile(spec, x, {0.0, 0.37, 0.44});
    CHECK(check_concentration(prof, g, c).certified());
    const auto refined = check_concentration_refined(spec, x, prof, g, c);
    CHECK_FALSE(refined.holds);
    CHECK(refined.worst_gap > 0.05);
    CHECK(refined.worst_lambda == Approx(100 / (c * c)).epsilon(0.03));

    // tight but valid: log cosh λ ≤ λ²/2 survives the probes on the default grid
    const RandomVariable pm({-1.0, 1.0}, {0.5, 0.5});
    const auto tight = check_concentration_refined(spec, pm, compute_profile(spec, pm), g, 1.0);
    CHECK(tight.certified());
    CHECK(tight.probes > 0);
}

TEST_CASE("scaling constant search", "[profiles]") {
    const auto x = gaussian_sample(10000, 1.0, 5, true);
    const double sd = sample_sd(x);
    const auto s = find_scaling_constant(RiskMeasureSpec::entropic(), {x}, ShapeFunction::quadratic());
    REQUIRE(s.found);
    CHECK(s.c >= sd / 1.05);
    CHECK(s.c <= sd * 1.05 * 1.05);
    // minimality on the grid
    CHECK_FALSE(check_concentration(s.profiles[0], ShapeFunction::quadratic(), witness_grid()[s.index - 1]).certified());

    const auto z = find_scaling_constant(RiskMeasureSpec::entropic(), {RandomVariable({0.0}, {1.0})},
                                         ShapeFunction::quadratic());
    CHECK(z.c == witness_grid().front());

    std::vector<RandomVariable> fam;
    for (double p : {0.5, 0.3, 0.1}) fam.emplace_back(std::vector<double>{-1, 1}, std::vector<double>{p, 1 - p});
    const auto f = find_scaling_constant(RiskMeasureSpec::entropic(), fam, ShapeFunction::quadratic());
    CHECK(f.c <= 1.05);
    CHECK_THROWS_AS(find_scaling_constant(RiskMeasureSpec::entropic(), {}, ShapeFunction::quadratic()), InvalidInput);

    // a shape that no constant rescues: linear γ against an unbounded-looking loss larger than c·λ near 0
    const auto never = find_scaling_constant(RiskMeasureSpec::entropic(), {RandomVariable({-1e7, 1e7}, {0.5, 0.5})},
                                             ShapeFunction::linear(1));
    CHECK_FALSE(never.found);
    CHECK(never.c == kInf);
}

TEST_CASE("relative profiles", "[profiles]") {
    const RandomVariable x({-1, 2, 0.5}, {0.2, 0.3, 0.5});
    for (const auto& s : specs()) {
        const auto plain = compute_profile(s, x);
        const auto rel = relative_profile(s, x, RandomVariable({4, 4, 4}, x.weights()));
        for (std::size_t i = 0; i < plain.values.size(); ++i) CHECK(rel.values[i] == Approx(plain.values[i]).margin(1e-9));
        const auto neg = relative_profile(s, x, x.scaled(-1), {0, 1});
        CHECK(neg.values[1] == Approx(-rho(s, x.scaled(-1))).margin(1e-9));
    }
    // independent Y on a product space: entropic risk is additive
    const std::vector<double> y{-2, 1}, py{0.4, 0.6};
    std::vector<double> xv, yv, w;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            xv.push_back(x.values()[i]);
            yv.push_back(y[j]);
            w.push_back(x.weights()[i] * py[j]);
        }
    const auto e = RiskMeasureSpec::entropic();
    const auto rel = relative_profile(e, RandomVariable(xv, w), RandomVariable(yv, w));
    const auto plain = compute_profile(e, x);
    for (std::size_t i = 0; i < plain.values.size(); ++i) CHECK(rel.values[i] == Approx(plain.values[i]).margin(1e-9));
}

TEST_CASE("initial position test", "[profiles]") {
    const auto quad = ShapeFunction::quadratic();
    for (const auto& s : specs()) {
        const RandomVariable neg({-1, -0.2, 0}, {0.3, 0.3, 0.4});
        const auto a = initial_position_test(s, neg, quad, steep_positions(neg));
        CHECK(a.bound_holds_for_all);
        CHECK(a.predicate);

        const RandomVariable bump({-1, 0.1, -0.5}, {0.3, 0.3, 0.4});
        const auto b = initial_position_test(s, bump, quad, steep_positions(bump));
        CHECK_FALSE(b.bound_holds_for_all);
        CHECK_FALSE(b.predicate);
        REQUIRE(b.counterexample);
        CHECK(*b.counterexample / 3 == 1);  // the position concentrating on the offending atom

        const auto c = initial_position_test(s, bump, ShapeFunction::linear(0.1), steep_positions(bump));
        CHECK(c.bound_holds_for_all);
        CHECK(c.predicate);
    }
    CHECK_THROWS_AS(initial_position_test(RiskMeasureSpec::entropic(), RandomVariable({0.0}, {1.0}),
                                          ShapeFunction::quadratic(1, 1), {}),
                    InvalidInput);
}
