#include "doctest.h"

#include "nehari/errors.hpp"
#include "nehari/testfn.hpp"

#include <cmath>
#include <limits>

using namespace nehari;

namespace {
Problem make(const ModelGeometry& g, int m, double grading, double lambda = 0.0) {
    ProblemSpec s;
    s.geom = g;
    s.lambda = lambda;
    return Problem(s, build_grid(g, m, grading));
}
}  // namespace

TEST_CASE("I integrals") {
    CHECK(integral_I(2, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integral_I(3, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(integral_I(3, 0) == doctest::Approx((2.0 - 0 - 1) / 2 * integral_I(2, 0)).epsilon(1e-15));
    CHECK(integral_I(3, 1) == doctest::Approx((0.0 + 1) / (3 - 0 - 2) * integral_I(3, 0)).epsilon(1e-15));
    for (double p : {2.5, 4.0, 7.0})
        for (double q : {-0.5, 0.0, 1.0})
            if (p - q > 1) CHECK(integral_I_quadrature(p, q) == doctest::Approx(integral_I(p, q)).epsilon(1e-10));
    CHECK_THROWS_AS(integral_I(2, 1), DomainError);
    CHECK_THROWS_AS(integral_I(3, -1), DomainError);
}

TEST_CASE("cutoff") {
    const double d = 0.3;
    CHECK(cutoff_eta(d / 2, d) == 1.0);
    CHECK(cutoff_eta(3 * d, d) == 0.0);
    CHECK(cutoff_eta(1.5 * d, d) == doctest::Approx(0.5).epsilon(1e-14));
    double prev = 1.0;
    for (int k = 0; k <= 100; ++k) {
        const double v = cutoff_eta(d + d * k / 100.0, d);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    // C^4 at the inner joint: the scaled fourth difference is 126 * 240 * (h / d) + O(h^2), so it vanishes with h
    auto fd4 = [d](double h) {
        const double v = cutoff_eta(d + 4 * h, d) - 4 * cutoff_eta(d + 3 * h, d) + 6 * cutoff_eta(d + 2 * h, d) -
                         4 * cutoff_eta(d + h, d) + cutoff_eta(d, d);
        return std::abs(v) / std::pow(h / d, 4);
    };
    CHECK(fd4(1e-3 * d) == doctest::Approx(30240.0 * 1e-3).epsilon(0.05));
    CHECK(fd4(2e-3 * d) == doctest::Approx(30240.0 * 2e-3).epsilon(0.1));
    CHECK_THROWS_AS(cutoff_eta(0.1, 0.0), DomainError);
}

TEST_CASE("bubble profile") {
    BubbleParams bp;
    bp.eps = 1.0;
    bp.delta = 0.25;
    CHECK(bubble_value(bp, 8, 0.0) == doctest::Approx(std::sqrt(1920.0)).epsilon(1e-14));
    CHECK(bubble_value(bp, 8, 0.0) == doctest::Approx(43.8178).epsilon(1e-6));
    CHECK(bubble_value(bp, 8, 0.5) == 0.0);
    BubbleParams b2 = bp;
    b2.eps = 2.0;
    CHECK(bubble_value(b2, 8, 0.0) / bubble_value(bp, 8, 0.0) == doctest::Approx(std::pow(2.0, -2.0)).epsilon(1e-14));
    CHECK(bubble_value(b2, 11, 0.0) / bubble_value(bp, 11, 0.0) == doctest::Approx(std::pow(2.0, -3.5)).epsilon(1e-14));

    const auto p = make(ModelGeometry::euclidean_ball(8), 512, 2.0);
    CHECK(bubble_params(p, 0.1).theta == 1.0);
    const Field u = build_bubble(p, 0.1);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (p.grid().nodes[i] >= 0.5) CHECK(u[i] == 0.0);
    CHECK_THROWS_AS(build_bubble(p, 1e-6), ResolutionError);
    CHECK_NOTHROW(build_bubble(p, smallest_resolvable_eps(p)));
}

TEST_CASE("constants A and B") {
    for (int n : {8, 10})
        for (double r : {2.0, 4.0})
            for (double s : {2.0, 4.0}) {
                const auto ab = constants_AB(n, r, s);
                CHECK(ab.A > 0.0);
                CHECK(ab.B > 0.0);
            }
    const auto a = constants_AB(8, 4, 4, IEvaluation::Beta);
    const auto b = constants_AB(8, 4, 4, IEvaluation::GammaRatio);
    const auto c = constants_AB(8, 4, 4, IEvaluation::Quadrature);
    CHECK(a.A == doctest::Approx(b.A).epsilon(1e-12));
    CHECK(a.B == doctest::Approx(b.B).epsilon(1e-12));
    CHECK(a.A == doctest::Approx(c.A).epsilon(1e-9));
    CHECK(a.B == doctest::Approx(c.B).epsilon(1e-9));
    CHECK_THROWS_AS(constants_AB(8, 1.0, 4), DomainError);
    CHECK_THROWS_AS(constants_AB(7, 2.0, 4.0), DomainError);
}

TEST_CASE("two-term model") {
    const auto m = two_term_max(1.0, 8);
    CHECK(m.t == doctest::Approx(1.0));
    CHECK(m.value == doctest::Approx(0.25));
    const auto m2 = two_term_max(2.0, 8);
    CHECK(m2.value == doctest::Approx(2.0 / 8 * std::pow(2.0, 2.0)));
    CHECK_THROWS_AS(two_term_max(0.0, 8), DomainError);
}

TEST_CASE("condition C") {
    const auto flat = make(ModelGeometry::euclidean_ball(8), 64, 1.0);
    const auto c0 = condition_C(flat);
    CHECK(!c0.holds);
    CHECK(c0.margin == 0.0);
    const auto cap = make(ModelGeometry::round_sphere(8, 1.0), 64, 1.0);
    const auto c1 = condition_C(cap);
    CHECK(c1.holds);
    CHECK(c1.margin == doctest::Approx((7.0 * 8 * 76 / (60.0 * 4 * 2) - 1) / 3 * 56).epsilon(1e-14));
    CHECK(c1.margin / 56 == doctest::Approx(2.6222).epsilon(1e-4));
    CHECK(condition_C(make(ModelGeometry::round_sphere(6, 1.0), 64, 1.0)).holds);
    CHECK(!condition_C(make(ModelGeometry::euclidean_ball(6), 64, 1.0)).holds);
    CHECK_THROWS_AS(condition_C(make(ModelGeometry::euclidean_ball(5), 64, 1.0)), DomainError);

    // Delta f(x0)/f(x0) = c enters the margin linearly
    ProblemSpec s;
    s.geom = ModelGeometry::round_sphere(8, 1.0);
    s.f = {1.0, -10.0};
    const auto c2 = condition_C(Problem(s, build_grid(s.geom, 64, 1.0)));
    CHECK(c2.margin == doctest::Approx(c1.margin + 10.0).epsilon(1e-14));
    s.f = {1.0, -200.0};
    CHECK_THROWS_AS(s.validate(), ConfigurationError);  // f < 0 near R
}

TEST_CASE("sharp condition") {
    ProblemSpec s;
    s.geom = ModelGeometry::euclidean_ball(8);
    const auto ok = sharp_condition(s, 5, 1, 5, 1);
    CHECK(ok.holds);
    CHECK(ok.value == 1.0);
    s.a = {-0.1, 0.0};
    CHECK(sharp_condition(s, 5, 1, 0, 0).value == doctest::Approx(0.5));
    CHECK(sharp_condition(s, 5, 1, 0, 0).holds);
    s.a = {-0.3, 0.0};
    CHECK(sharp_condition(s, 5, 1, 0, 0).value == doctest::Approx(-0.5));
    CHECK(!sharp_condition(s, 5, 1, 0, 0).holds);
}

TEST_CASE("energy threshold and gap") {
    CHECK(energy_threshold(8, 1.0, 1.0) == 0.25);
    const double K0 = sobolev_constant_estimate(8);
    CHECK(energy_threshold(8, K0, 1.0) == doctest::Approx(0.25 / (K0 * K0)));

    const auto cap = make(ModelGeometry::round_sphere(8, 1.0), 2048, 1.0);
    const double e0 = gap_resolution_limit(cap);
    const auto g = energy_gap(cap, 2 * e0);
    CHECK(g.certified);
    CHECK(g.margin > 0.0);
    CHECK(g.margin == doctest::Approx(g.threshold - g.sup_J_extrapolated));
    CHECK(g.t_max > 0.0);
    CHECK_THROWS_AS(energy_gap(cap, 0.5 * e0), ResolutionError);

    const auto flat = make(ModelGeometry::euclidean_ball(8), 2048, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {8 * e0, 4 * e0, 2 * e0, e0}) {
        const auto r = energy_gap(flat, eps);
        CHECK(!r.certified);
        CHECK(std::abs(r.margin) < prev);
        prev = std::abs(r.margin);
    }
}

TEST_CASE("expansion on the flat ball, n = 8") {
    ProblemSpec s;
    s.geom = ModelGeometry::euclidean_ball(8);
    ExpansionOptions o;
    o.eps = {0.04, 0.028, 0.02, 0.014, 0.01};
    o.m = 8000;
    const auto r = expansion_check(s, o);
    CHECK(r.rows.size() == 5);
    CHECK(r.normalization == "leading-constant");
    CHECK(r.fit_model == "eps2");
    CHECK(r.lead_ratio == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.rows.back().norm_fN == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.coeff_bilap_closed == 0.0);

    o.eps = {0.01, 0.02, 0.03};
    CHECK_THROWS_AS(expansion_check(s, o), ConfigurationError);
    s.geom = ModelGeometry::euclidean_ball(5);
    o.eps = {0.03, 0.02, 0.01};
    CHECK_THROWS_AS(expansion_check(s, o), DomainError);
}
