#include "doctest.h"

#include "nehari/errors.hpp"
#include "nehari/functional.hpp"
#include "nehari/nehari.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace nehari;

namespace {

ProblemSpec reference(double lambda = 0.0) {
    ProblemSpec s;
    s.geom = ModelGeometry::euclidean_ball(8, 1.0);
    s.lambda = lambda;
    return s;
}

Field clamped(const Problem& p, double k) {
    return Field::sample(p.grid_ptr(), [k](double r) { return std::pow(1 - r * r, 2) * (1 + k * r * r); });
}

// K(n,2) for the biharmonic Sobolev embedding (Lions / Edmunds-Fortunato-Jannelli)
double K0_closed(int n) {
    const double pi = std::numbers::pi;
    return std::pow(std::tgamma(double(n)) / std::tgamma(0.5 * n), 4.0 / n) / (pi * pi * n * (n - 4.0) * (double(n) * n - 4.0));
}

}  // namespace

TEST_CASE("spec validation") {
    auto s = reference();
    s.q = 2.0;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s = reference();
    s.sigma = 2.0;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s.sharp = true;
    CHECK_NOTHROW(s.validate());
    s = reference();
    s.f = {-1.0, 0.0};
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s = reference();
    s.f = {1.0, 0.5};
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    s = reference();
    s.a = {1.0, 0.0};
    s.sigma = 1.9;
    s.r = 5.0;
    CHECK_THROWS_AS(s.validate(), ConfigurationError);
    CHECK(reference().critical_exponent() == 4.0);
}

TEST_CASE("quad_form of a clamped polynomial") {
    const Problem p(reference(), build_grid(ModelGeometry::euclidean_ball(8), 2048, 2.0));
    CHECK(quad_form(p, Field::zeros(p.grid_ptr())) == 0.0);
    // Delta (1 - r^2)^2 = -4n + (4n + 8) r^2; int_0^1 (-32 + 40 r^2)^2 r^7 dr = 16/3
    const Field u = clamped(p, 0.0);
    CHECK(quad_form(p, u) == doctest::Approx(sphere_area(8) * 16.0 / 3.0).epsilon(1e-6));
    CHECK(quad_form(p, 3.0 * u) == doctest::Approx(9.0 * quad_form(p, u)).epsilon(1e-12));
}

TEST_CASE("rho^4 energy through the pointwise operator") {
    const auto g = build_grid(ModelGeometry::euclidean_ball(8), 4096, 1.0);
    const auto ops = build_operators(*g);
    Eigen::VectorXd u(g->size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::pow(g->nodes[i], 4);
    const Eigen::VectorXd lu = ops.lap_free * u;
    CHECK(integrate(*g, lu.cwiseProduct(lu)) == doctest::Approx(sphere_area(8) * 1600.0 / 12.0).epsilon(1e-4));
}

TEST_CASE("quad_form is a symmetric bilinear form") {
    auto s = reference();
    s.a = {0.7, 0.0};
    s.b = {-0.4, 0.0};
    s.sigma = 1.5;
    s.mu = 3.0;
    const Problem p(s, build_grid(s.geom, 512, 2.0));
    const Field u = clamped(p, 0.3), v = clamped(p, -1.2);
    const double Q = quad_form(p, u + v) - quad_form(p, u - v);
    const Eigen::SparseMatrix<double> K = p.quad_matrix();
    const Eigen::VectorXd cu = p.space().coefficients(u.values()), cv = p.space().coefficients(v.values());
    CHECK(Q / 4.0 == doctest::Approx(cu.dot(K * cv)).epsilon(1e-9));
    CHECK(Q / 4.0 == doctest::Approx(cv.dot(K * cu)).epsilon(1e-9));
}

TEST_CASE("energy, residual and second form on the synthetic triple") {
    const auto s = reference(0.1);
    Parts p;
    p.quad = p.lq = p.crit = 1.0;
    CHECK(energy_from(s, p) == doctest::Approx(0.5 - 0.1 / 1.5 - 0.25).epsilon(1e-15));
    CHECK(energy_from(s, p) == doctest::Approx(0.18333333333333333));
    CHECK(nehari_residual_from(s, p) == doctest::Approx(-0.1));
    CHECK(nehari_second_from(s, p) == doctest::Approx(-2.15));
}

TEST_CASE("energy along a ray") {
    const Problem p(reference(0.2), build_grid(ModelGeometry::euclidean_ball(8), 512, 2.0));
    const Field zero = Field::zeros(p.grid_ptr());
    CHECK(energy(p, zero) == 0.0);
    CHECK(nehari_residual(p, zero) == 0.0);
    CHECK(nehari_second(p, zero) == 0.0);
    const Field u = clamped(p, 0.5);
    const Parts a = parts(p, u.values());
    const double t = 2.0, N = 4.0, q = 1.5;
    const double expect = 0.5 * t * t * a.quad - 0.2 / q * std::pow(t, q) * a.lq - std::pow(t, N) / N * a.crit;
    CHECK(energy(p, t * u) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("gradient") {
    auto s = reference(0.3);
    s.a = {0.5, 0.0};
    s.b = {1.0, -1.0};
    s.sigma = 1.5;
    s.mu = 3.0;
    const Problem p(s, build_grid(s.geom, 300, 2.0));
    const Field zero = Field::zeros(p.grid_ptr());
    CHECK(grad_energy(p, zero).values().norm() == 0.0);

    std::mt19937_64 rng(7);
    for (int k = 0; k < 5; ++k) {
        const Field u = 0.05 * random_field(p, rng);
        const Field v = random_field(p, rng);
        const Field g = grad_energy(p, u);
        CHECK(p.inner_h(g.values(), u.values()) == doctest::Approx(nehari_residual(p, u)).epsilon(1e-10));
        const double h = 1e-6;
        const double fd = (energy(p, u + h * v) - energy(p, u + (-h) * v)) / (2 * h);
        CHECK(p.inner_h(g.values(), v.values()) == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK_THROWS_AS(p.riesz(Eigen::VectorXd::Ones(3)), ShapeError);
}

TEST_CASE("coercivity matches a dense generalized eigensolve") {
    for (double b : {0.0, 2.0}) {
        auto s = reference();
        s.b = {b, 0.0};
        s.a = {b == 0.0 ? 0.0 : -0.5, 0.0};
        s.mu = 3.0;
        const Problem p(s, build_grid(s.geom, 96, 2.0));
        const Eigen::MatrixXd Q = Eigen::MatrixXd(p.quad_matrix());
        const Eigen::MatrixXd H = Eigen::MatrixXd(p.h_matrix());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, H);
        const auto c = estimate_coercivity(p);
        CHECK(c.lambda_min == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-7));
        CHECK(c.coercive);
        if (b == 0.0) {
            CHECK(c.lambda_min > 0.0);
            CHECK(c.lambda_min < 1.0);
        }
        CHECK(c.mode.size() == p.grid().size());
    }
}

TEST_CASE("b >= 0 and a <= 0 do not decrease Lambda") {
    const auto g = build_grid(ModelGeometry::euclidean_ball(8), 256, 2.0);
    auto s = reference();
    const double base = estimate_coercivity(Problem(s, g)).lambda_min;
    s.b = {1.5, 0.0};
    s.a = {-0.5, 0.0};
    s.sigma = 1.5;
    s.mu = 3.0;
    CHECK(estimate_coercivity(Problem(s, g)).lambda_min >= base);
}

TEST_CASE("Sobolev constant") {
    for (int n : {5, 6, 8, 12}) CHECK(sobolev_constant_estimate(n) == doctest::Approx(K0_closed(n)).epsilon(1e-10));
    CHECK_THROWS_AS(sobolev_constant_estimate(4), DomainError);
}

TEST_CASE("companion constant") {
    const auto geom = ModelGeometry::euclidean_ball(8);
    const double K0 = sobolev_constant_estimate(8);
    const auto est = companion_constant_estimate(geom, K0, 1e-2);
    CHECK(est.A > 0.0);
    CHECK(est.probes > 10);
    CHECK(!est.argmax.empty());
    // more slack on K0 can only lower A
    CHECK(companion_constant_estimate(geom, K0, 0.5).A <= est.A);
}

TEST_CASE("thresholds worked examples") {
    const auto r = thresholds(8, 1.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
    CHECK(r.lambda0 == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(r.xi == doctest::Approx(std::sqrt(0.2)).epsilon(1e-14));
    CHECK(r.xi == doctest::Approx(0.4472).epsilon(1e-4));
    CHECK(r.lambda2 == doctest::Approx(0.08).epsilon(1e-14));
    const auto d = thresholds(8, 1.5, 2.0, 1.0, 1.0, 1.0, 1.0, 0.0);
    CHECK(d.lambda0 / r.lambda0 == doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-14));
    CHECK_THROWS_AS(thresholds(8, 1.5, -1.0, 1.0, 1.0, 1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(thresholds(8, 1.5, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("estimated constants on the reference spec") {
    const Problem p(reference(), build_grid(ModelGeometry::euclidean_ball(8), 512, 2.0));
    const auto c = estimate_constants(p);
    CHECK(c.coercive);
    CHECK(c.Lambda > 0.0);
    CHECK(c.lambda0 > 0.0);
    CHECK(c.lambda2 > 0.0);
    CHECK(c.xi > 0.0);
    CHECK(c.theta == 1.0);
    CHECK(c.volume == doctest::Approx(sphere_area(8) / 8).epsilon(1e-12));
}

TEST_CASE("theta") {
    auto s = reference();
    s.a = {1.0, 0.0};
    s.sigma = 1.0;
    s.r = 2.0;
    const Problem p(s, build_grid(s.geom, 1024, 2.0));
    // |rho^-1|_2 = (omega_7 / 6)^{1/2}
    const double expect = std::pow(1.0 + std::sqrt(sphere_area(8) / 6.0), 1.0 / 8.0);
    CHECK(theta(p) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(theta(p) >= 1.0);
}
