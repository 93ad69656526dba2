#include "doctest.h"

#include "nehari/errors.hpp"
#include "nehari/functional.hpp"
#include "nehari/operators.hpp"

#include <cmath>

using namespace nehari;

namespace {
GridPtr ball(int n, int m, double g = 1.0) { return build_grid(ModelGeometry::euclidean_ball(n, 1.0), m, g); }

double max_rel_interior(const Field& got, const std::function<double(double)>& exact, Eigen::Index skip_end,
                        double rho_min = 0.0) {
    double worst = 0.0;
    const auto& r = got.grid().nodes;
    for (Eigen::Index i = 0; i + skip_end < got.size(); ++i) {
        if (r[i] < rho_min) continue;
        worst = std::max(worst, std::abs(got[i] - exact(r[i])) / std::max(1.0, std::abs(exact(r[i]))));
    }
    return worst;
}
}  // namespace

TEST_CASE("laplacian of constants and rho^2") {
    for (int n : {5, 8, 11}) {
        const auto g = ball(n, 200, 1.5);
        const Field c = Field::sample(g, [](double) { return 3.0; });
        CHECK(max_rel_interior(laplacian(c), [](double) { return 0.0; }, 1) < 1e-8);
        const Field r2 = Field::sample(g, [](double r) { return r * r; });
        CHECK(max_rel_interior(laplacian(r2), [n](double) { return 2.0 * n; }, 1) < 1e-11);
    }
}

TEST_CASE("laplacian of rho^4 converges at second order") {
    const int n = 8;
    double prev = 0.0;
    for (int m : {128, 256, 512}) {
        const auto g = ball(n, m);
        const Field u = Field::sample(g, [](double r) { return std::pow(r, 4); });
        const double err = max_rel_interior(laplacian(u), [n](double r) { return (4.0 * n + 8.0) * r * r; }, 1);
        CHECK(err < 1e-2);
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
        prev = err;
    }
}

TEST_CASE("bilaplacian of rho^4") {
    for (int n : {8, 10}) {
        const auto g = ball(n, 256);
        const Field u = Field::sample(g, [](double r) { return std::pow(r, 4); });
        // the clamped closure does not apply to rho^4; compare away from the last two rows and the origin cells
        const double expect = 8.0 * n * (n + 2);
        CHECK(max_rel_interior(bilaplacian(u), [=](double) { return expect; }, 2, 0.1) < 1e-3);
        const Field c = Field::sample(g, [](double) { return -2.0; });
        CHECK(max_rel_interior(bilaplacian(c), [](double) { return 0.0; }, 2) < 1e-5);
    }
    CHECK(8 * 8 * 10 == 640);
    CHECK(8 * 10 * 12 == 960);
}

TEST_CASE("gradient_sq") {
    const auto g = ball(8, 400, 2.0);
    const Field c = Field::sample(g, [](double) { return 1.0; });
    CHECK(max_rel_interior(gradient_sq(c), [](double) { return 0.0; }, 1) < 1e-12);
    // rho is odd, so the even ghost at node 0 does not apply there
    const Field lin = Field::sample(g, [](double r) { return r; });
    const Field gl = gradient_sq(lin);
    for (Eigen::Index i = 1; i + 1 < gl.size(); ++i) CHECK(gl[i] == doctest::Approx(1.0).epsilon(1e-10));
    const Field sq = Field::sample(g, [](double r) { return r * r; });
    CHECK(max_rel_interior(gradient_sq(sq), [](double r) { return 4.0 * r * r; }, 1) < 1e-3);
}

TEST_CASE("weighted Lebesgue norms") {
    const double w5 = sphere_area(6);
    const auto g = ball(6, 1024, 2.0);
    CHECK(weighted_lp_norm(Field::zeros(g), 2.0, 0.0) == 0.0);
    const Field one = Field::sample(g, [](double) { return 1.0; });
    CHECK(weighted_lp_norm(one, 2.0, 0.0) == doctest::Approx(std::sqrt(w5 / 6.0)).epsilon(1e-10));
    CHECK(weighted_lp_norm(one, 2.0, -3.0) == doctest::Approx(std::sqrt(w5 / 3.0)).epsilon(1e-10));
    const Field u = Field::sample(g, [](double r) { return std::cos(r) - 0.3; });
    CHECK(weighted_lp_norm(-2.5 * u, 3.0, -1.0) == doctest::Approx(2.5 * weighted_lp_norm(u, 3.0, -1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(weighted_lp_norm(one, 2.0, -6.0), DomainError);
    CHECK_THROWS_AS(weighted_lp_norm(one, 0.5, 0.0), DomainError);
}

TEST_CASE("too few nodes") {
    const auto g = midpoint_grid(ModelGeometry::euclidean_ball(8), 4, 1.0);
    CHECK_THROWS_AS(laplacian(Field::zeros(g)), StencilError);
}

TEST_CASE("discrete integration by parts for clamped fields") {
    const auto g = ball(8, 2048, 1.5);
    auto bump = [](double r) { return std::pow(1 - r * r, 2) * (1 + 0.5 * r * r); };
    auto other = [](double r) { return std::pow(1 - r * r, 3); };
    const Field u = Field::sample(g, bump), v = Field::sample(g, other);
    const double lhs = integrate(Field(g, v.values().cwiseProduct(bilaplacian(u).values())));
    const double rhs = integrate(Field(g, laplacian(u).values().cwiseProduct(laplacian(v).values())));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
}

TEST_CASE("spline space reproduces clamped polynomials") {
    const auto g = ball(8, 256, 2.0);
    const SplineSpace sp(*g);
    // (1 - r^2)^2 is not a cubic, so compare to interpolation accuracy
    auto u = [](double r) { return std::pow(1 - r * r, 2); };
    auto lap = [](double r) { return -4.0 * 8 + (4.0 * 8 + 8.0) * r * r; };
    Eigen::VectorXd nodal(g->size());
    for (Eigen::Index i = 0; i < nodal.size(); ++i) nodal[i] = u(g->nodes[i]);
    const Eigen::VectorXd c = sp.coefficients(nodal);
    CHECK((sp.nodal(c) - nodal).norm() < 1e-12 * nodal.norm());
    const Eigen::VectorXd L = sp.laplace() * c;
    const Eigen::VectorXd V = sp.value() * c;
    double err_v = 0.0, err_l = 0.0;
    for (Eigen::Index k = 0; k < L.size(); ++k) {
        err_v = std::max(err_v, std::abs(V[k] - u(sp.points()[k])));
        err_l = std::max(err_l, std::abs(L[k] - lap(sp.points()[k])));
    }
    CHECK(err_v < 1e-5);
    CHECK(err_l < 5e-2);
    CHECK(sp.measure().sum() == doctest::Approx(sphere_area(8) / 8).epsilon(1e-13));
}
