#include "nehari/operators.hpp"

#include "nehari/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <vector>

namespace nehari {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_closure_clamped(const RadialGrid& grid, Triplets& lap, Triplets& der) {
    const Eigen::Index m = grid.size();
    const double R = grid.geom.R;
    const double x1 = grid.nodes[m - 2] - R;
    const double x2 = grid.nodes[m - 1] - R;
    const double kappa = grid.geom.drift(grid.nodes[m - 1]);
    // p(x) = x^2 (alpha + beta x) matching e_j at the two nodes
    for (int k = 0; k < 2; ++k) {
        const double e1 = k == 0 ? 1.0 : 0.0;
        const double e2 = 1.0 - e1;
        const double beta = (e1 / (x1 * x1) - e2 / (x2 * x2)) / (x1 - x2);
        const double alpha = e2 / (x2 * x2) - beta * x2;
        const double d1 = 2.0 * alpha * x2 + 3.0 * beta * x2 * x2;
        const double d2 = 2.0 * alpha + 6.0 * beta * x2;
        const auto col = m - 2 + k;
        lap.emplace_back(m - 1, col, d2 + kappa * d1);
        der.emplace_back(m - 1, col, d1);
    }
}

void add_closure_free(const RadialGrid& grid, Triplets& lap) {
    const Eigen::Index m = grid.size();
    const double x0 = grid.nodes[m - 3] - grid.nodes[m - 1];
    const double x1 = grid.nodes[m - 2] - grid.nodes[m - 1];
    const double kappa = grid.geom.drift(grid.nodes[m - 1]);
    // Lagrange basis on {x0, x1, 0}, derivatives evaluated at 0
    const double xs[3] = {x0, x1, 0.0};
    for (int k = 0; k < 3; ++k) {
        const double a = xs[(k + 1) % 3];
        const double b = xs[(k + 2) % 3];
        const double denom = (xs[k] - a) * (xs[k] - b);
        const double d1 = -(a + b) / denom;
        const double d2 = 2.0 / denom;
        lap.emplace_back(m - 1, m - 3 + k, d2 + kappa * d1);
    }
}

}  // namespace

RadialOperators build_operators(const RadialGrid& grid) {
    const Eigen::Index m = grid.size();
    if (m < 5) throw StencilError("radial stencils need at least 5 nodes");
    const auto& r = grid.nodes;

    Triplets lap, der;
    lap.reserve(3 * m);
    der.reserve(3 * m);
    const int n = grid.geom.n;
    const bool sphere = grid.geom.kind == GeometryKind::RoundSphere;
    auto area = [&](double e) { return std::pow(sphere ? std::sin(e) : e, n - 1); };
    auto volume = [&](double a, double b) {
        if (!sphere) return (std::pow(b, n) - std::pow(a, n)) / n;
        using GL = boost::math::quadrature::gauss<double, 8>;
        return GL::integrate([&](double x) { return std::pow(std::sin(x), n - 1); }, a, b);
    };
    // Conservative flux form on dual cells [e_{i-1/2}, e_{i+1/2}] with e_{-1/2} = 0. Off-diagonals stay
    // positive next to the origin, where a central drift term would not.
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        const double em = i == 0 ? 0.0 : 0.5 * (r[i - 1] + r[i]);
        const double ep = 0.5 * (r[i] + r[i + 1]);
        const double V = volume(em, ep);
        const double cp = area(ep) / ((r[i + 1] - r[i]) * V);
        const double cm = i == 0 ? 0.0 : area(em) / ((r[i] - r[i - 1]) * V);
        if (i > 0) lap.emplace_back(i, i - 1, cm);
        lap.emplace_back(i, i, -cp - cm);
        lap.emplace_back(i, i + 1, cp);

        const double rm = i == 0 ? -r[0] : r[i - 1];
        const Eigen::Index jm = i == 0 ? 0 : i - 1;
        const double hm = r[i] - rm;
        const double hp = r[i + 1] - r[i];
        const double c1[3] = {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
        const Eigen::Index cols[3] = {jm, i, i + 1};
        for (int k = 0; k < 3; ++k) der.emplace_back(i, cols[k], c1[k]);
    }
    Triplets lap_free = lap;
    add_closure_clamped(grid, lap, der);
    add_closure_free(grid, lap_free);

    RadialOperators ops;
    ops.lap.resize(m, m);
    ops.lap_free.resize(m, m);
    ops.deriv.resize(m, m);
    ops.lap.setFromTriplets(lap.begin(), lap.end());
    ops.lap_free.setFromTriplets(lap_free.begin(), lap_free.end());
    ops.deriv.setFromTriplets(der.begin(), der.end());
    return ops;
}

Field laplacian(const Field& u) {
    const auto ops = build_operators(u.grid());
    return Field(u.grid_ptr(), ops.lap * u.values());
}

Field bilaplacian(const Field& u) {
    const auto ops = build_operators(u.grid());
    Eigen::VectorXd lu = ops.lap * u.values();
    return Field(u.grid_ptr(), ops.lap_free * lu);
}

Field derivative(const Field& u) {
    const auto ops = build_operators(u.grid());
    return Field(u.grid_ptr(), ops.deriv * u.values());
}

Field gradient_sq(const Field& u) {
    const auto du = derivative(u);
    return Field(u.grid_ptr(), du.values().array().square().matrix());
}

double weighted_lp_norm(const Field& u, double p, double gamma) {
    if (!(p >= 1.0)) throw DomainError("Lebesgue exponent must be >= 1");
    const int n = u.grid().geom.n;
    if (!(gamma > -n)) throw DomainError("weight rho^gamma is not integrable for gamma <= -n");
    // the weight is integrated exactly over each cell, |u|^p is sampled at the node
    const Eigen::VectorXd M = gamma == 0.0 ? u.grid().measure : cell_moments(u.grid(), gamma);
    const double total = M.dot(u.values().array().abs().pow(p).matrix());
    return std::pow(total, 1.0 / p);
}

}  // namespace nehari
