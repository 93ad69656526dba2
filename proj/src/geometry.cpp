#include "nehari/geometry.hpp"

#include "nehari/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <sstream>

namespace nehari {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

GridPtr make_grid(const ModelGeometry& geom, int m, double grading) {
    geom.validate();
    if (m < 1) throw ConfigurationError("grid needs at least one node");
    if (!(grading >= 1.0) || !std::isfinite(grading))
        throw ConfigurationError("grid grading must be >= 1");

    auto grid = std::make_shared<RadialGrid>();
    grid->geom = geom;
    grid->grading = grading;
    grid->nodes.resize(m);
    grid->weights.resize(m);
    grid->measure.resize(m);
    for (int i = 0; i < m; ++i) {
        const double s = (i + 0.5) / m;
        grid->nodes[i] = geom.R * std::pow(s, grading);
        grid->weights[i] = geom.R * grading * std::pow(s, grading - 1.0) / m;
    }
    grid->measure = cell_moments(*grid, 0.0);
    return grid;
}

}  // namespace

std::string to_string(GeometryKind kind) {
    return kind == GeometryKind::EuclideanBall ? "euclidean-ball" : "round-sphere";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
    if (name == "euclidean-ball") return GeometryKind::EuclideanBall;
    if (name == "round-sphere") return GeometryKind::RoundSphere;
    throw ConfigurationError("unknown geometry kind '" + name + "'");
}

double sphere_area(int n) {
    return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

ModelGeometry ModelGeometry::euclidean_ball(int n, double R) {
    ModelGeometry g{GeometryKind::EuclideanBall, n, R};
    g.validate();
    return g;
}

ModelGeometry ModelGeometry::round_sphere(int n, double R) {
    ModelGeometry g{GeometryKind::RoundSphere, n, R};
    g.validate();
    return g;
}

void ModelGeometry::validate() const {
    if (n < 5) throw ConfigurationError("dimension n must be >= 5");
    if (!(R > 0.0) || !std::isfinite(R)) throw ConfigurationError("radius must be positive");
    if (kind == GeometryKind::RoundSphere && !(R < kPi))
        throw ConfigurationError("sphere cap radius must stay below the injectivity radius pi");
}

double ModelGeometry::scalar_curvature() const {
    return kind == GeometryKind::EuclideanBall ? 0.0 : double(n) * (n - 1);
}

double ModelGeometry::volume_element(double rho) const {
    if (!(rho >= 0.0 && rho <= R)) {
        std::ostringstream msg;
        msg << "radius " << rho << " outside [0, " << R << "]";
        throw DomainError(msg.str());
    }
    if (kind == GeometryKind::EuclideanBall || rho == 0.0) return 1.0;
    return std::pow(std::sin(rho) / rho, n - 1);
}

double ModelGeometry::drift(double rho) const {
    if (kind == GeometryKind::EuclideanBall) return (n - 1) / rho;
    return (n - 1) / std::tan(rho);
}

double ModelGeometry::volume() const {
    const double omega = sphere_area(n);
    if (kind == GeometryKind::EuclideanBall) return omega * std::pow(R, n) / n;
    using boost::math::quadrature::gauss_kronrod;
    const int p = n - 1;
    auto integrand = [p](double r) { return std::pow(std::sin(r), p); };
    return omega * gauss_kronrod<double, 61>::integrate(integrand, 0.0, R, 10, 1e-14);
}

GridPtr build_grid(const ModelGeometry& geom, int m, double grading) {
    if (m < 16) throw ConfigurationError("grid needs m >= 16 nodes");
    return make_grid(geom, m, grading);
}

GridPtr midpoint_grid(const ModelGeometry& geom, int m, double grading) {
    return make_grid(geom, m, grading);
}

Eigen::VectorXd cell_moments(const RadialGrid& grid, double gamma) {
    const auto& geom = grid.geom;
    const int n = geom.n;
    if (!(gamma > -n)) throw DomainError("rho^gamma is not integrable at the origin for gamma <= -n");
    const Eigen::Index m = grid.size();
    const double omega = sphere_area(n);
    auto edge = [&](Eigen::Index i) { return geom.R * std::pow(double(i) / double(m), grid.grading); };
    Eigen::VectorXd out(m);
    if (geom.kind == GeometryKind::EuclideanBall) {
        const double p = gamma + n;
        for (Eigen::Index i = 0; i < m; ++i) out[i] = omega * (std::pow(edge(i + 1), p) - std::pow(edge(i), p)) / p;
        return out;
    }
    // sin^{n-1} r = r^{n-1} h(r) with h smooth; the first cell goes through t = (r/b)^{p}
    auto h = [n](double r) { return r == 0.0 ? 1.0 : std::pow(std::sin(r) / r, n - 1); };
    const double p = gamma + n;
    const double b = edge(1);
    boost::math::quadrature::tanh_sinh<double> ts;
    out[0] = omega * std::pow(b, p) / p * ts.integrate([&](double t) { return h(b * std::pow(t, 1.0 / p)); }, 0.0, 1.0);
    using GL = boost::math::quadrature::gauss<double, 8>;
    for (Eigen::Index i = 1; i < m; ++i) {
        auto fn = [&](double r) { return std::pow(r, gamma) * std::pow(std::sin(r), n - 1); };
        out[i] = omega * GL::integrate(fn, edge(i), edge(i + 1));
    }
    return out;
}

double integrate(const RadialGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& samples) {
    if (samples.size() != grid.size()) throw ShapeError("sample count does not match grid size");
    return grid.measure.dot(samples);
}

}  // namespace nehari
