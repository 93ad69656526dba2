#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

namespace nehari {

enum class GeometryKind { EuclideanBall, RoundSphere };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

// Surface area of the unit sphere S^{n-1}.
double sphere_area(int n);

struct ModelGeometry {
    GeometryKind kind = GeometryKind::EuclideanBall;
    int n = 8;
    double R = 1.0;

    static ModelGeometry euclidean_ball(int n, double R = 1.0);
    // Geodesic cap of radius R < pi on the unit round sphere.
    static ModelGeometry round_sphere(int n, double R);

    void validate() const;
    double scalar_curvature() const;
    // G(rho): ratio of the geodesic-sphere area element to the flat one.
    double volume_element(double rho) const;
    // Coefficient of u' in the radial Laplace-Beltrami operator.
    double drift(double rho) const;
    // Exact measure of the domain.
    double volume() const;
};

struct RadialGrid {
    ModelGeometry geom;
    double grading = 1.0;
    Eigen::VectorXd nodes;    // rho_i
    Eigen::VectorXd weights;  // w_i, line weights in rho
    Eigen::VectorXd measure;  // exact volume of each cell


    Eigen::Index size() const { return nodes.size(); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Graded midpoint nodes rho_i = R * s_i^g with s_i = (i + 1/2)/m; cell volumes are exact.
// Requires m >= 16 and grading >= 1.
GridPtr build_grid(const ModelGeometry& geom, int m, double grading);

// Same rule without the minimum-size check; for tiny worked examples.
GridPtr midpoint_grid(const ModelGeometry& geom, int m, double grading);

// omega_{n-1} int_{cell_i} rho^gamma dv over each cell [R (i/m)^g, R ((i+1)/m)^g].
Eigen::VectorXd cell_moments(const RadialGrid& grid, double gamma);

double integrate(const RadialGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& samples);

}  // namespace nehari
