#pragma once

#include "nehari/field.hpp"
#include "nehari/operators.hpp"
#include "nehari/spline.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <memory>
#include <string>

namespace nehari {

// Radial coefficient c0 * (1 + c * rho^2 / (2n)); its Laplacian at the center is c * c0.
struct RadialProfile {
    double center = 0.0;
    double laplacian_ratio = 0.0;

    double value(double rho, int n) const { return center * (1.0 + laplacian_ratio * rho * rho / (2.0 * n)); }
    double laplacian_at_center() const { return laplacian_ratio * center; }
    double min_on(double R, int n) const { return std::min(value(0.0, n), value(R, n)); }
    double max_on(double R, int n) const { return std::max(value(0.0, n), value(R, n)); }
    bool is_zero() const { return center == 0.0; }
};

// Energy
//   J(u) = 1/2 |u|^2 - lambda/q int |u|^q - 1/N int f |u|^N,
//   |u|^2 = int (Delta u)^2 - a rho^-sigma |grad u|^2 + b rho^-mu u^2.
struct ProblemSpec {
    ModelGeometry geom;
    RadialProfile a;
    RadialProfile b;
    RadialProfile f{1.0, 0.0};
    double q = 1.5;
    double sigma = 1.0;
    double mu = 2.0;
    double lambda = 0.0;
    double r = 2.0;  // Lebesgue exponent for |a rho^-sigma|_r
    double s = 2.0;  // Lebesgue exponent for |b rho^-mu|_s
    double sobolev_eps = 1e-2;
    bool sharp = false;  // admits sigma = 2, mu = 4

    double critical_exponent() const { return 2.0 * geom.n / (geom.n - 4.0); }
    double f_max() const { return f.value(0.0, geom.n); }
    void validate() const;
};

// A spec bound to a grid. Fields are nodal values of cubic splines (see SplineSpace); all
// integrals are taken at the spline quadrature points.
class Problem {
public:
    Problem(ProblemSpec spec, GridPtr grid);

    const ProblemSpec& spec() const { return spec_; }
    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const SplineSpace& space() const;

    // Copy sharing all assembled data, with a different lambda.
    Problem with_lambda(double lambda) const;

    // Weights at the quadrature points.
    const Eigen::VectorXd& w() const;       // W
    const Eigen::VectorXd& w_grad() const;  // W a rho^-sigma
    const Eigen::VectorXd& w_zero() const;  // W b rho^-mu
    const Eigen::VectorXd& w_crit() const;  // W f

    // Discrete H^2_2 inner product int (Delta x Delta y + x' y' + x y).
    double inner_h(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    double norm_h(const Eigen::VectorXd& x) const;
    // Riesz representative of a nodal dual vector: (g, v)_H = dual . v for all v.
    Eigen::VectorXd riesz(const Eigen::VectorXd& dual) const;

    // Quadratic form and H^2_2 Gram matrices on spline coefficients (column major).
    Eigen::SparseMatrix<double> quad_matrix() const;
    Eigen::SparseMatrix<double> h_matrix() const;

private:
    struct Data;
    ProblemSpec spec_;
    GridPtr grid_;
    std::shared_ptr<const Data> data_;
};

Field make_field(const Problem& problem, Eigen::VectorXd values);

// The three integrals every fibering computation needs.
struct Parts {
    double quad = 0.0;  // |u|^2
    double lq = 0.0;    // int |u|^q
    double crit = 0.0;  // int f |u|^N
};

Parts parts(const Problem& problem, const Eigen::VectorXd& u);

double quad_form(const Problem& problem, const Field& u);
double energy(const Problem& problem, const Field& u);
double nehari_residual(const Problem& problem, const Field& u);
double nehari_second(const Problem& problem, const Field& u);

double energy_from(const ProblemSpec& spec, const Parts& p);
double nehari_residual_from(const ProblemSpec& spec, const Parts& p);
double nehari_second_from(const ProblemSpec& spec, const Parts& p);

// Derivative of J as a dual vector: dJ(u)[v] = dual . v.
Eigen::VectorXd energy_dual(const Problem& problem, const Eigen::VectorXd& u);
Field grad_energy(const Problem& problem, const Field& u);

struct CoercivityResult {
    double lambda_min = 0.0;  // smallest generalized eigenvalue of (Q, H)
    bool coercive = false;
    int bisection_steps = 0;
    int inverse_iterations = 0;
    Eigen::VectorXd mode;
};

CoercivityResult estimate_coercivity(const Problem& problem);

// K0 = (int U^N)^{2/N} / int (Delta U)^2 for U = (1 + |x|^2)^{-(n-4)/2} on R^n.
double sobolev_constant_estimate(int n);

// Smallest A >= 0 with |u|_N^2 <= (1+eps) K0 |Delta u|_2^2 + A |u|_2^2 over the probe family.
struct CompanionEstimate {
    double A = 0.0;
    std::string argmax;  // probe attaining the maximum
    int probes = 0;
};

CompanionEstimate companion_constant_estimate(const ModelGeometry& geom, double K0, double eps);

// theta = (1 + |a rho^-sigma|_r + |b rho^-mu|_s)^{1/n}
double theta(const Problem& problem);

struct ConstantsReport {
    double Lambda = 0.0;
    double K0 = 0.0;
    double A_eps = 0.0;
    double lambda0 = 0.0;
    double lambda2 = 0.0;
    double xi = 0.0;
    double theta = 1.0;
    double volume = 0.0;
    double f_max = 0.0;
    double eps = 0.0;
    bool coercive = false;

    double lambda_small() const { return std::min(lambda0, lambda2); }
};

ConstantsReport thresholds(int n, double q, double Lambda, double K0, double A, double volume,
                           double f_max, double eps);

ConstantsReport estimate_constants(const Problem& problem);

}  // namespace nehari
