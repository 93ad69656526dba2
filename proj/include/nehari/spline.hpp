#pragma once

#include "nehari/geometry.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>

namespace nehari {

// Cubic splines on the knots R (j/m)^g, j = 0..m, with u'(0) = 0 and u(R) = u'(R) = 0.
// The space has one degree of freedom per grid node; nodal values determine the spline by
// collocation at the nodes. Energies are integrated exactly in the measure on every knot
// interval (Gauss-Legendre), so the discrete quadratic forms are restrictions of the
// continuous ones.
class SplineSpace {
public:
    using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    using ColMatrix = Eigen::SparseMatrix<double>;

    explicit SplineSpace(const RadialGrid& grid);

    Eigen::Index size() const { return size_; }
    Eigen::Index quadrature_size() const { return points_.size(); }

    const Eigen::VectorXd& points() const { return points_; }
    // Quadrature weight times the volume density at each point.
    const Eigen::VectorXd& measure() const { return measure_; }

    // Coefficients to values, radial slopes and Laplacians at the quadrature points.
    const RowMatrix& value() const { return value_; }
    const RowMatrix& slope() const { return slope_; }
    const RowMatrix& laplace() const { return laplace_; }
    // Coefficients to values at the grid nodes.
    const ColMatrix& collocation() const { return colloc_; }

    Eigen::VectorXd coefficients(const Eigen::VectorXd& nodal) const;
    Eigen::VectorXd nodal(const Eigen::VectorXd& coeffs) const { return colloc_ * coeffs; }
    // Solves C^T y = x, pulling a coefficient-space dual back to nodal values.
    Eigen::VectorXd pullback(const Eigen::VectorXd& coeff_dual) const;

private:
    Eigen::Index size_ = 0;
    Eigen::VectorXd points_;
    Eigen::VectorXd measure_;
    RowMatrix value_, slope_, laplace_;
    ColMatrix colloc_;
    std::shared_ptr<Eigen::SparseLU<ColMatrix>> lu_, lu_t_;
};

}  // namespace nehari
