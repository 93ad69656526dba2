#pragma once

#include "nehari/field.hpp"

#include <Eigen/Sparse>

namespace nehari {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Three-point radial stencils on a graded grid, for pointwise evaluation. Energies use the
// spline space instead.
//  - lap is in flux form on the dual cells between node midpoints; the cell around node 0
//    starts at the pole, where the flux vanishes;
//  - deriv is central, with an even ghost value at -rho_0 on node 0;
//  - the last node closes with the clamped cubic x^2 (alpha + beta x), x = rho - R,
//    through the last two nodes, so u(R) = u'(R) = 0 is built in.
// lap_free replaces the clamped closure by a one-sided quadratic; it is applied
// to Delta u, which carries no boundary condition.
struct RadialOperators {
    SparseMatrix lap;
    SparseMatrix lap_free;
    SparseMatrix deriv;
};

RadialOperators build_operators(const RadialGrid& grid);

Field laplacian(const Field& u);
Field bilaplacian(const Field& u);
Field derivative(const Field& u);
// Radial |grad u|^2 = (u')^2.
Field gradient_sq(const Field& u);

// (integral of rho^gamma |u|^p)^{1/p}.
double weighted_lp_norm(const Field& u, double p, double gamma);

}  // namespace nehari
