#pragma once

#include "nehari/geometry.hpp"

#include <Eigen/Dense>

#include <functional>

namespace nehari {

// Radial profile sampled at the nodes of one grid.
class Field {
public:
    Field(GridPtr grid, Eigen::VectorXd values);

    static Field zeros(GridPtr grid);
    static Field sample(GridPtr grid, const std::function<double(double)>& fn);

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }

    bool same_grid(const Field& other) const { return grid_ == other.grid_; }

    Field operator+(const Field& other) const;
    Field operator-(const Field& other) const;
    Field operator*(double t) const;
    friend Field operator*(double t, const Field& u) { return u * t; }

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

double integrate(const Field& samples);

}  // namespace nehari
