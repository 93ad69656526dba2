#include "nehari/field.hpp"

#include "nehari/errors.hpp"

namespace nehari {

Field::Field(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ShapeError("field without grid");
    if (values_.size() != grid_->size()) throw ShapeError("field length does not match grid size");
    if (!values_.allFinite()) throw NumericalError("field has non-finite samples");
}

Field Field::zeros(GridPtr grid) {
    const auto m = grid->size();
    return Field(std::move(grid), Eigen::VectorXd::Zero(m));
}

Field Field::sample(GridPtr grid, const std::function<double(double)>& fn) {
    Eigen::VectorXd v(grid->size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(grid->nodes[i]);
    return Field(std::move(grid), std::move(v));
}

Field Field::operator+(const Field& other) const {
    if (!same_grid(other)) throw ShapeError("fields live on different grids");
    return Field(grid_, values_ + other.values_);
}

Field Field::operator-(const Field& other) const {
    if (!same_grid(other)) throw ShapeError("fields live on different grids");
    return Field(grid_, values_ - other.values_);
}

Field Field::operator*(double t) const { return Field(grid_, values_ * t); }

double integrate(const Field& samples) { return integrate(samples.grid(), samples.values()); }

}  // namespace nehari
