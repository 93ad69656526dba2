#pragma once

#include <stdexcept>
#include <string>

namespace nehari {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid run or construction parameters.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// Sample vectors of mismatched length, or fields living on different grids.
class ShapeError : public Error {
public:
    using Error::Error;
};

class StencilError : public Error {
public:
    using Error::Error;
};

// Fibering projection does not exist; carries E(t0) - lambda*|u|_q^q.
class ProjectionError : public Error {
public:
    ProjectionError(const std::string& what, double margin)
        : Error(what), margin_(margin) {}
    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

// Bubble too narrow for the grid.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace nehari
