#pragma once

#include "nehari/nehari.hpp"

#include <vector>

namespace nehari {

struct SweepOptions {
    int levels = 8;
    double lambda_factor = 0.1;  // lambda = factor * lambda0 at each point
    SolverOptions solver;
    bool parallel = true;
};

struct SweepPoint {
    int level = 0;
    double sigma = 0.0;
    double mu = 0.0;
    ConstantsReport constants;
    double lambda = 0.0;
    BothReport both;
};

// sigma_m = 2 - 2^{-m}, mu_m = 4 - 2^{-m+1}, m = 1..levels.
double sweep_sigma(int level);
double sweep_mu(int level);

// Results are ordered by level regardless of evaluation order.
std::vector<SweepPoint> sharp_sweep(const ProblemSpec& base, const GridPtr& grid, const SweepOptions& opts);

}  // namespace nehari
