#pragma once

#include "nehari/functional.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nehari {

// E(t) = t^{2-q} |u|^2 - t^{N-q} int f|u|^N, compared against lambda int |u|^q.
struct FiberingResult {
    double t0 = 0.0;
    double E_t0 = 0.0;
    double level = 0.0;  // lambda int |u|^q
    bool feasible = false;
    std::optional<double> t_plus;
    std::optional<double> t_minus;

    double margin() const { return E_t0 - level; }
};

double fibering_E(double t, double quad, double crit, double q, double N);
double fibering_E_prime(double t, double quad, double crit, double q, double N);

// Scalar core: quad = |u|^2, level = lambda |u|_q^q, crit = int f |u|^N.
FiberingResult fibering_scalar(double quad, double level, double crit, double q, double N);
FiberingResult fibering(const Problem& problem, const Field& u);

enum class Branch { Nplus, Nminus };
enum class NehariTag { Nplus, Nminus, Nzero };

std::string to_string(Branch b);
std::string to_string(NehariTag t);

struct NehariClass {
    NehariTag tag = NehariTag::Nzero;
    double second_form = 0.0;
    double tol = 0.0;
};

NehariClass classify(const Problem& problem, const Field& u, double tol = 1e-8);

// Returns t * u on the requested branch; ProjectionError when infeasible.
Field project(const Problem& problem, const Field& u, Branch branch);
double projection_factor(const Problem& problem, const Eigen::VectorXd& u, Branch branch);

struct SolverOptions {
    double tol = 1e-7;             // on |H^{-1} dJ|_H / |u|_H
    int max_iter = 20000;
    double armijo = 1e-4;
    double shrink = 0.5;
    double min_step = 1e-20;
    double initial_step = 1.0;
    double distinct_tol = 1e-3;
    double class_tol = 1e-8;
    double init_eps = 0.0;         // bubble width for the Nminus start; 0 selects by scan
    double init_delta = 0.0;       // bubble cutoff radius; 0 selects R/4
    bool keep_trace = true;
};

struct TraceRow {
    int iter = 0;
    double t_projection = 1.0;
    double J = 0.0;
    double phi_residual = 0.0;
    double grad_residual = 0.0;
    double step = 0.0;
};

struct SolveReport {
    Branch branch = Branch::Nplus;
    Eigen::VectorXd u;
    double J_value = 0.0;
    double phi_residual = 0.0;   // |Phi(u)| / |u|^2
    double grad_residual = 0.0;  // |H^{-1} dJ(u)|_H / |u|_H
    int iterations = 0;
    bool converged = false;
    bool sign_ok = false;        // Nplus: J < 0, Nminus: J > 0
    bool small_lambda = false;   // lambda < min(lambda0, lambda2) when known
    std::string status;
    std::vector<TraceRow> step_trace;
};

Field initial_guess(const Problem& problem, Branch branch, const SolverOptions& opts);

SolveReport minimize_branch(const Problem& problem, Branch branch, const Field& u_init, const SolverOptions& opts,
                            std::optional<double> lambda_small = std::nullopt);

struct BothReport {
    SolveReport plus;
    SolveReport minus;
    double distance_h = 0.0;     // |u+ - u-|_H
    double collinearity = 0.0;   // |<u+,u->_H| / (|u+|_H |u-|_H)
    bool distinct = false;
    bool ordering = false;       // J(u+) < 0 < J(u-)
    bool converged = false;
};

BothReport solve_both(const Problem& problem, const SolverOptions& opts, std::optional<double> lambda_small = std::nullopt);

// Smooth clamped random field (1 - rho^2/R^2)^2 sum_k c_k cos(k pi rho / R).
Field random_field(const Problem& problem, std::mt19937_64& rng);

struct NzeroProbe {
    int probes = 0;
    int in_band = 0;
    int infeasible = 0;
    double min_rel_second = 0.0;  // min |<grad Phi(tu), tu>| / |tu|^2 over projections
};

// Projects random fields to both branches and counts classifications in the N0 band.
NzeroProbe nzero_probe(const Problem& problem, int count, std::uint64_t seed, double tol = 1e-8);

}  // namespace nehari
