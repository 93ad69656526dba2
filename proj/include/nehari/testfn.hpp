#pragma once

#include "nehari/functional.hpp"

#include <string>
#include <vector>

namespace nehari {

// I_p^q = int_0^inf t^q (1+t)^{-p} dt = B(q+1, p-q-1).
double integral_I(double p, double q);
// Adaptive quadrature of the same integral, for cross-checks.
double integral_I_quadrature(double p, double q);

// 1 on [0, delta], 0 on [2 delta, inf), 9th-order smoothstep in between.
double cutoff_eta(double rho, double delta);

struct BubbleParams {
    double eps = 0.0;
    double delta = 0.0;
    double theta = 1.0;
    double f_max = 1.0;
};

BubbleParams bubble_params(const Problem& problem, double eps, double delta = 0.0);
double bubble_value(const BubbleParams& bp, int n, double rho);
// Smallest eps with at least 8 nodes inside rho < eps / theta.
double smallest_resolvable_eps(const Problem& problem);

// delta = 0 selects R/4.
Field build_bubble(const Problem& problem, double eps, double delta = 0.0);

// Paths for the I-integrals inside constants_AB.
enum class IEvaluation { Beta, GammaRatio, Quadrature };

struct ConstantsAB {
    double A = 0.0;
    double B = 0.0;
};

ConstantsAB constants_AB(int n, double r, double s, IEvaluation method = IEvaluation::Beta);
ConstantsAB constants_AB(int n, double r, double s, double K0, IEvaluation method = IEvaluation::Beta);

// sup_t (alpha t^2/2 - t^N/N) for N = 2n/(n-4).
struct TwoTermMax {
    double t = 0.0;
    double value = 0.0;
};
TwoTermMax two_term_max(double alpha, int n);

struct ExpansionOptions {
    std::vector<double> eps;
    int m = 40000;
    double grading = 3.0;
    double delta = 0.0;           // 0 selects R/4
    double model_ratio = 5.0;     // n = 6 log-model preference threshold
};

struct ExpansionRow {
    double eps = 0.0;
    double int_bilap = 0.0;
    double int_fN = 0.0;
    double norm_bilap = 0.0;  // normalized by the flat twin or by the leading constant
    double norm_fN = 0.0;
};

struct ExpansionReport {
    GeometryKind kind = GeometryKind::EuclideanBall;
    int n = 0;
    double S = 0.0;
    double theta = 1.0;
    std::string normalization;
    std::string fit_model;        // "eps2" or "eps2log"
    std::vector<ExpansionRow> rows;
    double coeff_bilap_fit = 0.0;
    double coeff_bilap_closed = 0.0;
    double rel_dev_bilap = 0.0;
    double coeff_fN_fit = 0.0;
    double coeff_fN_closed = 0.0;
    double rel_dev_fN = 0.0;
    double lead_bilap = 0.0;
    double lead_fN = 0.0;
    double lead_ratio = 0.0;      // lead_fN / lead_bilap at the finest eps
    double residual_ratio = 0.0;  // n = 6: residual(eps2) / residual(eps2log)
    bool log_preferred = false;
    bool flagged = false;
    std::string note;
};

ExpansionReport expansion_check(const ProblemSpec& spec, const ExpansionOptions& opts);

struct ConditionResult {
    bool holds = false;
    double margin = 0.0;
};

ConditionResult condition_C(const Problem& problem);

struct GapOptions {
    double delta = 0.0;  // 0 selects R/4
    bool richardson = true;
};

struct GapResult {
    double eps = 0.0;
    double sup_J = 0.0;
    double sup_J_extrapolated = 0.0;  // Richardson with the m/2 grid
    double t_max = 0.0;
    double threshold = 0.0;
    double margin = 0.0;          // threshold - sup_J_extrapolated
    double error_estimate = 0.0;  // |sup_J(m) - sup_J(m/2)| / 3
    bool certified = false;       // margin > error_estimate
};

double energy_threshold(int n, double K0, double f_max);
GapResult energy_gap(const Problem& problem, double eps, const GapOptions& opts = {});
// Smallest eps energy_gap accepts; with Richardson the half grid has to resolve the bubble too.
double gap_resolution_limit(const Problem& problem, const GapOptions& opts = {});

struct SharpConditionResult {
    bool holds = false;
    double value = 0.0;
};

SharpConditionResult sharp_condition(const ProblemSpec& spec, double K_sigma, double A_sigma, double K_mu, double A_mu);

}  // namespace nehari
