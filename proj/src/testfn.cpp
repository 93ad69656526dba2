#include "nehari/testfn.hpp"

#include "nehari/errors.hpp"
#include "nehari/nehari.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <Eigen/QR>

#include <cmath>
#include <memory>
#include <sstream>

namespace nehari {

namespace {

void check_I(double p, double q) {
    if (!(p - q > 1.0) || !(q > -1.0) || !std::isfinite(p) || !std::isfinite(q)) {
        std::ostringstream msg;
        msg << "I_p^q diverges for p = " << p << ", q = " << q << " (need p - q > 1, q > -1)";
        throw DomainError(msg.str());
    }
}

double I_by(IEvaluation method, double p, double q) {
    switch (method) {
        case IEvaluation::GammaRatio:
            check_I(p, q);
            return std::exp(std::lgamma(q + 1.0) + std::lgamma(p - q - 1.0) - std::lgamma(p));
        case IEvaluation::Quadrature: return integral_I_quadrature(p, q);
        default: return integral_I(p, q);
    }
}

struct BubbleIntegrals {
    double bilap = 0.0;
    double crit = 0.0;
};

BubbleIntegrals bubble_integrals(const RadialGrid& grid, const SplineSpace& space, const BubbleParams& bp,
                                 const RadialProfile& f) {
    const int n = grid.geom.n;
    const double N = 2.0 * n / (n - 4.0);
    Eigen::VectorXd u(grid.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = bubble_value(bp, n, grid.nodes[i]);
    const Eigen::VectorXd c = space.coefficients(u);
    const Eigen::VectorXd lu = space.laplace() * c;
    const Eigen::VectorXd ug = space.value() * c;
    const auto& W = space.measure();
    const auto& x = space.points();
    BubbleIntegrals out;
    for (Eigen::Index i = 0; i < ug.size(); ++i) {
        out.bilap += W[i] * lu[i] * lu[i];
        out.crit += W[i] * f.value(x[i], n) * std::pow(std::abs(ug[i]), N);
    }
    return out;
}

struct FitResult {
    Eigen::VectorXd coeff;
    double residual = 0.0;
    bool ok = true;
};

// Least squares with column equilibration.
FitResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    FitResult fit;
    if (X.rows() < X.cols()) {
        fit.ok = false;
        fit.coeff = Eigen::VectorXd::Zero(X.cols());
        return fit;
    }
    Eigen::VectorXd scale = X.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale[j] == 0.0) scale[j] = 1.0;
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    fit.ok = qr.rank() == X.cols();
    fit.coeff = qr.solve(y).cwiseQuotient(scale);
    fit.residual = (X * fit.coeff - y).norm();
    return fit;
}

double relative_deviation(double fit, double exact) {
    return exact != 0.0 ? std::abs(fit - exact) / std::abs(exact) : std::abs(fit - exact);
}

}  // namespace

double integral_I(double p, double q) {
    check_I(p, q);
    return std::beta(q + 1.0, p - q - 1.0);
}

double integral_I_quadrature(double p, double q) {
    check_I(p, q);
    auto fn = [p, q](double t) {
        if (t == 0.0) return q == 0.0 ? 1.0 : 0.0;
        if (!std::isfinite(t)) return 0.0;
        return std::exp(q * std::log(t) - p * std::log1p(t));
    };
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    return near.integrate(fn, 0.0, 1.0) + far.integrate(fn, 1.0, std::numeric_limits<double>::infinity());
}

double cutoff_eta(double rho, double delta) {
    if (!(delta > 0.0)) throw DomainError("cutoff radius delta must be positive");
    if (rho <= delta) return 1.0;
    if (rho >= 2.0 * delta) return 0.0;
    const double x = (rho - delta) / delta;
    const double smooth = std::pow(x, 5) * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))));
    return 1.0 - smooth;
}

BubbleParams bubble_params(const Problem& problem, double eps, double delta) {
    const auto& geom = problem.spec().geom;
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("bubble width eps must be positive");
    BubbleParams bp;
    bp.eps = eps;
    bp.delta = delta > 0.0 ? delta : 0.25 * geom.R;
    if (!(2.0 * bp.delta <= geom.R)) throw DomainError("bubble support 2 delta must fit inside the domain radius");
    bp.theta = theta(problem);
    bp.f_max = problem.spec().f_max();
    return bp;
}

double bubble_value(const BubbleParams& bp, int n, double rho) {
    const double amp = std::pow((n - 4.0) * n * (double(n) * n - 4.0) * std::pow(bp.eps, 4) / bp.f_max, (n - 4.0) / 8.0);
    const double denom = std::pow(std::pow(rho * bp.theta, 2) + bp.eps * bp.eps, 0.5 * (n - 4.0));
    return amp * cutoff_eta(rho, bp.delta) / denom;
}

double smallest_resolvable_eps(const Problem& problem) {
    const auto& nodes = problem.grid().nodes;
    if (nodes.size() < 8) throw ResolutionError("grid has fewer than 8 nodes");
    return theta(problem) * nodes[7] * (1.0 + 1e-9);
}

Field build_bubble(const Problem& problem, double eps, double delta) {
    const auto bp = bubble_params(problem, eps, delta);
    const auto& nodes = problem.grid().nodes;
    const auto inside = (nodes.array() < eps / bp.theta).count();
    if (inside < 8) {
        std::ostringstream msg;
        msg << "bubble eps = " << eps << " has " << inside << " nodes inside rho < eps/theta (need 8)";
        throw ResolutionError(msg.str());
    }
    const int n = problem.spec().geom.n;
    return Field::sample(problem.grid_ptr(), [&](double r) { return bubble_value(bp, n, r); });
}

ConstantsAB constants_AB(int n, double r, double s, IEvaluation method) {
    return constants_AB(n, r, s, sobolev_constant_estimate(n), method);
}

ConstantsAB constants_AB(int n, double r, double s, double K0, IEvaluation method) {
    if (n < 5) throw DomainError("constants A, B need n >= 5");
    if (!(r > 1.0) || !(s > 1.0)) throw DomainError("constants A, B need r, s > 1");
    const double omega = sphere_area(n);
    const double er = (r - 1.0) / r;
    const double es = (s - 1.0) / s;
    const double kn = std::pow(K0, n / 4.0);
    ConstantsAB out;
    const double Ia = I_by(method, (n - 2.0) * r / (r - 1.0), (n - 2.0) / 2.0 + r / (r - 1.0));
    out.A = kn * std::pow(n - 4.0, n / 4.0 + 1.0) * std::pow(omega, er) / std::pow(2.0, er) *
            std::pow(n * (double(n) * n - 4.0), (n - 4.0) / 4.0) * std::pow(Ia, er);
    const double Ib = I_by(method, (n - 4.0) * s / (s - 1.0), n / 2.0);
    out.B = kn * std::pow((n - 4.0) * n * (double(n) * n - 4.0), (n - 4.0) / 4.0) * std::pow(omega / 2.0, es) *
            std::pow(Ib, es);
    return out;
}

TwoTermMax two_term_max(double alpha, int n) {
    if (!(alpha > 0.0)) throw DomainError("two-term model needs alpha > 0");
    const double N = 2.0 * n / (n - 4.0);
    TwoTermMax out;
    out.t = std::pow(alpha, 1.0 / (N - 2.0));
    out.value = 0.5 * alpha * out.t * out.t - std::pow(out.t, N) / N;
    return out;
}

ExpansionReport expansion_check(const ProblemSpec& spec, const ExpansionOptions& opts) {
    spec.validate();
    const int n = spec.geom.n;
    if (n < 6) throw DomainError("expansion formulas need n >= 6");
    if (opts.eps.size() < 3) throw ConfigurationError("expansion check needs at least 3 eps values");
    for (std::size_t k = 1; k < opts.eps.size(); ++k)
        if (!(opts.eps[k] < opts.eps[k - 1])) throw ConfigurationError("eps list must be strictly decreasing");

    const auto grid = build_grid(spec.geom, opts.m, opts.grading);
    const Problem problem(spec, grid);

    ExpansionReport rep;
    rep.kind = spec.geom.kind;
    rep.n = n;
    rep.S = spec.geom.scalar_curvature();
    rep.theta = theta(problem);
    const double f0 = spec.f_max();
    const double K0 = sobolev_constant_estimate(n);
    const double lead = std::pow(K0, -n / 4.0) * std::pow(f0, -(n - 4.0) / 4.0);
    const bool curved = spec.geom.kind != GeometryKind::EuclideanBall;

    // flat twin: same grid rule, same bubble, f frozen at f_max
    std::shared_ptr<const RadialGrid> twin_grid;
    std::unique_ptr<SplineSpace> twin_space;
    if (curved) {
        twin_grid = build_grid(ModelGeometry::euclidean_ball(n, spec.geom.R), opts.m, opts.grading);
        twin_space = std::make_unique<SplineSpace>(*twin_grid);
        rep.normalization = "flat-twin";
    } else {
        rep.normalization = "leading-constant";
    }

    for (double eps : opts.eps) {
        (void)build_bubble(problem, eps, opts.delta);  // resolution check
        const auto bp = bubble_params(problem, eps, opts.delta);
        const auto ints = bubble_integrals(*grid, problem.space(), bp, spec.f);
        ExpansionRow row;
        row.eps = eps;
        row.int_bilap = ints.bilap;
        row.int_fN = ints.crit;
        if (curved) {
            const auto twin = bubble_integrals(*twin_grid, *twin_space, bp, RadialProfile{f0, 0.0});
            row.norm_bilap = ints.bilap / twin.bilap;
            row.norm_fN = ints.crit / twin.crit;
        } else {
            // the bilaplacian energy scales as theta^{-(n-4)}, the critical term as theta^{-n}
            row.norm_bilap = ints.bilap * std::pow(rep.theta, n - 4.0) / lead;
            row.norm_fN = ints.crit * std::pow(rep.theta, double(n)) / lead;
        }
        rep.rows.push_back(row);
    }

    const double lap_f = spec.f.laplacian_at_center();
    rep.coeff_fN_closed = -(lap_f / (2.0 * (n - 2.0) * f0) + rep.S / (6.0 * (n - 2.0)));
    const Eigen::Index k = Eigen::Index(rep.rows.size());
    Eigen::VectorXd e(k), yb(k), yf(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        e[i] = rep.rows[i].eps;
        yb[i] = rep.rows[i].norm_bilap;
        yf[i] = rep.rows[i].norm_fN;
    }

    if (n > 6) {
        rep.fit_model = "eps2";
        rep.coeff_bilap_closed = -(double(n) * n + 4.0 * n - 20.0) * rep.S / (6.0 * (double(n) * n - 4.0) * (n - 6.0));
        std::vector<double> powers = {0.0, 2.0, 4.0, 6.0};
        if (n % 2 == 1) powers.push_back(n - 4.0);
        Eigen::MatrixXd X(k, Eigen::Index(powers.size()));
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = std::pow(e[i], powers[j]);
        const auto fb = least_squares(X, yb);
        const auto ff = least_squares(X, yf);
        rep.flagged = !fb.ok || !ff.ok;
        rep.lead_bilap = fb.coeff[0];
        rep.lead_fN = ff.coeff[0];
        rep.coeff_bilap_fit = fb.coeff[1];
        rep.coeff_fN_fit = ff.coeff[1];
    } else {
        rep.fit_model = "eps2log";
        rep.coeff_bilap_closed = -2.0 * (n - 4.0) * rep.S / (double(n) * n * (double(n) * n - 4.0) * integral_I(n, n / 2.0 - 1.0));
        const Eigen::VectorXd x2 = e.array().square().matrix();
        const Eigen::VectorXd xl = (e.array().square() * (1.0 / e.array().square()).log()).matrix();
        if (curved) {
            // leading constant pinned to 1 by the twin normalization; both models get two
            // parameters and rows are scaled by eps^-2
            const Eigen::VectorXd z = ((yb.array() - 1.0) / e.array().square()).matrix();
            const Eigen::VectorXd lg = (1.0 / e.array().square()).log().matrix();
            Eigen::MatrixXd Xp(k, 2), Xl(k, 2);
            Xp.col(0).setOnes();
            Xp.col(1) = x2;
            Xl.col(0) = lg;
            Xl.col(1).setOnes();
            const auto fp = least_squares(Xp, z);
            const auto fl = least_squares(Xl, z);
            rep.flagged = !fp.ok || !fl.ok;
            rep.residual_ratio = fl.residual > 0.0 ? fp.residual / fl.residual : std::numeric_limits<double>::infinity();
            rep.log_preferred = rep.residual_ratio > opts.model_ratio;
            rep.coeff_bilap_fit = fl.coeff[0];
            rep.lead_bilap = 1.0;
            const Eigen::VectorXd zf = ((yf.array() - 1.0) / e.array().square()).matrix();
            rep.coeff_fN_fit = least_squares(Xp, zf).coeff[0];
            rep.lead_fN = 1.0;
        } else {
            Eigen::MatrixXd X(k, 3);
            X.col(0).setOnes();
            X.col(1) = x2;
            X.col(2) = xl;
            const auto fb = least_squares(X, yb);
            Eigen::MatrixXd Xf(k, 2);
            Xf.col(0).setOnes();
            Xf.col(1) = x2;
            const auto ff = least_squares(Xf, yf);
            rep.flagged = !fb.ok || !ff.ok;
            rep.lead_bilap = fb.coeff[0];
            rep.coeff_bilap_fit = fb.coeff[2];
            rep.lead_fN = ff.coeff[0];
            rep.coeff_fN_fit = ff.coeff[1];
        }
    }
    rep.lead_ratio = rep.lead_fN / rep.lead_bilap;
    rep.rel_dev_bilap = relative_deviation(rep.coeff_bilap_fit, rep.coeff_bilap_closed);
    rep.rel_dev_fN = relative_deviation(rep.coeff_fN_fit, rep.coeff_fN_closed);
    if (rep.flagged) rep.note = "rank-deficient fit";
    return rep;
}

ConditionResult condition_C(const Problem& problem) {
    const auto& spec = problem.spec();
    const int n = spec.geom.n;
    if (n < 6) throw DomainError("condition (C) is stated only for n >= 6");
    const double S = spec.geom.scalar_curvature();
    ConditionResult res;
    if (n == 6) {
        res.margin = S;
        res.holds = S > 0.0;
        return res;
    }
    const double th = theta(problem);
    const double nn = double(n);
    const double factor = (nn - 1.0) * nn * (nn * nn + 4.0 * nn - 20.0) / ((nn * nn - 4.0) * (nn - 4.0) * (nn - 6.0));
    const double rhs = (factor * std::pow(th, -4.0) - 1.0) / 3.0 * S;
    const double lhs = spec.f.laplacian_at_center() / spec.f_max();
    res.margin = rhs - lhs;
    res.holds = lhs < rhs;
    return res;
}

double energy_threshold(int n, double K0, double f_max) {
    return 2.0 / n * std::pow(K0, -n / 4.0) * std::pow(f_max, -(n - 4.0) / 4.0);
}

namespace {

struct SupResult {
    double value = 0.0;
    double t = 0.0;
};

SupResult sup_on_ray(const Problem& problem, const Field& u) {
    const auto& spec = problem.spec();
    const auto p = parts(problem, u.values());
    const double N = spec.critical_exponent();
    if (!(p.quad > 0.0) || !(p.crit > 0.0)) throw NumericalError("bubble has a nonpositive energy term");
    SupResult out;
    out.t = std::pow(p.quad / p.crit, 1.0 / (N - 2.0));
    out.value = (0.5 - 1.0 / N) * p.quad * out.t * out.t;
    if (spec.lambda == 0.0) return out;
    auto negJ = [&](double t) {
        return -(0.5 * t * t * p.quad - spec.lambda / spec.q * std::pow(t, spec.q) * p.lq - std::pow(t, N) / N * p.crit);
    };
    const auto [t, v] = boost::math::tools::brent_find_minima(negJ, 0.5 * out.t, 1.5 * out.t, 52);
    out.t = t;
    out.value = -v;
    return out;
}

}  // namespace

GapResult energy_gap(const Problem& problem, double eps, const GapOptions& opts) {
    const auto& spec = problem.spec();
    GapResult res;
    res.eps = eps;
    const auto fine = sup_on_ray(problem, build_bubble(problem, eps, opts.delta));
    res.sup_J = fine.value;
    res.t_max = fine.t;
    res.threshold = energy_threshold(spec.geom.n, sobolev_constant_estimate(spec.geom.n), spec.f_max());
    res.sup_J_extrapolated = res.sup_J;
    if (opts.richardson) {
        const auto& g = problem.grid();
        const auto coarse_grid = build_grid(g.geom, int(g.size() / 2), g.grading);
        const Problem coarse(spec, coarse_grid);
        const auto c = sup_on_ray(coarse, build_bubble(coarse, eps, opts.delta));
        res.error_estimate = std::abs(res.sup_J - c.value) / 3.0;
        res.sup_J_extrapolated = res.sup_J + (res.sup_J - c.value) / 3.0;
    }
    res.margin = res.threshold - res.sup_J_extrapolated;
    res.certified = res.margin > res.error_estimate && res.margin > 0.0;
    return res;
}

double gap_resolution_limit(const Problem& problem, const GapOptions& opts) {
    if (!opts.richardson) return smallest_resolvable_eps(problem);
    const auto& g = problem.grid();
    return smallest_resolvable_eps(Problem(problem.spec(), build_grid(g.geom, int(g.size() / 2), g.grading)));
}

SharpConditionResult sharp_condition(const ProblemSpec& spec, double K_sigma, double A_sigma, double K_mu, double A_mu) {
    const int n = spec.geom.n;
    const double R = spec.geom.R;
    const double a_minus = std::min(0.0, spec.a.min_on(R, n));
    const double b_minus = std::min(0.0, spec.b.min_on(R, n));
    SharpConditionResult res;
    res.value = 1.0 + a_minus * std::max(K_sigma, A_sigma) + b_minus * std::max(K_mu, A_mu);
    res.holds = res.value > 0.0;
    return res;
}

}  // namespace nehari
