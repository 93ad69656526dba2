#include "nehari/nehari.hpp"

#include "nehari/errors.hpp"
#include "nehari/testfn.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace nehari {

namespace {

double solve_bracketed(const std::function<double(double)>& g, double lo, double hi) {
    boost::uintmax_t max_iter = 300;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, max_iter);
    return 0.5 * (a + b);
}

}  // namespace

double fibering_E(double t, double quad, double crit, double q, double N) {
    return std::pow(t, 2.0 - q) * quad - std::pow(t, N - q) * crit;
}

double fibering_E_prime(double t, double quad, double crit, double q, double N) {
    return (2.0 - q) * std::pow(t, 1.0 - q) * quad - (N - q) * std::pow(t, N - q - 1.0) * crit;
}

FiberingResult fibering_scalar(double quad, double level, double crit, double q, double N) {
    if (!(crit > 0.0) || !std::isfinite(crit)) throw DomainError("fibering needs int f|u|^N > 0");
    if (!(quad > 0.0) || !std::isfinite(quad)) throw DomainError("fibering needs a positive quadratic form");
    if (!(level >= 0.0) || !std::isfinite(level)) throw DomainError("fibering level lambda |u|_q^q must be >= 0");

    FiberingResult res;
    res.level = level;
    res.t0 = std::pow((2.0 - q) / (N - q), 1.0 / (N - 2.0)) * std::pow(quad / crit, 1.0 / (N - 2.0));
    res.E_t0 = fibering_E(res.t0, quad, crit, q, N);
    // tangency E(t0) == level is declared infeasible
    res.feasible = level < res.E_t0;
    if (!res.feasible) return res;

    auto g = [&](double t) { return fibering_E(t, quad, crit, q, N) - level; };
    if (level == 0.0) {
        res.t_minus = std::pow(quad / crit, 1.0 / (N - 2.0));
        return res;
    }
    res.t_plus = solve_bracketed(g, 0.0, res.t0);
    double hi = 2.0 * res.t0;
    while (g(hi) > 0.0) hi *= 2.0;
    res.t_minus = solve_bracketed(g, res.t0, hi);
    return res;
}

FiberingResult fibering(const Problem& problem, const Field& u) {
    if (u.grid_ptr() != problem.grid_ptr()) throw ShapeError("field does not live on the problem grid");
    if (u.values().isZero(0.0)) throw DomainError("fibering of the zero field");
    const auto p = parts(problem, u.values());
    const auto& spec = problem.spec();
    return fibering_scalar(p.quad, spec.lambda * p.lq, p.crit, spec.q, spec.critical_exponent());
}

std::string to_string(Branch b) { return b == Branch::Nplus ? "Nplus" : "Nminus"; }

std::string to_string(NehariTag t) {
    switch (t) {
        case NehariTag::Nplus: return "Nplus";
        case NehariTag::Nminus: return "Nminus";
        default: return "Nzero-band";
    }
}

NehariClass classify(const Problem& problem, const Field& u, double tol) {
    if (u.grid_ptr() != problem.grid_ptr()) throw ShapeError("field does not live on the problem grid");
    const auto p = parts(problem, u.values());
    const auto& spec = problem.spec();
    const double scale = std::abs(p.quad);
    const double phi = nehari_residual_from(spec, p);
    if (!(std::abs(phi) <= tol * scale)) {
        std::ostringstream msg;
        msg << "field is not on the Nehari manifold: |Phi| = " << std::abs(phi) << " > " << tol << " * " << scale;
        throw ContractError(msg.str());
    }
    NehariClass c;
    c.second_form = nehari_second_from(spec, p);
    c.tol = tol;
    if (std::abs(c.second_form) <= tol * scale) c.tag = NehariTag::Nzero;
    else c.tag = c.second_form > 0.0 ? NehariTag::Nplus : NehariTag::Nminus;
    return c;
}

double projection_factor(const Problem& problem, const Eigen::VectorXd& u, Branch branch) {
    const auto& spec = problem.spec();
    if (!u.allFinite()) throw ProjectionError("non-finite field", std::numeric_limits<double>::quiet_NaN());
    const auto p = parts(problem, u);
    if (!(p.quad > 0.0) || !(p.crit > 0.0) || !std::isfinite(p.quad) || !std::isfinite(p.crit))
        throw ProjectionError("fibering map undefined for this field", std::numeric_limits<double>::quiet_NaN());
    if (branch == Branch::Nplus && spec.lambda == 0.0)
        throw ProjectionError("Nplus needs the concave term (lambda > 0)", 0.0);
    const auto fib = fibering_scalar(p.quad, spec.lambda * p.lq, p.crit, spec.q, spec.critical_exponent());
    if (!fib.feasible) {
        std::ostringstream msg;
        msg << "infeasible fibering: E(t0) = " << fib.E_t0 << " <= lambda |u|_q^q = " << fib.level;
        throw ProjectionError(msg.str(), fib.margin());
    }
    return branch == Branch::Nplus ? *fib.t_plus : *fib.t_minus;
}

Field project(const Problem& problem, const Field& u, Branch branch) {
    if (u.grid_ptr() != problem.grid_ptr()) throw ShapeError("field does not live on the problem grid");
    return u * projection_factor(problem, u.values(), branch);
}

Field initial_guess(const Problem& problem, Branch branch, const SolverOptions& opts) {
    const double R = problem.grid().geom.R;
    if (branch == Branch::Nplus) {
        return Field::sample(problem.grid_ptr(), [R](double r) { return std::pow(1.0 - r * r / (R * R), 2); });
    }
    const double delta = opts.init_delta > 0.0 ? opts.init_delta : 0.25 * R;
    if (opts.init_eps > 0.0) return build_bubble(problem, opts.init_eps, delta);

    // widest-to-narrowest scan; keep the lowest J on the Nminus ray
    const double eps_min = smallest_resolvable_eps(problem);
    const double eps_max = 0.3 * R;
    const int count = 40;
    std::optional<Field> best;
    double best_J = std::numeric_limits<double>::infinity();
    for (int k = 0; k < count && eps_max > eps_min; ++k) {
        const double eps = eps_max * std::pow(eps_min / eps_max, double(k) / (count - 1));
        const Field bubble = build_bubble(problem, eps, delta);
        try {
            const Field v = project(problem, bubble, Branch::Nminus);
            const double J = energy(problem, v);
            if (J < best_J) {
                best_J = J;
                best = bubble;
            }
        } catch (const ProjectionError&) {
        }
    }
    if (!best) return build_bubble(problem, eps_max, delta);
    return *best;
}

SolveReport minimize_branch(const Problem& problem, Branch branch, const Field& u_init, const SolverOptions& opts,
                            std::optional<double> lambda_small) {
    if (u_init.grid_ptr() != problem.grid_ptr()) throw ShapeError("initial field does not live on the problem grid");
    const auto& spec = problem.spec();

    SolveReport rep;
    rep.branch = branch;
    rep.small_lambda = lambda_small ? spec.lambda < *lambda_small : false;

    double t = projection_factor(problem, u_init.values(), branch);
    Eigen::VectorXd u = t * u_init.values();
    Parts p = parts(problem, u);
    double J = energy_from(spec, p);

    Eigen::VectorXd u_prev, g_prev;
    double alpha = opts.initial_step;
    double last_step = 0.0;
    rep.status = "max-iter";
    int it = 0;
    for (;; ++it) {
        const Eigen::VectorXd g = problem.riesz(energy_dual(problem, u));
        const double gnorm = problem.norm_h(g);
        const double res = gnorm / problem.norm_h(u);
        rep.grad_residual = res;
        if (opts.keep_trace)
            rep.step_trace.push_back({it, t, J, std::abs(nehari_residual_from(spec, p)) / std::abs(p.quad), res, last_step});
        if (res < opts.tol) {
            rep.converged = true;
            rep.status = "converged";
            break;
        }
        if (it >= opts.max_iter) break;

        if (g_prev.size() == u.size()) {
            const Eigen::VectorXd s = u - u_prev;
            const Eigen::VectorXd y = g - g_prev;
            const double sy = problem.inner_h(s, y);
            if (sy > 0.0) alpha = problem.inner_h(s, s) / sy;
        }
        u_prev = u;
        g_prev = g;

        bool accepted = false;
        while (alpha >= opts.min_step) {
            const Eigen::VectorXd trial = u - alpha * g;
            try {
                const double tt = projection_factor(problem, trial, branch);
                const Eigen::VectorXd v = tt * trial;
                const Parts pv = parts(problem, v);
                const double Jv = energy_from(spec, pv);
                // J is a difference of terms of size `scale`; allow for their rounding
                const double scale = 0.5 * pv.quad + spec.lambda / spec.q * pv.lq + pv.crit / spec.critical_exponent();
                const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;
                if (std::isfinite(Jv) && Jv <= J - opts.armijo * alpha * gnorm * gnorm + slack) {
                    u = v;
                    p = pv;
                    J = Jv;
                    t = tt;
                    accepted = true;
                    break;
                }
            } catch (const ProjectionError&) {
            }
            alpha *= opts.shrink;
        }
        last_step = alpha;
        if (!accepted) {
            rep.status = "stalled";
            break;
        }
    }

    rep.iterations = it;
    rep.u = u;
    rep.J_value = J;
    rep.phi_residual = std::abs(nehari_residual_from(spec, p)) / std::abs(p.quad);
    rep.sign_ok = branch == Branch::Nplus ? J < 0.0 : J > 0.0;
    return rep;
}

BothReport solve_both(const Problem& problem, const SolverOptions& opts, std::optional<double> lambda_small) {
    BothReport both;
    both.plus = minimize_branch(problem, Branch::Nplus, initial_guess(problem, Branch::Nplus, opts), opts, lambda_small);
    both.minus = minimize_branch(problem, Branch::Nminus, initial_guess(problem, Branch::Nminus, opts), opts, lambda_small);
    const Eigen::VectorXd diff = both.plus.u - both.minus.u;
    both.distance_h = problem.norm_h(diff);
    both.collinearity = std::abs(problem.inner_h(both.plus.u, both.minus.u)) /
                        (problem.norm_h(both.plus.u) * problem.norm_h(both.minus.u));
    both.distinct = both.distance_h > opts.distinct_tol && both.collinearity < 1.0 - 1e-6;
    both.ordering = both.plus.J_value < 0.0 && 0.0 < both.minus.J_value;
    both.converged = both.plus.converged && both.minus.converged;
    return both;
}

Field random_field(const Problem& problem, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kModes = 6;
    double c[kModes];
    for (int k = 0; k < kModes; ++k) c[k] = normal(rng) / (1.0 + k);
    const double R = problem.grid().geom.R;
    const double pi = std::acos(-1.0);
    return Field::sample(problem.grid_ptr(), [&](double r) {
        double sum = 0.0;
        for (int k = 0; k < kModes; ++k) sum += c[k] * std::cos(k * pi * r / R);
        return std::pow(1.0 - r * r / (R * R), 2) * sum;
    });
}

NzeroProbe nzero_probe(const Problem& problem, int count, std::uint64_t seed, double tol) {
    std::mt19937_64 rng(seed);
    NzeroProbe out;
    out.min_rel_second = std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
        const Field u = random_field(problem, rng);
        ++out.probes;
        for (Branch b : {Branch::Nplus, Branch::Nminus}) {
            try {
                const Field v = project(problem, u, b);
                const auto c = classify(problem, v, tol);
                const double rel = std::abs(c.second_form) / std::abs(quad_form(problem, v));
                out.min_rel_second = std::min(out.min_rel_second, rel);
                if (c.tag == NehariTag::Nzero) ++out.in_band;
            } catch (const ProjectionError&) {
                ++out.infeasible;
            }
        }
    }
    return out;
}

}  // namespace nehari
