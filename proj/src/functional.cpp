#include "nehari/functional.hpp"

#include "nehari/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace nehari {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using Ldlt = Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;

double signed_pow(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p), x);
}

template <class Op>
ColMatrix gram(const Op& op, const Eigen::VectorXd& weights) {
    ColMatrix A = op;
    ColMatrix At = A.transpose();
    return (At * weights.asDiagonal() * A).pruned();
}

bool same_geometry(const ModelGeometry& a, const ModelGeometry& b) {
    return a.kind == b.kind && a.n == b.n && a.R == b.R;
}

}  // namespace

void ProblemSpec::validate() const {
    geom.validate();
    const int n = geom.n;
    auto fail = [](const std::string& msg) { throw ConfigurationError(msg); };
    if (!(q > 1.0 && q < 2.0)) fail("q must lie in (1, 2)");
    if (sharp) {
        if (!(sigma > 0.0 && sigma <= 2.0)) fail("sigma must lie in (0, 2]");
        if (!(mu > 0.0 && mu <= 4.0)) fail("mu must lie in (0, 4]");
    } else {
        if (!(sigma > 0.0 && sigma < 2.0)) fail("sigma must lie in (0, 2) outside sharp mode");
        if (!(mu > 0.0 && mu < 4.0)) fail("mu must lie in (0, 4) outside sharp mode");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and >= 0");
    if (!(f.center > 0.0) || !(f.min_on(geom.R, n) > 0.0)) fail("f must be positive on the domain");
    if (f.laplacian_ratio > 0.0) fail("f must attain its maximum at the center (laplacian_ratio <= 0)");
    for (double c : {a.center, a.laplacian_ratio, b.center, b.laplacian_ratio, f.laplacian_ratio})
        if (!std::isfinite(c)) fail("coefficient profiles must be finite");
    if (!(r >= 1.0) || !(s >= 1.0)) fail("Lebesgue exponents r, s must be >= 1");
    if (!a.is_zero() && !(sigma * r < n)) fail("|a rho^-sigma|_r diverges: need sigma * r < n");
    if (!b.is_zero() && !(mu * s < n)) fail("|b rho^-mu|_s diverges: need mu * s < n");
    if (!(sobolev_eps >= 0.0)) fail("sobolev_eps must be >= 0");
}

struct Problem::Data {
    SplineSpace space;
    Eigen::VectorXd w, w_grad, w_zero, w_crit;
    Eigen::VectorXd h_scale;
    std::shared_ptr<Ldlt> h_factor;

    explicit Data(const RadialGrid& grid) : space(grid) {}

    struct Eval {
        Eigen::VectorXd lap, slope, value;
    };
    Eval eval(const Eigen::VectorXd& c) const {
        return {space.laplace() * c, space.slope() * c, space.value() * c};
    }
    double quad(const Eval& e) const {
        return (w.array() * e.lap.array().square()).sum() - (w_grad.array() * e.slope.array().square()).sum() +
               (w_zero.array() * e.value.array().square()).sum();
    }
    double h2(const Eval& e) const {
        return (w.array() * (e.lap.array().square() + e.slope.array().square() + e.value.array().square())).sum();
    }
};

Problem::Problem(ProblemSpec spec, GridPtr grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
    spec_.validate();
    if (!grid_) throw ConfigurationError("problem needs a grid");
    if (!same_geometry(spec_.geom, grid_->geom)) throw ConfigurationError("grid geometry differs from spec geometry");

    auto data = std::make_shared<Data>(*grid_);
    const auto& sp = data->space;
    const int n = spec_.geom.n;
    const auto& x = sp.points();
    const Eigen::Index nq = sp.quadrature_size();
    data->w = sp.measure();
    data->w_grad.resize(nq);
    data->w_zero.resize(nq);
    data->w_crit.resize(nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
        const double W = data->w[i];
        data->w_grad[i] = spec_.a.is_zero() ? 0.0 : W * spec_.a.value(x[i], n) * std::pow(x[i], -spec_.sigma);
        data->w_zero[i] = spec_.b.is_zero() ? 0.0 : W * spec_.b.value(x[i], n) * std::pow(x[i], -spec_.mu);
        data->w_crit[i] = W * spec_.f.value(x[i], n);
    }

    data_ = data;
    const ColMatrix H = h_matrix();
    data->h_scale = H.diagonal().cwiseSqrt().cwiseInverse();
    ColMatrix Hs = data->h_scale.asDiagonal() * H * data->h_scale.asDiagonal();
    data->h_factor = std::make_shared<Ldlt>(Hs);
    if (data->h_factor->info() != Eigen::Success) throw NumericalError("factorization of the H^2_2 Gram matrix failed");
}

const SplineSpace& Problem::space() const { return data_->space; }
const Eigen::VectorXd& Problem::w() const { return data_->w; }
const Eigen::VectorXd& Problem::w_grad() const { return data_->w_grad; }
const Eigen::VectorXd& Problem::w_zero() const { return data_->w_zero; }
const Eigen::VectorXd& Problem::w_crit() const { return data_->w_crit; }

Problem Problem::with_lambda(double lambda) const {
    Problem copy = *this;
    copy.spec_.lambda = lambda;
    copy.spec_.validate();
    return copy;
}

double Problem::inner_h(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const auto& d = *data_;
    const auto ex = d.eval(d.space.coefficients(x));
    const auto ey = d.eval(d.space.coefficients(y));
    return (d.w.array() * (ex.lap.array() * ey.lap.array() + ex.slope.array() * ey.slope.array() +
                           ex.value.array() * ey.value.array()))
        .sum();
}

double Problem::norm_h(const Eigen::VectorXd& x) const {
    const auto& d = *data_;
    return std::sqrt(d.h2(d.eval(d.space.coefficients(x))));
}

Eigen::VectorXd Problem::riesz(const Eigen::VectorXd& dual) const {
    if (dual.size() != grid_->size()) throw ShapeError("dual vector length does not match grid");
    const auto& sp = data_->space;
    const auto& sc = data_->h_scale;
    Eigen::VectorXd rhs = sc.cwiseProduct(sp.collocation().transpose() * dual);
    Eigen::VectorXd y = data_->h_factor->solve(rhs);
    if (data_->h_factor->info() != Eigen::Success || !y.allFinite()) {
        std::ostringstream msg;
        msg << "Riesz solve failed (|dual| = " << dual.norm() << ", m = " << dual.size() << ")";
        throw NumericalError(msg.str());
    }
    return sp.nodal(sc.cwiseProduct(y));
}

Eigen::SparseMatrix<double> Problem::quad_matrix() const {
    const auto& sp = data_->space;
    ColMatrix Q = gram(sp.laplace(), w()) - gram(sp.slope(), w_grad()) + gram(sp.value(), w_zero());
    return Q;
}

Eigen::SparseMatrix<double> Problem::h_matrix() const {
    const auto& sp = data_->space;
    ColMatrix H = gram(sp.laplace(), w()) + gram(sp.slope(), w()) + gram(sp.value(), w());
    return H;
}

Field make_field(const Problem& problem, Eigen::VectorXd values) {
    return Field(problem.grid_ptr(), std::move(values));
}

Parts parts(const Problem& problem, const Eigen::VectorXd& u) {
    if (u.size() != problem.grid().size()) throw ShapeError("field length does not match problem grid");
    const auto& sp = problem.space();
    const Eigen::VectorXd c = sp.coefficients(u);
    const Eigen::VectorXd lu = sp.laplace() * c;
    const Eigen::VectorXd du = sp.slope() * c;
    const Eigen::VectorXd ug = sp.value() * c;
    const auto& W = problem.w();
    const double N = problem.spec().critical_exponent();
    const double q = problem.spec().q;
    Parts p;
    p.quad = (W.array() * lu.array().square()).sum() - (problem.w_grad().array() * du.array().square()).sum() +
             (problem.w_zero().array() * ug.array().square()).sum();
    const Eigen::ArrayXd au = ug.array().abs();
    p.lq = (W.array() * au.pow(q)).sum();
    p.crit = (problem.w_crit().array() * au.pow(N)).sum();
    return p;
}

double energy_from(const ProblemSpec& spec, const Parts& p) {
    const double N = spec.critical_exponent();
    return 0.5 * p.quad - spec.lambda / spec.q * p.lq - p.crit / N;
}

double nehari_residual_from(const ProblemSpec& spec, const Parts& p) {
    return p.quad - spec.lambda * p.lq - p.crit;
}

double nehari_second_from(const ProblemSpec& spec, const Parts& p) {
    const double N = spec.critical_exponent();
    return 2.0 * p.quad - spec.lambda * spec.q * p.lq - N * p.crit;
}

namespace {
const Eigen::VectorXd& checked(const Problem& problem, const Field& u) {
    if (u.grid_ptr() != problem.grid_ptr()) throw ShapeError("field does not live on the problem grid");
    return u.values();
}
}  // namespace

double quad_form(const Problem& problem, const Field& u) { return parts(problem, checked(problem, u)).quad; }

double energy(const Problem& problem, const Field& u) {
    return energy_from(problem.spec(), parts(problem, checked(problem, u)));
}

double nehari_residual(const Problem& problem, const Field& u) {
    return nehari_residual_from(problem.spec(), parts(problem, checked(problem, u)));
}

double nehari_second(const Problem& problem, const Field& u) {
    return nehari_second_from(problem.spec(), parts(problem, checked(problem, u)));
}

Eigen::VectorXd energy_dual(const Problem& problem, const Eigen::VectorXd& u) {
    if (u.size() != problem.grid().size()) throw ShapeError("field length does not match problem grid");
    const auto& sp = problem.space();
    const auto& W = problem.w();
    const auto& spec = problem.spec();
    const double N = spec.critical_exponent();
    const Eigen::VectorXd c = sp.coefficients(u);
    const Eigen::VectorXd lu = sp.laplace() * c;
    const Eigen::VectorXd du = sp.slope() * c;
    Eigen::VectorXd ug = sp.value() * c;
    Eigen::VectorXd pointwise = problem.w_zero().cwiseProduct(ug);
    for (Eigen::Index i = 0; i < ug.size(); ++i) {
        pointwise[i] -= spec.lambda * W[i] * signed_pow(ug[i], spec.q - 1.0);
        pointwise[i] -= problem.w_crit()[i] * signed_pow(ug[i], N - 1.0);
    }
    Eigen::VectorXd dual = sp.laplace().transpose() * W.cwiseProduct(lu);
    dual -= sp.slope().transpose() * problem.w_grad().cwiseProduct(du);
    dual += sp.value().transpose() * pointwise;
    return sp.pullback(dual);
}

Field grad_energy(const Problem& problem, const Field& u) {
    const auto& v = checked(problem, u);
    return make_field(problem, problem.riesz(energy_dual(problem, v)));
}

CoercivityResult estimate_coercivity(const Problem& problem) {
    const auto& sp = problem.space();
    const ColMatrix H = problem.h_matrix();
    const Eigen::VectorXd sc = H.diagonal().cwiseSqrt().cwiseInverse();
    const ColMatrix Hs = sc.asDiagonal() * H * sc.asDiagonal();
    const ColMatrix Qs = sc.asDiagonal() * problem.quad_matrix() * sc.asDiagonal();

    // Sylvester inertia: negatives of D in LDL^T(Q - t H) count eigenvalues below t.
    auto count_below = [&](double t) {
        Ldlt ldlt(ColMatrix(Qs - t * Hs));
        if (ldlt.info() != Eigen::Success) return -1;
        return int((ldlt.vectorD().array() < 0.0).count());
    };
    // sums of squares; x^T Q x loses ~1e-7 to cancellation on fine grids
    auto rayleigh = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd u = sp.nodal(sc.cwiseProduct(x));
        const double h = problem.norm_h(u);
        return parts(problem, u).quad / (h * h);
    };

    CoercivityResult res;
    const auto& rho = problem.grid().nodes;
    const double R = problem.grid().geom.R;
    Eigen::VectorXd u0(rho.size());
    for (Eigen::Index i = 0; i < u0.size(); ++i) u0[i] = std::pow(1.0 - rho[i] * rho[i] / (R * R), 2);
    Eigen::VectorXd x = sp.coefficients(u0).cwiseQuotient(sc);
    double hi = rayleigh(x);
    double width = std::max(1.0, std::abs(hi));
    int c = count_below(hi);
    while (c <= 0) {
        hi += 1e-3 * width;
        c = count_below(hi);
    }
    double lo = hi - width;
    while (count_below(lo) != 0) {
        width *= 2.0;
        lo = hi - width;
        if (width > 1e12) throw NumericalError("coercivity bisection failed to bracket the spectrum");
    }
    while (hi - lo > 1e-11 * std::max(1.0, std::abs(hi)) && res.bisection_steps < 200) {
        const double mid = 0.5 * (lo + hi);
        const int k = count_below(mid);
        if (k == 0) lo = mid;
        else hi = mid;  // singular shifts land here too and only shrink the bracket
        ++res.bisection_steps;
    }

    const double shift = lo - 1e-9 * std::max(1.0, std::abs(lo));
    Ldlt solver(ColMatrix(Qs - shift * Hs));
    if (solver.info() != Eigen::Success) throw NumericalError("shifted factorization failed in coercivity estimate");
    double lam = rayleigh(x);
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd y = solver.solve(Hs * x);
        x = y / std::sqrt(y.dot(Hs * y));
        const double next = rayleigh(x);
        ++res.inverse_iterations;
        const bool done = std::abs(next - lam) <= 1e-11 * std::max(1.0, std::abs(next));
        lam = next;
        if (done) break;
    }
    res.lambda_min = lam;
    res.coercive = lam > 0.0;
    res.mode = sp.nodal(sc.cwiseProduct(x));
    return res;
}

double sobolev_constant_estimate(int n) {
    if (n < 5) throw DomainError("Sobolev constant K(n,2) needs n >= 5");
    const double k = 0.5 * (n - 4);
    const double N = 2.0 * n / (n - 4.0);
    boost::math::quadrature::exp_sinh<double> integrator;
    // log-space evaluation keeps the tails finite at huge r
    auto crit = [&](double r) {
        if (r <= 0.0) return 0.0;
        return std::exp((n - 1.0) * std::log(r) - n * std::log1p(r * r));
    };
    auto bilap = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double s = 1.0 + r * r;
        const double bracket = s * n - 2.0 * (k + 1.0) * r * r;
        const double mag = std::exp(std::log(2.0 * k) - (k + 2.0) * std::log1p(r * r) + 0.5 * (n - 1.0) * std::log(r));
        return std::pow(mag * bracket, 2);
    };
    const double omega = sphere_area(n);
    const double i_crit = omega * integrator.integrate(crit, 0.0, std::numeric_limits<double>::infinity());
    const double i_bilap = omega * integrator.integrate(bilap, 0.0, std::numeric_limits<double>::infinity());
    return std::pow(i_crit, 2.0 / N) / i_bilap;
}

namespace {

struct Probe {
    std::string name;
    std::function<double(double)> u, du, d2u;
};

std::vector<Probe> probe_family(const ModelGeometry& geom) {
    std::vector<Probe> probes;
    const double R = geom.R;
    probes.push_back({"constant", [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }});
    for (int k = 1; k <= 6; ++k) {
        auto base = [R](double r) { return 1.0 - r * r / (R * R); };
        probes.push_back({"polynomial(1-r^2/R^2)^" + std::to_string(k),
                          [=](double r) { return std::pow(base(r), k); },
                          [=](double r) { return -2.0 * k * r / (R * R) * std::pow(base(r), k - 1); },
                          [=](double r) {
                              const double d = 2.0 * r / (R * R);
                              const double t2 = k >= 2 ? k * (k - 1.0) * std::pow(base(r), k - 2) * d * d : 0.0;
                              return t2 - 2.0 * k / (R * R) * std::pow(base(r), k - 1);
                          }});
    }
    const double p = 0.5 * (geom.n - 4);
    for (double scale : {1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01}) {
        const double e2 = std::pow(scale * R, 2);
        probes.push_back({"bubble(eps=" + std::to_string(scale) + "R)",
                          [=](double r) { return std::pow(e2 + r * r, -p); },
                          [=](double r) { return -2.0 * p * r * std::pow(e2 + r * r, -p - 1.0); },
                          [=](double r) {
                              const double s = e2 + r * r;
                              return -2.0 * p * std::pow(s, -p - 1.0) + 4.0 * p * (p + 1.0) * r * r * std::pow(s, -p - 2.0);
                          }});
    }
    return probes;
}

double domain_integral(const ModelGeometry& geom, const std::function<double(double)>& fn) {
    using boost::math::quadrature::gauss_kronrod;
    const int n = geom.n;
    auto integrand = [&](double r) {
        const double radial = geom.kind == GeometryKind::RoundSphere ? std::pow(std::sin(r), n - 1) : std::pow(r, n - 1);
        return fn(r) * radial;
    };
    // split so narrow probes are seen by the first panels
    const double cuts[] = {0.0, 1e-3 * geom.R, 1e-2 * geom.R, 1e-1 * geom.R, geom.R};
    double total = 0.0;
    for (int i = 0; i + 1 < 5; ++i)
        total += gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 8, 1e-10);
    return sphere_area(n) * total;
}

}  // namespace

CompanionEstimate companion_constant_estimate(const ModelGeometry& geom, double K0, double eps) {
    geom.validate();
    if (!(K0 > 0.0)) throw DomainError("K0 must be positive");
    const double N = 2.0 * geom.n / (geom.n - 4.0);
    CompanionEstimate est;
    for (const auto& probe : probe_family(geom)) {
        const double l2 = domain_integral(geom, [&](double r) { return std::pow(probe.u(r), 2); });
        const double lN = domain_integral(geom, [&](double r) { return std::pow(std::abs(probe.u(r)), N); });
        const double lap2 = domain_integral(geom, [&](double r) {
            const double lap = probe.d2u(r) + geom.drift(r) * probe.du(r);
            return lap * lap;
        });
        const double ratio = (std::pow(lN, 2.0 / N) - (1.0 + eps) * K0 * lap2) / l2;
        ++est.probes;
        if (ratio > est.A) {
            est.A = ratio;
            est.argmax = probe.name;
        }
    }
    return est;
}

double theta(const Problem& problem) {
    const auto& spec = problem.spec();
    if (spec.a.is_zero() && spec.b.is_zero()) return 1.0;
    const auto& grid = problem.grid();
    const int n = spec.geom.n;
    double sum = 1.0;
    if (!spec.a.is_zero()) {
        const Eigen::VectorXd M = cell_moments(grid, -spec.sigma * spec.r);
        double total = 0.0;
        for (Eigen::Index i = 0; i < M.size(); ++i) total += std::pow(std::abs(spec.a.value(grid.nodes[i], n)), spec.r) * M[i];
        sum += std::pow(total, 1.0 / spec.r);
    }
    if (!spec.b.is_zero()) {
        const Eigen::VectorXd M = cell_moments(grid, -spec.mu * spec.s);
        double total = 0.0;
        for (Eigen::Index i = 0; i < M.size(); ++i) total += std::pow(std::abs(spec.b.value(grid.nodes[i], n)), spec.s) * M[i];
        sum += std::pow(total, 1.0 / spec.s);
    }
    return std::pow(sum, 1.0 / n);
}

ConstantsReport thresholds(int n, double q, double Lambda, double K0, double A, double volume, double f_max,
                           double eps) {
    if (!(Lambda > 0.0) || !(K0 > 0.0) || !(A > 0.0) || !(volume > 0.0) || !(f_max > 0.0) || !(eps >= 0.0))
        throw DomainError("thresholds need positive Lambda, K0, A, volume and f_max");
    if (n < 5 || !(q > 1.0 && q < 2.0)) throw DomainError("thresholds need n >= 5 and q in (1, 2)");
    const double N = 2.0 * n / (n - 4.0);
    const double M = std::max(K0, A);
    const double common = std::pow(Lambda, q / 2.0) / (2.0 * (N - q) * std::pow(volume, 1.0 - q / N) * std::pow(M, q / 2.0));
    ConstantsReport rep;
    rep.Lambda = Lambda;
    rep.K0 = K0;
    rep.A_eps = A;
    rep.volume = volume;
    rep.f_max = f_max;
    rep.eps = eps;
    rep.coercive = true;
    rep.lambda0 = (N - 2.0) * q * common;
    const double inner = (2.0 - q) * std::pow(Lambda, N / 2.0) * std::pow(std::max((1.0 + eps) * K0, A), -N / 2.0) /
                         ((N - q) * f_max);
    rep.xi = std::pow(inner, 1.0 / (N - 2.0));
    rep.lambda2 = (N - 2.0) * rep.xi * rep.xi * common;
    return rep;
}

ConstantsReport estimate_constants(const Problem& problem) {
    const auto& spec = problem.spec();
    const auto coercivity = estimate_coercivity(problem);
    const double K0 = sobolev_constant_estimate(spec.geom.n);
    const auto companion = companion_constant_estimate(spec.geom, K0, spec.sobolev_eps);
    const double volume = integrate(problem.grid(), Eigen::VectorXd::Ones(problem.grid().size()));
    ConstantsReport rep;
    if (coercivity.coercive) {
        rep = thresholds(spec.geom.n, spec.q, coercivity.lambda_min, K0, companion.A, volume, spec.f_max(),
                         spec.sobolev_eps);
    } else {
        rep.Lambda = coercivity.lambda_min;
        rep.K0 = K0;
        rep.A_eps = companion.A;
        rep.volume = volume;
        rep.f_max = spec.f_max();
        rep.eps = spec.sobolev_eps;
        rep.coercive = false;
    }
    rep.theta = theta(problem);
    return rep;
}

}  // namespace nehari
