#include "nehari/sweep.hpp"

#include "nehari/errors.hpp"

#include <cmath>
#include <future>

namespace nehari {

double sweep_sigma(int level) { return 2.0 - std::ldexp(1.0, -level); }

double sweep_mu(int level) { return 4.0 - std::ldexp(1.0, -level + 1); }

namespace {

SweepPoint run_point(const ProblemSpec& base, const GridPtr& grid, const SweepOptions& opts, int level) {
    ProblemSpec spec = base;
    spec.sharp = true;
    spec.sigma = sweep_sigma(level);
    spec.mu = sweep_mu(level);
    spec.lambda = 0.0;
    const Problem problem(spec, grid);

    SweepPoint pt;
    pt.level = level;
    pt.sigma = spec.sigma;
    pt.mu = spec.mu;
    pt.constants = estimate_constants(problem);
    if (!pt.constants.coercive) throw NumericalError("quadratic form lost coercivity at sweep level " + std::to_string(level));
    pt.lambda = opts.lambda_factor * pt.constants.lambda0;
    pt.both = solve_both(problem.with_lambda(pt.lambda), opts.solver, pt.constants.lambda_small());
    return pt;
}

}  // namespace

std::vector<SweepPoint> sharp_sweep(const ProblemSpec& base, const GridPtr& grid, const SweepOptions& opts) {
    if (opts.levels < 1) throw ConfigurationError("sharp sweep needs at least one level");
    if (!(opts.lambda_factor > 0.0)) throw ConfigurationError("sweep lambda_factor must be positive");
    std::vector<SweepPoint> out;
    out.reserve(opts.levels);
    if (!opts.parallel) {
        for (int level = 1; level <= opts.levels; ++level) out.push_back(run_point(base, grid, opts, level));
        return out;
    }
    std::vector<std::future<SweepPoint>> jobs;
    for (int level = 1; level <= opts.levels; ++level)
        jobs.push_back(std::async(std::launch::async, run_point, std::cref(base), std::cref(grid), std::cref(opts), level));
    for (auto& job : jobs) out.push_back(job.get());
    return out;
}

}  // namespace nehari
