#include "fractherm/picard.hpp"

#include "fractherm/fracops.hpp"
#include "fractherm/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fractherm {

Real existence_radius_unclamped(Real b, const ProblemSpec& spec) {
    if (!(b > 0.0)) throw std::invalid_argument("existence_radius: b must be > 0");
    const Real two_a = 2.0 * spec.alpha.value();
    const Real coupling = spec.lambda * spec.constants.quad_growth;
    if (coupling == 0.0) return std::numeric_limits<Real>::infinity();
    const Real c1 = spec.constants.c1;
    return std::pow(b * gamma_fn(two_a + 1.0) * c1 * c1 / coupling, 1.0 / two_a);
}

Real existence_radius(Real b, const ProblemSpec& spec) {
    return std::min(existence_radius_unclamped(b, spec), spec.horizon);
}

LocalBall make_local_ball(Real b, const ProblemSpec& spec) {
    return {b, existence_radius(b, spec)};
}

SampledFn fixed_point_map(const SampledFn& u, const ProblemSpec& spec) {
    if (u.grid.front() != 0.0)
        throw std::invalid_argument("fixed_point_map: grid must start at t = 0");
    const Index n = u.size();
    const Real two_a = 2.0 * spec.alpha.value();

    Vector f_vals(n);
    for (Index k = 0; k < n; ++k)
        f_vals[k] = eval_conductivity(spec.f, u.grid[k], u.values[k]);

    const NonlocalState state = accumulate(spec.f, u);
    const Vector sums = weakly_singular_sums(u.grid, two_a - 1.0, f_vals);
    const Real scale = spec.lambda / gamma_fn(two_a);

    Vector out(n);
    out[0] = spec.u0;
    for (Index k = 1; k < n; ++k) {
        const Real denom = spec.delta + state.integral.values[k];
        if (!(denom > 0.0))
            throw singular_source_error("fixed_point_map: vanishing denominator at node "
                                        + std::to_string(k));
        out[k] = spec.u0 + scale * sums[k] / (denom * denom);
    }
    return {u.grid, std::move(out)};
}

namespace {

// Median of consecutive update ratios; 0 when fewer than two sweeps.
Real estimate_contraction(const std::vector<Real>& updates) {
    std::vector<Real> ratios;
    for (std::size_t i = 1; i < updates.size(); ++i)
        if (updates[i - 1] > 0.0) ratios.push_back(updates[i] / updates[i - 1]);
    if (ratios.empty()) return 0.0;
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    return ratios[ratios.size() / 2];
}

bool updates_monotone(const std::vector<Real>& updates) {
    for (std::size_t i = 2; i < updates.size(); ++i)
        if (updates[i] > updates[i - 1] * (1.0 + 1e-12)) return false;
    return true;
}

}  // namespace

LocalSolution solve_local(const ProblemSpec& spec, const LocalBall& ball, const TimeGrid& grid,
                          Real tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_local: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solve_local: max_iter must be >= 1");
    if (grid.front() != 0.0)
        throw std::invalid_argument("solve_local: grid must start at t = 0");
    if (std::abs(grid.back() - ball.h) > 1e-9 * std::max(Real(1), ball.h))
        throw std::invalid_argument("solve_local: grid must span exactly [0, ball.h]");

    SampledFn u = SampledFn::constant(grid, spec.u0);
    SolveReport report;

    for (int iter = 1; iter <= max_iter; ++iter) {
        SampledFn next = fixed_point_map(u, spec);
        report.iterations = iter;
        if (!next.values.isFinite().all()) {
            report.status = SolveStatus::Diverged;
            report.sup_updates.push_back(std::numeric_limits<Real>::infinity());
            break;  // keep the last finite iterate
        }
        const Real update = sup_distance(next, u);
        report.sup_updates.push_back(update);
        u = std::move(next);
        if (update <= tol) {
            report.status = SolveStatus::Converged;
            break;
        }
    }

    const ResidualPair res = residuals(u, spec);
    report.integral_residual = res.integral;
    report.differential_residual = res.differential;
    report.in_ball = (u.values - spec.u0).abs().maxCoeff() <= ball.b;
    report.contraction_estimate = estimate_contraction(report.sup_updates);
    report.updates_monotone = updates_monotone(report.sup_updates);
    return {std::move(u), std::move(report)};
}

ResidualPair residuals(const SampledFn& u, const ProblemSpec& spec) {
    const SampledFn mapped = fixed_point_map(u, spec);
    const Real integral = sup_distance(u, mapped);

    const SampledFn deriv = caputo_derivative(u, spec.order2a());
    const NonlocalState state = accumulate(spec.f, u);
    const Real t_min = u.grid.front() + u.grid.span() * kResidualCutFraction;
    Real differential = 0.0;
    for (Index k = 1; k + 1 < u.size(); ++k) {
        if (u.grid[k] < t_min) continue;
        const Real s = source_term(spec, u.grid[k], u.values[k], state);
        differential = std::max(differential, std::abs(deriv.values[k] - s));
    }
    return {integral, differential};
}

}  // namespace fractherm
