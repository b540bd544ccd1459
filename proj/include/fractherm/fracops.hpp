#pragma once

#include "fractherm/types.hpp"

namespace fractherm {

/// Product-integration weights for one target node t_k: sum_j weights[j] * v[j]
/// equals the integral over [t_0, t_k] of (t_k - s)^kernel_exponent * v_hat(s),
/// exactly for the piecewise-linear interpolant v_hat. Entries past the target
/// node are zero. The moments of each cell are closed forms, so the weak
/// singularity at s = t_k never meets a numerical quadrature.
struct QuadWeights {
    Index target_index;
    Vector weights;
    Real kernel_exponent;  // in (-1, 0)
};

/// Weights for the weakly singular kernel at grid node target_index.
/// Requires 1 <= target_index < grid.size() and kernel_exponent in (-1, 0).
[[nodiscard]] QuadWeights singular_weights(const TimeGrid& grid, Index target_index,
                                           Real kernel_exponent);

/// S_k = integral over [t_0, t_k] of (t_k - s)^mu * v_hat(s) for every node k
/// (S_0 = 0), product integration against the piecewise-linear interpolant.
/// Direct O(N^2) summation; uniform grids share one power table across rows.
[[nodiscard]] Vector weakly_singular_sums(const TimeGrid& grid, Real mu, const Vector& values);

/// Same sums, but only for nodes k >= from_index (earlier entries are zero).
/// Lets continuation sweeps skip the frozen history rows.
[[nodiscard]] Vector weakly_singular_sums_tail(const TimeGrid& grid, Real mu, const Vector& values,
                                               Index from_index);

/// Integral over history cells only: sum over cells of [t_0, t_limit] of the
/// kernel (t_outer - s)^mu against v_hat, for an outer time t_outer >= t_limit.
[[nodiscard]] Real weakly_singular_history(const TimeGrid& grid, Real mu, const Vector& values,
                                           Real t_outer);

/// Riemann-Liouville integral of order in (0, 1) on the sample's grid, which
/// must start at 0. Value at t = 0 is 0.
[[nodiscard]] SampledFn rl_integral(const SampledFn& g, FracOrder order);

/// Caputo derivative of order in (0, 1), L1 scheme: cell difference quotients
/// integrated exactly against the (t - s)^(-order) kernel. A constant input
/// yields a bit-exact zero output. Lower terminal is the grid's first node.
[[nodiscard]] SampledFn caputo_derivative(const SampledFn& g, FracOrder order);

/// Riemann-Liouville derivative, realized as a centered difference of the
/// co-order RL integral. Diagnostic only: coarse near t = 0, where the RL
/// derivative of a constant genuinely blows up like t^(-order).
[[nodiscard]] SampledFn rl_derivative(const SampledFn& g, FracOrder order);

}  // namespace fractherm
