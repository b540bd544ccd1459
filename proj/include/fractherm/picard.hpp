#pragma once

#include "fractherm/model.hpp"
#include "fractherm/types.hpp"

#include <vector>

namespace fractherm {

/// The ball D_h: functions on [0, h] within sup-distance b of the constant
/// initial value. h is always recomputed from b, never trusted from input.
struct LocalBall {
    Real b;
    Real h;
};

/// Time radius min{ (b * Gamma(2a+1) * c1^2 / (lambda * M))^(1/(2a)), horizon }
/// on which the ball of radius b maps into itself under the growth constants.
/// lambda = 0 decouples the source and the radius clamps to the horizon.
[[nodiscard]] Real existence_radius(Real b, const ProblemSpec& spec);

/// Same first branch without the horizon clamp; continuation applies its own
/// per-extension clamp.
[[nodiscard]] Real existence_radius_unclamped(Real b, const ProblemSpec& spec);

/// Ball with the recomputed radius for the spec's constants.
[[nodiscard]] LocalBall make_local_ball(Real b, const ProblemSpec& spec);

/// One application of the integral-form solution map on [0, h]:
///   (Fu)(t_k) = u0 + (lambda / Gamma(2a)) * sum of singular weights applied to
///               f(s_j, u_j) / (delta + I(t_k))^2,
/// with I accumulated from u and the denominator frozen at the outer node t_k.
/// (Fu)(0) = u0. The grid must start at 0.
[[nodiscard]] SampledFn fixed_point_map(const SampledFn& u, const ProblemSpec& spec);

enum class SolveStatus {
    Converged,      // sup update fell below tol
    MaxIterations,  // budget exhausted with update still above tol
    Diverged,       // an iterate went non-finite; last finite iterate returned
};

/// Per-solve diagnostics. Residuals realize the equivalence of the integral
/// and differential forms; in_ball realizes the ball-invariance contract.
struct SolveReport {
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
    std::vector<Real> sup_updates;
    Real integral_residual = 0.0;      // sup |u - Fu| over the grid
    Real differential_residual = 0.0;  // sup |caputo(u, 2a) - S(t, u)| over audited nodes
    bool in_ball = false;
    /// Empirical contraction factor (median update ratio); convergence of the
    /// iteration is observed, not guaranteed, so this is reported rather than
    /// asserted.
    Real contraction_estimate = 0.0;
    /// False when the update sequence increased after its first step. Logged
    /// as a warning only.
    bool updates_monotone = true;

    [[nodiscard]] bool converged() const noexcept { return status == SolveStatus::Converged; }
};

struct LocalSolution {
    SampledFn u;
    SolveReport report;
};

/// Picard iteration of the solution map from the constant initial guess
/// u == u0 until the sup update falls below tol or max_iter sweeps.
/// Non-convergence and blow-up come back as report verdicts, not exceptions.
/// The grid must span exactly [0, ball.h].
[[nodiscard]] LocalSolution solve_local(const ProblemSpec& spec, const LocalBall& ball,
                                        const TimeGrid& grid, Real tol, int max_iter);

struct ResidualPair {
    Real integral;
    Real differential;
};

/// Fraction of the span skipped at the left end when taking the sup of the
/// differential residual. The L1 derivative of any solution with the natural
/// t^(2a) leading behavior carries an O(1) mismatch on the first few nodes
/// regardless of the mesh, so the equivalence of the two formulations is
/// audited on [front + span/16, back) only.
inline constexpr Real kResidualCutFraction = 1.0 / 16.0;

/// Integral residual sup |u - Fu| over all nodes, and differential residual
/// sup |caputo_derivative(u, 2a) - source_term| over interior nodes past the
/// initial layer (see kResidualCutFraction).
[[nodiscard]] ResidualPair residuals(const SampledFn& u, const ProblemSpec& spec);

}  // namespace fractherm
