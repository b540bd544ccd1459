#pragma once

// Test-only oracles, independent of the library's product-integration path:
// brute-force quadrature after desingularizing substitution, analytic power
// rules, and high-precision gamma constants. Nothing here touches the cell
// moment formulas under test.

#include "fractherm/types.hpp"

#include <cmath>
#include <random>

namespace oracles {

using fractherm::Index;
using fractherm::Real;
using fractherm::TimeGrid;
using fractherm::Vector;

// Frozen with mpmath at 30 digits.
inline constexpr Real kGammaHalf = 1.77245385090551602729816748334;     // gamma(1/2)
inline constexpr Real kGammaThreeHalves = 0.886226925452758013649083741671;
inline constexpr Real kGammaFiveHalves = 1.32934038817913702047362561251;
inline constexpr Real kInvGammaThreeHalves = 1.12837916709551257389615890312;
inline constexpr Real kCaputoSquareHalf = 1.50450555612735009852821187083;  // 2/gamma(5/2)
inline constexpr Real kPiOverFour = 0.78539816339744830961566084582;
inline constexpr Real kGammaMilli = 999.4237724845954661149822013;      // gamma(1e-3)
inline constexpr Real kGamma170 = 4.2690680090047052749392518889e304;
inline constexpr Real kGammaTenPointThree = 716430.689062375244547629654715;
inline constexpr Real kGamma33_33 = 8.31426786026452453613603520616e35;

/// Integral over [0, t] of (t - s)^mu * phi(s) ds for mu in (-1, 0), by
/// composite Simpson after the substitution tau = (t - s)^(mu + 1) that
/// removes the endpoint singularity. n is the (even) panel count.
template <typename F>
Real singular_integral(F&& phi, Real t, Real mu, int n = 1000000) {
    const Real p = mu + 1.0;
    const Real upper = std::pow(t, p);
    const auto g = [&](Real tau) { return phi(t - std::pow(tau, 1.0 / p)); };
    if (n % 2 != 0) ++n;
    const Real h = upper / n;
    Real odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += g(h * i);
    for (int i = 2; i < n; i += 2) even += g(h * i);
    return (g(0.0) + g(upper) + 4.0 * odd + 2.0 * even) * h / (3.0 * p);
}

/// log2 error ratio between a grid and its refinement.
inline Real empirical_order(Real coarse_err, Real fine_err) {
    return std::log2(coarse_err / fine_err);
}

/// Strictly increasing random grid on [0, span] with n cells (first node 0).
inline TimeGrid random_grid(std::mt19937_64& rng, Index cells, Real span) {
    std::uniform_real_distribution<Real> jitter(0.2, 1.8);
    Vector p(cells + 1);
    p[0] = 0.0;
    for (Index i = 1; i <= cells; ++i) p[i] = p[i - 1] + jitter(rng);
    p *= span / p[cells];
    p[0] = 0.0;
    p[cells] = span;
    return TimeGrid(std::move(p));
}

inline Vector random_values(std::mt19937_64& rng, Index n, Real lo, Real hi) {
    std::uniform_real_distribution<Real> dist(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

/// Piecewise-linear evaluation of nodal values on a grid (the same hat-basis
/// reconstruction the weights integrate, written independently).
inline Real interp(const TimeGrid& grid, const Vector& values, Real s) {
    Index i = grid.cell_of(s);
    const Real w = (s - grid[i]) / grid.spacing(i);
    return values[i] * (1.0 - w) + values[i + 1] * w;
}

}  // namespace oracles
