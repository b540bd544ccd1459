#include "fractherm/fracops.hpp"

#include "fractherm/gamma.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fractherm {

namespace {

void check_kernel_exponent(Real mu) {
    if (!(mu > -1.0 && mu < 0.0))
        throw std::invalid_argument("kernel exponent must lie in (-1, 0), got " + std::to_string(mu));
}

// Exact moments of (T - s)^mu against the linear hat functions of one cell
// [t_left, t_right], T >= t_right. Returns the coefficients of the left and
// right nodal values. tau_l = T - t_left, tau_r = T - t_right.
struct CellCoeffs {
    Real left, right;
};

inline CellCoeffs cell_coeffs(Real tau_l, Real tau_r, Real dt, Real mu) {
    const Real p1l = std::pow(tau_l, mu + 1.0);
    const Real p1r = std::pow(tau_r, mu + 1.0);
    const Real m0 = (p1l - p1r) / (mu + 1.0);
    const Real m1 = (p1l * tau_l - p1r * tau_r) / (mu + 2.0);
    return {(m1 - tau_r * m0) / dt, (tau_l * m0 - m1) / dt};
}

}  // namespace

QuadWeights singular_weights(const TimeGrid& grid, Index target_index, Real kernel_exponent) {
    check_kernel_exponent(kernel_exponent);
    if (target_index < 1 || target_index >= grid.size())
        throw std::invalid_argument("singular_weights: target_index must satisfy 1 <= k < grid size, got "
                                    + std::to_string(target_index));
    const Real tk = grid[target_index];
    Vector w = Vector::Zero(grid.size());
    for (Index j = 0; j < target_index; ++j) {
        const auto c = cell_coeffs(tk - grid[j], tk - grid[j + 1], grid.spacing(j), kernel_exponent);
        w[j] += c.left;
        w[j + 1] += c.right;
    }
    return {target_index, std::move(w), kernel_exponent};
}

Vector weakly_singular_sums_tail(const TimeGrid& grid, Real mu, const Vector& values,
                                 Index from_index) {
    check_kernel_exponent(mu);
    const Index n = grid.size();
    if (values.size() != n)
        throw std::invalid_argument("weakly_singular_sums: values and grid length mismatch");
    if (from_index < 0) from_index = 0;
    Vector out = Vector::Zero(n);

    if (grid.is_uniform()) {
        const Real h = grid.spacing(0);
        // Shift-invariant cell coefficients: cell at lag m spans
        // [(m-1)h, mh] away from the target node.
        Vector q1(n), q2(n);
        for (Index m = 0; m < n; ++m) {
            const Real tau = static_cast<Real>(m) * h;
            q1[m] = std::pow(tau, mu + 1.0);
            q2[m] = q1[m] * tau;
        }
        Vector cell_a(n), cell_b(n);
        cell_a[0] = cell_b[0] = 0.0;
        for (Index m = 1; m < n; ++m) {
            const Real m0 = (q1[m] - q1[m - 1]) / (mu + 1.0);
            const Real m1 = (q2[m] - q2[m - 1]) / (mu + 2.0);
            const Real a = static_cast<Real>(m - 1) * h;
            const Real b = static_cast<Real>(m) * h;
            cell_a[m] = (m1 - a * m0) / h;
            cell_b[m] = (b * m0 - m1) / h;
        }
        for (Index k = std::max<Index>(1, from_index); k < n; ++k) {
            out[k] = (cell_a.segment(1, k) * values.head(k).reverse()).sum()
                     + (cell_b.segment(1, k) * values.segment(1, k).reverse()).sum();
        }
        return out;
    }

    const Vector& t = grid.points();
    Vector tau(n), p1(n), p2(n);
    for (Index k = std::max<Index>(1, from_index); k < n; ++k) {
        auto tau_k = tau.head(k + 1);
        auto p1_k = p1.head(k + 1);
        auto p2_k = p2.head(k + 1);
        tau_k = t[k] - t.head(k + 1);
        p1_k = tau_k.pow(mu + 1.0);
        p2_k = p1_k * tau_k;
        // Cell j has tau_left = tau[j], tau_right = tau[j+1].
        const auto m0 = (p1_k.head(k) - p1.segment(1, k)) / (mu + 1.0);
        const auto m1 = (p2_k.head(k) - p2.segment(1, k)) / (mu + 2.0);
        const auto dt = t.segment(1, k) - t.head(k);
        out[k] = (((m1 - tau.segment(1, k) * m0) / dt) * values.head(k)).sum()
                 + (((tau.head(k) * m0 - m1) / dt) * values.segment(1, k)).sum();
    }
    return out;
}

Vector weakly_singular_sums(const TimeGrid& grid, Real mu, const Vector& values) {
    return weakly_singular_sums_tail(grid, mu, values, 0);
}

Real weakly_singular_history(const TimeGrid& grid, Real mu, const Vector& values, Real t_outer) {
    check_kernel_exponent(mu);
    if (values.size() != grid.size())
        throw std::invalid_argument("weakly_singular_history: values and grid length mismatch");
    if (!(t_outer >= grid.back()))
        throw std::invalid_argument("weakly_singular_history: outer time precedes the grid end");
    Real sum = 0.0;
    for (Index j = 0; j + 1 < grid.size(); ++j) {
        const auto c = cell_coeffs(t_outer - grid[j], t_outer - grid[j + 1], grid.spacing(j), mu);
        sum += c.left * values[j] + c.right * values[j + 1];
    }
    return sum;
}

SampledFn rl_integral(const SampledFn& g, FracOrder order) {
    if (g.grid.front() != 0.0)
        throw std::invalid_argument("rl_integral: grid must start at t = 0");
    Vector out = weakly_singular_sums(g.grid, order.value() - 1.0, g.values)
                 / gamma_fn(order.value());
    return {g.grid, std::move(out)};
}

SampledFn caputo_derivative(const SampledFn& g, FracOrder order) {
    const Index n = g.size();
    const Real gam = order.value();
    const Real inv_gamma2 = 1.0 / gamma_fn(2.0 - gam);
    const Vector& t = g.grid.points();

    // Cell difference quotients of g; identically zero cells stay exact zeros,
    // so constants map to bit-exact zero output.
    Vector d(n - 1);
    for (Index j = 0; j + 1 < n; ++j)
        d[j] = (g.values[j + 1] - g.values[j]) / g.grid.spacing(j);

    Vector out = Vector::Zero(n);
    if (g.grid.is_uniform()) {
        const Real h = g.grid.spacing(0);
        Vector r(n);
        for (Index m = 0; m < n; ++m)
            r[m] = std::pow(static_cast<Real>(m) * h, 1.0 - gam);
        Vector dr(n);
        dr[0] = 0.0;
        for (Index m = 1; m < n; ++m) dr[m] = r[m] - r[m - 1];
        for (Index k = 1; k < n; ++k)
            out[k] = inv_gamma2 * (dr.segment(1, k) * d.head(k).reverse()).sum();
        return {g.grid, std::move(out)};
    }

    Vector tau(n), rr(n);
    for (Index k = 1; k < n; ++k) {
        auto tau_k = tau.head(k + 1);
        auto rr_k = rr.head(k + 1);
        tau_k = t[k] - t.head(k + 1);
        rr_k = tau_k.pow(1.0 - gam);
        out[k] = inv_gamma2 * ((rr_k.head(k) - rr.segment(1, k)) * d.head(k)).sum();
    }
    return {g.grid, std::move(out)};
}

SampledFn rl_derivative(const SampledFn& g, FracOrder order) {
    const Index n = g.size();
    const Vector j = weakly_singular_sums(g.grid, -order.value(), g.values)
                     / gamma_fn(1.0 - order.value());
    Vector out(n);
    out[0] = (j[1] - j[0]) / g.grid.spacing(0);
    out[n - 1] = (j[n - 1] - j[n - 2]) / g.grid.spacing(n - 2);
    for (Index k = 1; k + 1 < n; ++k)
        out[k] = (j[k + 1] - j[k - 1]) / (g.grid[k + 1] - g.grid[k - 1]);
    return {g.grid, std::move(out)};
}

}  // namespace fractherm
