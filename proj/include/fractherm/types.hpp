#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace fractherm {

using Real = double;
using Index = Eigen::Index;

/// Dense value carrier for grid points, samples and quadrature weights.
using Vector = Eigen::ArrayXd;

/// Fractional order in (0, 1). Holds both the model order alpha and the
/// composite order 2*alpha that the operators act with.
class FracOrder {
public:
    explicit FracOrder(Real value) : value_(value) {
        if (!(value > 0.0 && value < 1.0)) {
            throw std::invalid_argument(
                "FracOrder: order must lie in (0, 1), got " + std::to_string(value));
        }
    }

    [[nodiscard]] Real value() const noexcept { return value_; }

private:
    Real value_;
};

/// Strictly increasing time grid with at least two nodes, first node >= 0.
/// Uniform spacing is detected once at construction so the O(N^2) history
/// kernels can take the table-lookup path.
class TimeGrid {
public:
    explicit TimeGrid(Vector points) : points_(std::move(points)) {
        const Index n = points_.size();
        if (n < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
        if (!(points_[0] >= 0.0)) throw std::invalid_argument("TimeGrid: first point must be >= 0");
        for (Index i = 0; i + 1 < n; ++i) {
            const Real dt = points_[i + 1] - points_[i];
            if (!(dt > 0.0) || !std::isfinite(dt)) {
                throw std::invalid_argument("TimeGrid: points must be strictly increasing and finite (cell "
                                            + std::to_string(i) + ")");
            }
        }
        const Real h0 = points_[1] - points_[0];
        uniform_ = true;
        for (Index i = 1; i + 1 < n; ++i) {
            if (std::abs(points_[i + 1] - points_[i] - h0) > 1e-12 * h0) {
                uniform_ = false;
                break;
            }
        }
    }

    /// cells+1 equally spaced nodes on [t0, t1]; both endpoints exact.
    static TimeGrid uniform(Real t0, Real t1, Index cells) {
        if (cells < 1) throw std::invalid_argument("TimeGrid::uniform: need at least 1 cell");
        Vector p(cells + 1);
        const Real len = t1 - t0;
        for (Index i = 0; i <= cells; ++i)
            p[i] = t0 + len * static_cast<Real>(i) / static_cast<Real>(cells);
        p[0] = t0;
        p[cells] = t1;
        return TimeGrid(std::move(p));
    }

    /// Nodes clustered toward t0: t0 + (t1-t0) * (i/cells)^exponent.
    /// exponent = 1 reproduces the uniform grid bit for bit.
    static TimeGrid graded(Real t0, Real t1, Index cells, Real exponent) {
        if (exponent == 1.0) return uniform(t0, t1, cells);
        if (cells < 1) throw std::invalid_argument("TimeGrid::graded: need at least 1 cell");
        if (!(exponent >= 1.0)) throw std::invalid_argument("TimeGrid::graded: exponent must be >= 1");
        Vector p(cells + 1);
        const Real len = t1 - t0;
        for (Index i = 0; i <= cells; ++i)
            p[i] = t0 + len * std::pow(static_cast<Real>(i) / static_cast<Real>(cells), exponent);
        p[0] = t0;
        p[cells] = t1;
        return TimeGrid(std::move(p));
    }

    [[nodiscard]] const Vector& points() const noexcept { return points_; }
    [[nodiscard]] Index size() const noexcept { return points_.size(); }
    [[nodiscard]] Real operator[](Index i) const { return points_[i]; }
    [[nodiscard]] Real front() const { return points_[0]; }
    [[nodiscard]] Real back() const { return points_[points_.size() - 1]; }
    [[nodiscard]] Real span() const { return back() - front(); }
    [[nodiscard]] Real spacing(Index cell) const { return points_[cell + 1] - points_[cell]; }
    [[nodiscard]] bool is_uniform() const noexcept { return uniform_; }

    /// Index of the cell containing t; t == back() maps to the last cell.
    [[nodiscard]] Index cell_of(Real t) const {
        if (!(t >= front() && t <= back()))
            throw std::out_of_range("TimeGrid::cell_of: t outside grid span");
        const Real* begin = points_.data();
        const Real* end = begin + points_.size();
        Index i = static_cast<Index>(std::upper_bound(begin, end, t) - begin) - 1;
        if (i >= points_.size() - 1) i = points_.size() - 2;
        return i;
    }

private:
    Vector points_;
    bool uniform_ = false;
};

/// A function sampled on a grid; the discrete stand-in for u in C[0, h].
/// Values are not required to be finite here: solver verdicts flag blow-up
/// records explicitly.
struct SampledFn {
    TimeGrid grid;
    Vector values;

    SampledFn(TimeGrid g, Vector v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SampledFn: values and grid length mismatch");
    }

    static SampledFn constant(const TimeGrid& g, Real value) {
        return {g, Vector::Constant(g.size(), value)};
    }

    [[nodiscard]] Index size() const noexcept { return values.size(); }

    /// Piecewise-linear evaluation inside the grid span.
    [[nodiscard]] Real operator()(Real t) const {
        const Index i = grid.cell_of(t);
        const Real w = (t - grid[i]) / grid.spacing(i);
        return values[i] + w * (values[i + 1] - values[i]);
    }
};

[[nodiscard]] inline Real sup_norm(const Vector& v) { return v.abs().maxCoeff(); }

/// Sup distance of two samples on the same grid (lengths must agree).
[[nodiscard]] inline Real sup_distance(const SampledFn& a, const SampledFn& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("sup_distance: length mismatch");
    return (a.values - b.values).abs().maxCoeff();
}

}  // namespace fractherm
