#include "fractherm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractherm {

namespace {

Real require_finite(Real x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    return x;
}

Real sin_sq(Real u) {
    const Real s = std::sin(u);
    return s * s;
}

// Comparison slack for sampled inequality verdicts; ties from rounding are
// not violations.
bool leq(Real lhs, Real rhs) { return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs)); }

}  // namespace

// ---------------------------------------------------------------------------
// Conductivity
// ---------------------------------------------------------------------------

void ConductivityTable::validate() const {
    if (s_axis.size() < 2 || u_axis.size() < 2)
        throw std::invalid_argument("conductivity table: need at least 2 nodes per axis");
    for (Index i = 0; i + 1 < s_axis.size(); ++i)
        if (!(s_axis[i + 1] > s_axis[i]))
            throw std::invalid_argument("conductivity table: s axis must be strictly ascending");
    for (Index j = 0; j + 1 < u_axis.size(); ++j)
        if (!(u_axis[j + 1] > u_axis[j]))
            throw std::invalid_argument("conductivity table: u axis must be strictly ascending");
    if (values.rows() != s_axis.size() || values.cols() != u_axis.size())
        throw std::invalid_argument("conductivity table: value shape does not match axes");
    if (!(values >= 0.0).all() || !values.isFinite().all())
        throw std::invalid_argument("conductivity table: values must be finite and nonnegative");
}

Real ConductivityTable::interpolate(Real s, Real u) const {
    const auto locate = [](const Vector& axis, Real x, const char* name) {
        if (!(x >= axis[0] && x <= axis[axis.size() - 1])) {
            std::ostringstream os;
            os << "conductivity table: " << name << " = " << x << " outside table rectangle ["
               << axis[0] << ", " << axis[axis.size() - 1] << "]";
            throw std::out_of_range(os.str());
        }
        const Real* begin = axis.data();
        Index i = static_cast<Index>(std::upper_bound(begin, begin + axis.size(), x) - begin) - 1;
        if (i >= axis.size() - 1) i = axis.size() - 2;
        return i;
    };
    const Index i = locate(s_axis, s, "s");
    const Index j = locate(u_axis, u, "u");
    const Real ws = (s - s_axis[i]) / (s_axis[i + 1] - s_axis[i]);
    const Real wu = (u - u_axis[j]) / (u_axis[j + 1] - u_axis[j]);
    return (1.0 - ws) * ((1.0 - wu) * values(i, j) + wu * values(i, j + 1))
           + ws * ((1.0 - wu) * values(i + 1, j) + wu * values(i + 1, j + 1));
}

ConductivitySpec ConductivitySpec::constant(Real c) {
    if (!(require_finite(c, "conductivity") >= 0.0))
        throw std::invalid_argument("constant conductivity: c must be >= 0");
    return {Family::Constant, c, 0.0, 0.0};
}

ConductivitySpec ConductivitySpec::bounded_oscillatory(Real c, Real eps) {
    if (!(require_finite(c, "conductivity") >= 0.0) || !(require_finite(eps, "conductivity") >= 0.0))
        throw std::invalid_argument("bounded-oscillatory conductivity: need c >= 0 and eps >= 0");
    return {Family::BoundedOscillatory, c, eps, 0.0};
}

ConductivitySpec ConductivitySpec::quadratic_time(Real a, Real eps) {
    if (!(require_finite(a, "conductivity") >= 0.0) || !(require_finite(eps, "conductivity") >= 0.0))
        throw std::invalid_argument("quadratic-time conductivity: need a >= 0 and eps >= 0");
    return {Family::QuadraticTime, a, eps, 0.0};
}

ConductivitySpec ConductivitySpec::affine_growth(Real c3, Real c4, Real cap) {
    if (!(require_finite(c3, "conductivity") >= 0.0) || !(require_finite(c4, "conductivity") >= 0.0)
        || !(require_finite(cap, "conductivity") > 0.0))
        throw std::invalid_argument("affine-growth conductivity: need c3, c4 >= 0 and cap > 0");
    return {Family::AffineGrowth, c3, c4, cap};
}

ConductivitySpec ConductivitySpec::user_table(ConductivityTable table) {
    table.validate();
    ConductivitySpec spec{Family::UserTable, 0.0, 0.0, 0.0};
    spec.table_ = std::make_shared<const ConductivityTable>(std::move(table));
    return spec;
}

Real eval_conductivity(const ConductivitySpec& f, Real s, Real u) {
    if (!(s >= 0.0)) throw std::invalid_argument("eval_conductivity: s must be >= 0");
    switch (f.family()) {
        case ConductivitySpec::Family::Constant:
            return f.param(0);
        case ConductivitySpec::Family::BoundedOscillatory:
            return f.param(0) + f.param(1) * sin_sq(u);
        case ConductivitySpec::Family::QuadraticTime:
            return f.param(0) * s * s * (1.0 + f.param(1) * sin_sq(u));
        case ConductivitySpec::Family::AffineGrowth:
            return std::min(f.param(0) + f.param(1) * std::abs(u), f.param(2));
        case ConductivitySpec::Family::UserTable:
            return f.table().interpolate(s, u);
    }
    throw std::logic_error("eval_conductivity: unknown family");
}

// ---------------------------------------------------------------------------
// Problem spec
// ---------------------------------------------------------------------------

void HypothesisConstants::validate() const {
    if (!(c1 > 0.0 && c2 >= c1))
        throw std::invalid_argument("constants: need 0 < c1 <= c2");
    if (!(lipschitz > 0.0)) throw std::invalid_argument("constants: lipschitz must be > 0");
    if (!(quad_growth > 0.0)) throw std::invalid_argument("constants: quad growth M must be > 0");
    if (!(omega >= 2.0)) throw std::invalid_argument("constants: omega must be >= 2");
    if (growth) {
        if (!(growth->c3 > 0.0 && growth->c4 >= 0.0 && growth->c5 >= 0.0))
            throw std::invalid_argument("constants: growth envelope needs c3 > 0, c4 >= 0, c5 >= 0");
    }
}

namespace {

// Smallest sampled conductivity at time s over a coarse u sweep; used to
// decide whether the family is bounded below away from zero there.
Real sampled_lower_bound(const ConductivitySpec& f, Real s) {
    Real lo = std::numeric_limits<Real>::infinity();
    for (int i = 0; i <= 16; ++i) {
        const Real u = -8.0 + static_cast<Real>(i);
        lo = std::min(lo, eval_conductivity(f, s, u));
    }
    return lo;
}

}  // namespace

void ProblemSpec::validate() const {
    if (!(alpha.value() > 0.0 && alpha.value() < 0.5))
        throw std::invalid_argument("problem.alpha: alpha must lie in (0, 0.5), got "
                                    + std::to_string(alpha.value()));
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("problem.lambda: lambda must be finite and >= 0");
    if (!std::isfinite(u0)) throw std::invalid_argument("problem.u0: must be finite");
    if (!(delta >= 0.0)) throw std::invalid_argument("problem.delta: delta must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("problem.horizon: must be > 0");
    constants.validate();
    if (delta == 0.0 && lambda > 0.0) {
        bool positive_at_origin = false;
        switch (f.family()) {
            case ConductivitySpec::Family::Constant:
            case ConductivitySpec::Family::BoundedOscillatory:
                positive_at_origin = f.param(0) > 0.0;
                break;
            case ConductivitySpec::Family::QuadraticTime:
                positive_at_origin = false;
                break;
            case ConductivitySpec::Family::AffineGrowth:
                positive_at_origin = f.param(0) > 0.0;
                break;
            case ConductivitySpec::Family::UserTable:
                positive_at_origin =
                    f.table().s_axis[0] == 0.0 && sampled_lower_bound(f, 0.0) > 0.0;
                break;
        }
        if (positive_at_origin)
            throw std::invalid_argument(
                "problem.delta: delta > 0 required when the conductivity is bounded below away "
                "from zero at s = 0 (the source would not be integrable at the origin)");
    }
}

// ---------------------------------------------------------------------------
// Nonlocal accumulator and source
// ---------------------------------------------------------------------------

NonlocalState accumulate(const ConductivitySpec& f, const SampledFn& u) {
    NonlocalState state{SampledFn::constant(u.grid, 0.0), 0};
    extend_accumulate(state, f, u);
    return state;
}

void extend_accumulate(NonlocalState& state, const ConductivitySpec& f, const SampledFn& u) {
    const Index n = u.size();
    const Index done = state.last_index;
    if (done >= n)
        throw std::invalid_argument("extend_accumulate: sample does not extend the state");
    if (u.grid[done] != state.integral.grid[done])
        throw std::invalid_argument("extend_accumulate: grids disagree at the resume node");

    Vector out(n);
    out.head(done + 1) = state.integral.values.head(done + 1);
    Real prev_f = eval_conductivity(f, u.grid[done], u.values[done]);
    for (Index k = done + 1; k < n; ++k) {
        const Real fk = eval_conductivity(f, u.grid[k], u.values[k]);
        out[k] = out[k - 1] + 0.5 * u.grid.spacing(k - 1) * (prev_f + fk);
        prev_f = fk;
    }
    state.integral = SampledFn{u.grid, std::move(out)};
    state.last_index = n - 1;
}

Real source_term(const ProblemSpec& spec, Real t, Real u_t, const NonlocalState& state) {
    const Real i_t = state.integral(t);
    const Real denom = spec.delta + i_t;
    if (!(denom > 0.0)) {
        std::ostringstream os;
        os << "source_term: singular source at t = " << t << " (delta = " << spec.delta
           << ", I(t) = " << i_t << ")";
        throw singular_source_error(os.str());
    }
    return spec.lambda * eval_conductivity(spec.f, t, u_t) / (denom * denom);
}

// ---------------------------------------------------------------------------
// Hypothesis auditor
// ---------------------------------------------------------------------------

namespace {

// Base grid plus midpoints over [lo, hi].
Vector refined_axis(Interval range, Index samples) {
    const Index n = 2 * samples - 1;
    Vector axis(n);
    for (Index i = 0; i < n; ++i)
        axis[i] = range.lo + (range.hi - range.lo) * static_cast<Real>(i) / static_cast<Real>(n - 1);
    return axis;
}

void record_violation(AuditCheck& check, SampleWitness w) {
    if (check.holds()) {
        check.verdict = AuditVerdict::Violated;
        check.witness = w;
    }
}

}  // namespace

HypothesisReport validate_hypotheses(const ProblemSpec& spec, Interval s_range, Interval u_range,
                                     Index samples) {
    if (samples < 2) throw std::invalid_argument("validate_hypotheses: need samples >= 2 per axis");
    if (!(s_range.hi >= s_range.lo) || !(u_range.hi >= u_range.lo) || !(s_range.lo >= 0.0))
        throw std::invalid_argument("validate_hypotheses: empty or negative sample range");

    const Vector s_axis = refined_axis(s_range, samples);
    const Vector u_axis = refined_axis(u_range, samples);
    const auto& c = spec.constants;

    HypothesisReport report;
    if (c.growth) report.growth_envelope = AuditCheck{};

    Eigen::ArrayXXd fsu(s_axis.size(), u_axis.size());
    for (Index i = 0; i < s_axis.size(); ++i)
        for (Index j = 0; j < u_axis.size(); ++j)
            fsu(i, j) = eval_conductivity(spec.f, s_axis[i], u_axis[j]);

    for (Index i = 0; i < s_axis.size(); ++i) {
        const Real s = s_axis[i];
        const Real s_omega = std::pow(s, c.omega);
        for (Index j = 0; j < u_axis.size(); ++j) {
            const Real u = u_axis[j];
            const Real fv = fsu(i, j);

            if (!leq(c.c1, fv)) record_violation(report.h1, {s, u, 0.0, c.c1, fv, false});
            if (!leq(fv, c.c2)) record_violation(report.h1, {s, u, 0.0, fv, c.c2, false});
            if (!leq(fv, c.quad_growth * s * s))
                record_violation(report.h2, {s, u, 0.0, fv, c.quad_growth * s * s, false});
            if (report.growth_envelope) {
                const Real upper = c.growth->c4 * std::abs(u) + c.growth->c5;
                if (!leq(c.growth->c3, fv))
                    record_violation(*report.growth_envelope, {s, u, 0.0, c.growth->c3, fv, false});
                if (!leq(fv, upper))
                    record_violation(*report.growth_envelope, {s, u, 0.0, fv, upper, false});
            }

            for (Index l = j + 1; l < u_axis.size(); ++l) {
                const Real diff = std::abs(fv - fsu(i, l));
                const Real du = std::abs(u - u_axis[l]);
                if (!leq(diff, c.lipschitz * du))
                    record_violation(report.h1, {s, u, u_axis[l], diff, c.lipschitz * du, true});
                if (!leq(diff, s_omega * du))
                    record_violation(report.h3, {s, u, u_axis[l], diff, s_omega * du, true});
            }
        }
    }

    // The c1 <= f and f <= M s^2 claims exclude each other on s < sqrt(c1/M);
    // flag the window whenever f really is bounded below at the range start.
    const Real window = std::sqrt(c.c1 / c.quad_growth);
    Real f_low = std::numeric_limits<Real>::infinity();
    for (Index j = 0; j < u_axis.size(); ++j) f_low = std::min(f_low, fsu(0, j));
    if (f_low >= c.c1 && s_range.lo < window) report.inconsistency_window = window;

    return report;
}

}  // namespace fractherm
