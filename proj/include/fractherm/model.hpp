#pragma once

#include "fractherm/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>

namespace fractherm {

/// Raised when the nonlocal source is evaluated with a vanishing denominator
/// (delta = 0 and accumulated integral still 0).
struct singular_source_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Gridded conductivity samples with bilinear interpolation. Axes are strictly
/// ascending; queries outside the rectangle are errors.
struct ConductivityTable {
    Vector s_axis;
    Vector u_axis;
    Eigen::ArrayXXd values;  // values(i, j) = f(s_axis[i], u_axis[j]), all >= 0

    void validate() const;
    [[nodiscard]] Real interpolate(Real s, Real u) const;
};

/// Closed registry of conductivity families. Every family is finite and
/// nonnegative for s >= 0, u real.
class ConductivitySpec {
public:
    enum class Family { Constant, BoundedOscillatory, QuadraticTime, AffineGrowth, UserTable };

    /// f = c
    static ConductivitySpec constant(Real c);
    /// f = c + eps * sin^2(u)
    static ConductivitySpec bounded_oscillatory(Real c, Real eps);
    /// f = a * s^2 * (1 + eps * sin^2(u))
    static ConductivitySpec quadratic_time(Real a, Real eps);
    /// f = min(c3 + c4 * |u|, cap)
    static ConductivitySpec affine_growth(Real c3, Real c4, Real cap);
    static ConductivitySpec user_table(ConductivityTable table);

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] Real param(int i) const { return params_[i]; }
    [[nodiscard]] const ConductivityTable& table() const { return *table_; }

private:
    ConductivitySpec(Family f, Real p0, Real p1, Real p2) : family_(f), params_{p0, p1, p2} {}
    Family family_;
    Real params_[3];
    std::shared_ptr<const ConductivityTable> table_;
};

Real eval_conductivity(const ConductivitySpec& f, Real s, Real u);

/// The constants of the growth hypotheses: bounds c1 <= f <= c2, Lipschitz
/// constant in u, quadratic-growth constant (f <= M s^2), modulus exponent
/// omega, and the optional affine growth envelope c3 <= |f| <= c4|x| + c5.
struct HypothesisConstants {
    Real c1 = 1.0;
    Real c2 = 1.0;
    Real lipschitz = 1.0;
    Real quad_growth = 1.0;  // M
    Real omega = 2.0;

    struct GrowthEnvelope {
        Real c3, c4, c5;
    };
    std::optional<GrowthEnvelope> growth;

    void validate() const;
};

/// The full initial value problem: order alpha, coupling lambda, initial value
/// u0, conductivity, hypothesis constants, denominator regularization delta,
/// and the finite horizon the run aims for.
///
/// delta enters the source as lambda * f / (delta + I)^2. With delta = 0 the
/// source is the unregularized model; any conductivity with a positive value
/// at s = 0 then makes it non-integrable at the origin, so such problems
/// require delta > 0.
struct ProblemSpec {
    FracOrder alpha;  // model order; operators act with 2 * alpha
    Real lambda;      // coupling, >= 0 (0 decouples the source entirely)
    Real u0;
    ConductivitySpec f;
    HypothesisConstants constants;
    Real delta;
    Real horizon;

    void validate() const;
    [[nodiscard]] FracOrder order2a() const { return FracOrder(2.0 * alpha.value()); }
};

/// Running accumulator I(t) = integral of f(s, u(s)) over [t_0, t], built by
/// the trapezoid rule; nondecreasing for nonnegative f, I(t_0) = 0.
struct NonlocalState {
    SampledFn integral;
    Index last_index;
};

/// Full trapezoid accumulation of f along the sample u (incremental: each node
/// extends the previous partial sum).
[[nodiscard]] NonlocalState accumulate(const ConductivitySpec& f, const SampledFn& u);

/// Extends an existing state over the (longer) sample u; nodes up to
/// state.last_index are kept as already summed.
void extend_accumulate(NonlocalState& state, const ConductivitySpec& f, const SampledFn& u);

/// The regularized nonlocal source lambda * f(t, u_t) / (delta + I(t))^2.
/// The state must cover t; with delta = 0 and I(t) = 0 the source is singular.
[[nodiscard]] Real source_term(const ProblemSpec& spec, Real t, Real u_t,
                               const NonlocalState& state);

// ---------------------------------------------------------------------------
// Hypothesis auditor
// ---------------------------------------------------------------------------

struct Interval {
    Real lo, hi;
};

/// Sample point at which a claimed inequality failed: lhs > rhs at (s, u)
/// (pairwise checks also carry the second state value v).
struct SampleWitness {
    Real s = 0.0;
    Real u = 0.0;
    Real v = 0.0;
    Real lhs = 0.0;
    Real rhs = 0.0;
    bool pairwise = false;
};

enum class AuditVerdict { HoldsOnSample, Violated };

struct AuditCheck {
    AuditVerdict verdict = AuditVerdict::HoldsOnSample;
    std::optional<SampleWitness> witness;

    [[nodiscard]] bool holds() const noexcept { return verdict == AuditVerdict::HoldsOnSample; }
};

/// Sampling verdicts for the growth hypotheses. Verdicts are per-sample
/// statements, not certificates; violations carry an explicit witness.
struct HypothesisReport {
    AuditCheck h1;  // c1 <= f <= c2 and empirical Lipschitz quotient <= lipschitz
    AuditCheck h2;  // f <= M s^2
    AuditCheck h3;  // |f(s,u) - f(s,v)| <= s^omega |u - v|
    std::optional<AuditCheck> growth_envelope;  // c3 <= |f| <= c4|u| + c5

    /// End of the window s < sqrt(c1/M) on which the bounds of h1 and h2
    /// cannot both hold; flagged when f is bounded below away from zero at
    /// the low end of the sampled s-range.
    std::optional<Real> inconsistency_window;

    [[nodiscard]] bool all_hold() const {
        return h1.holds() && h2.holds() && h3.holds()
               && (!growth_envelope || growth_envelope->holds());
    }
};

/// Samples the claimed hypotheses on a grid over s_range x u_range (plus
/// midpoint refinement). samples >= 2 per axis, ranges nonempty.
[[nodiscard]] HypothesisReport validate_hypotheses(const ProblemSpec& spec, Interval s_range,
                                                   Interval u_range, Index samples);

}  // namespace fractherm
