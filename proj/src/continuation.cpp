#include "fractherm/continuation.hpp"

#include "fractherm/fracops.hpp"
#include "fractherm/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fractherm {

namespace {

bool leq(Real lhs, Real rhs) { return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs)); }

Index segment_cells(const ContinuationConfig& config, Real h, Real two_a) {
    const Real cells = std::ceil(config.grid_density * std::pow(h, two_a));
    return std::max<Index>(8, static_cast<Index>(cells));
}

}  // namespace

// ---------------------------------------------------------------------------
// Gronwall certificate
// ---------------------------------------------------------------------------

GronwallCertificate gronwall_majorant(const SampledFn& v, const SampledFn& w, Real a, Real exponent,
                                      Real tol, int max_iter) {
    if (v.size() != w.size() || (v.grid.points() != w.grid.points()).any())
        throw std::invalid_argument("gronwall_majorant: v and w must share one grid");
    if (!(w.values >= 0.0).all())
        throw std::invalid_argument("gronwall_majorant: w must be nonnegative");
    if (!(exponent > 0.0 && exponent < 1.0))
        throw std::invalid_argument("gronwall_majorant: exponent must lie in (0, 1)");
    if (!(a >= 0.0) || !std::isfinite(a))
        throw std::invalid_argument("gronwall_majorant: a must be finite and >= 0");
    if (!(tol > 0.0) || max_iter < 1)
        throw std::invalid_argument("gronwall_majorant: need tol > 0 and max_iter >= 1");

    const TimeGrid& grid = v.grid;
    const Real mu = -exponent;

    GronwallCertificate cert{w, a, exponent, w, 0, CertificateStatus::Unavailable, false, {}, {}};

    const Vector rhs = w.values + a * weakly_singular_sums(grid, mu, v.values);
    for (Index k = 0; k < v.size(); ++k) {
        if (!leq(v.values[k], rhs[k])) {
            cert.hypothesis_witness = k;
            break;
        }
    }

    Vector m = w.values;
    bool settled = false;
    for (int sweep = 1; sweep <= max_iter; ++sweep) {
        Vector next = w.values + a * weakly_singular_sums(grid, mu, m);
        const Real inc = (next - m).abs().maxCoeff();
        m = std::move(next);
        cert.iterations = sweep;
        if (!m.isFinite().all()) break;
        if (inc <= tol) {
            settled = true;
            break;
        }
    }
    cert.majorant = SampledFn{grid, m};
    if (!settled) return cert;  // Unavailable: budget ran out or the sums overflowed

    cert.holds = true;
    for (Index k = 0; k < v.size(); ++k) {
        if (!leq(v.values[k], cert.majorant.values[k])) {
            cert.holds = false;
            cert.majorant_witness = k;
            break;
        }
    }
    cert.status = cert.holds ? CertificateStatus::Holds : CertificateStatus::Fails;
    return cert;
}

// ---------------------------------------------------------------------------
// Global solution plumbing
// ---------------------------------------------------------------------------

ContinuationConfig ContinuationConfig::defaults(const ProblemSpec& spec) {
    ContinuationConfig config;
    config.blowup_threshold = 1e6 * std::max(Real(1), std::abs(spec.u0));
    return config;
}

void ContinuationConfig::validate() const {
    if (!(step_b > 0.0)) throw std::invalid_argument("continuation.step_b must be > 0");
    if (!(blowup_threshold > 0.0))
        throw std::invalid_argument("continuation.blowup_threshold must be > 0");
    if (max_segments < 1) throw std::invalid_argument("continuation.max_segments must be >= 1");
    if (!(grid_density > 0.0)) throw std::invalid_argument("continuation.grid_density must be > 0");
    if (!(grading >= 1.0)) throw std::invalid_argument("continuation.grading must be >= 1");
}

GlobalSolution GlobalSolution::from_segment(SampledFn segment, SolveReport report, Real horizon) {
    GlobalSolution solution;
    solution.beta = segment.grid.back();
    solution.horizon = horizon;
    solution.segments.push_back(std::move(segment));
    solution.last_report = std::move(report);
    return solution;
}

SampledFn GlobalSolution::glued() const {
    if (segments.empty()) throw std::logic_error("GlobalSolution::glued: no segments");
    Index total = segments.front().size();
    for (std::size_t i = 1; i < segments.size(); ++i) total += segments[i].size() - 1;
    Vector points(total), values(total);
    Index at = segments.front().size();
    points.head(at) = segments.front().grid.points();
    values.head(at) = segments.front().values;
    for (std::size_t i = 1; i < segments.size(); ++i) {
        const Index m = segments[i].size() - 1;
        points.segment(at, m) = segments[i].grid.points().tail(m);
        values.segment(at, m) = segments[i].values.tail(m);
        at += m;
    }
    return {TimeGrid(std::move(points)), std::move(values)};
}

// ---------------------------------------------------------------------------
// History term and extension map
// ---------------------------------------------------------------------------

namespace {

// Frozen pieces of a stored solution that every extension sweep reuses.
struct HistoryContext {
    SampledFn glued;
    Vector f_hist;             // conductivity along the stored trajectory
    NonlocalState hist_state;  // accumulator over [0, beta]

    HistoryContext(const GlobalSolution& solution, const ProblemSpec& spec)
        : glued(solution.glued()),
          f_hist(glued.size()),
          hist_state(accumulate(spec.f, glued)) {
        for (Index j = 0; j < glued.size(); ++j)
            f_hist[j] = eval_conductivity(spec.f, glued.grid[j], glued.values[j]);
    }
};

Real guarded_denominator(const ProblemSpec& spec, Real i_t, Real t) {
    const Real denom = spec.delta + i_t;
    if (!(denom > 0.0))
        throw singular_source_error("history term: vanishing denominator at t = "
                                    + std::to_string(t));
    return denom;
}

Real history_term_impl(const HistoryContext& ctx, Real t, const ProblemSpec& spec, Real i_total) {
    const Real two_a = 2.0 * spec.alpha.value();
    const Real h_sum = weakly_singular_history(ctx.glued.grid, two_a - 1.0, ctx.f_hist, t);
    const Real denom = guarded_denominator(spec, i_total, t);
    return spec.u0 + spec.lambda / gamma_fn(two_a) * h_sum / (denom * denom);
}

}  // namespace

Real history_term(const GlobalSolution& solution, Real t, const ProblemSpec& spec) {
    const HistoryContext ctx(solution, spec);
    const Real beta = solution.beta;
    if (!(t >= beta)) throw std::invalid_argument("history_term: t must be >= beta");
    // Accumulator continued with u frozen at u(beta); the conductivity still
    // depends on s, so integrate it on a fixed fine mesh.
    Real tail = 0.0;
    if (t > beta) {
        const Real u_beta = ctx.glued.values[ctx.glued.size() - 1];
        const int cells = 256;
        Real prev = eval_conductivity(spec.f, beta, u_beta);
        const Real dt = (t - beta) / cells;
        for (int i = 1; i <= cells; ++i) {
            const Real s = beta + dt * i;
            const Real cur = eval_conductivity(spec.f, s, u_beta);
            tail += 0.5 * dt * (prev + cur);
            prev = cur;
        }
    }
    const Real i_total = ctx.hist_state.integral.values[ctx.glued.size() - 1] + tail;
    return history_term_impl(ctx, t, spec, i_total);
}

Real history_term(const GlobalSolution& solution, Real t, const ProblemSpec& spec,
                  const SampledFn& candidate) {
    const HistoryContext ctx(solution, spec);
    const Real beta = solution.beta;
    if (!(t >= beta)) throw std::invalid_argument("history_term: t must be >= beta");
    if (std::abs(candidate.grid.front() - beta) > 1e-9 * std::max(Real(1), beta))
        throw std::invalid_argument("history_term: candidate grid must start at beta");
    const NonlocalState cand_state = accumulate(spec.f, candidate);
    const Real i_total =
        ctx.hist_state.integral.values[ctx.glued.size() - 1] + cand_state.integral(t);
    return history_term_impl(ctx, t, spec, i_total);
}

namespace {

// Extension sweep on the combined grid [0, beta] u [beta, beta + h]: applies
// the solution map with history values frozen, returning values on the
// candidate's grid. Entry 0 is the history term at beta.
struct ExtensionOperator {
    const ProblemSpec& spec;
    HistoryContext ctx;
    Index n_hist;
    TimeGrid combined;

    static TimeGrid make_combined(const SampledFn& glued, const TimeGrid& ext_grid) {
        if (ext_grid.front() != glued.grid.back())
            throw std::invalid_argument("extension grid must start exactly at beta");
        const Index n_hist = glued.size();
        const Index n_ext = ext_grid.size();
        Vector points(n_hist + n_ext - 1);
        points.head(n_hist) = glued.grid.points();
        points.tail(n_ext - 1) = ext_grid.points().tail(n_ext - 1);
        return TimeGrid(std::move(points));
    }

    ExtensionOperator(const GlobalSolution& solution, const ProblemSpec& spec_,
                      const TimeGrid& ext_grid)
        : spec(spec_),
          ctx(solution, spec_),
          n_hist(ctx.glued.size()),
          combined(make_combined(ctx.glued, ext_grid)) {}

    [[nodiscard]] SampledFn apply(const SampledFn& v) const {
        const Index n_ext = v.size();
        const Index n_total = combined.size();
        const Real two_a = 2.0 * spec.alpha.value();

        Vector f_comb(n_total);
        f_comb.head(n_hist) = ctx.f_hist;
        for (Index i = 1; i < n_ext; ++i)
            f_comb[n_hist - 1 + i] = eval_conductivity(spec.f, v.grid[i], v.values[i]);

        Vector u_comb(n_total);
        u_comb.head(n_hist) = ctx.glued.values;
        u_comb.tail(n_ext - 1) = v.values.tail(n_ext - 1);
        NonlocalState state = ctx.hist_state;
        extend_accumulate(state, spec.f, SampledFn{combined, u_comb});

        const Vector sums = weakly_singular_sums_tail(combined, two_a - 1.0, f_comb, n_hist);
        const Real scale = spec.lambda / gamma_fn(two_a);

        Vector out(n_ext);
        out[0] = history_term_impl(ctx, combined[n_hist - 1], spec,
                                   ctx.hist_state.integral.values[n_hist - 1]);
        for (Index i = 1; i < n_ext; ++i) {
            const Index k = n_hist - 1 + i;
            const Real denom = guarded_denominator(spec, state.integral.values[k], combined[k]);
            out[i] = spec.u0 + scale * sums[k] / (denom * denom);
        }
        return {v.grid, std::move(out)};
    }

    /// u1(t) along the extension nodes for the given candidate accumulator.
    [[nodiscard]] Vector history_values(const SampledFn& v) const {
        const Index n_ext = v.size();
        Vector u_comb(combined.size());
        u_comb.head(n_hist) = ctx.glued.values;
        u_comb.tail(n_ext - 1) = v.values.tail(n_ext - 1);
        NonlocalState state = ctx.hist_state;
        extend_accumulate(state, spec.f, SampledFn{combined, u_comb});
        Vector u1(n_ext);
        for (Index i = 0; i < n_ext; ++i) {
            const Index k = n_hist - 1 + i;
            u1[i] = history_term_impl(ctx, combined[k], spec, state.integral.values[k]);
        }
        return u1;
    }
};

}  // namespace

SampledFn extension_map(const SampledFn& v, const GlobalSolution& solution,
                        const ProblemSpec& spec) {
    if (std::abs(v.grid.front() - solution.beta) > 1e-9 * std::max(Real(1), solution.beta))
        throw std::invalid_argument("extension_map: candidate grid must start at beta");
    Vector shifted = v.grid.points();
    shifted[0] = solution.beta;
    const SampledFn aligned{TimeGrid(std::move(shifted)), v.values};
    const ExtensionOperator op(solution, spec, aligned.grid);
    // Membership in E_h requires v(beta) = u1(beta); enforce it loosely, the
    // stored endpoint differs from u1 only by the previous solve's residual.
    const Real u1_beta = history_term_impl(op.ctx, solution.beta, spec,
                                           op.ctx.hist_state.integral.values[op.n_hist - 1]);
    if (std::abs(v.values[0] - u1_beta) > 1e-4 * std::max(Real(1), std::abs(u1_beta)))
        throw std::invalid_argument("extension_map: candidate must start from the history term");
    return op.apply(aligned);
}

// ---------------------------------------------------------------------------
// Segment extension and the global loop
// ---------------------------------------------------------------------------

namespace {

std::optional<EscapeWitness> find_escape(const SampledFn& u, Real threshold, Index from = 0) {
    for (Index k = from; k < u.size(); ++k) {
        const Real val = u.values[k];
        if (!std::isfinite(val) || std::abs(val) > threshold)
            return EscapeWitness{u.grid[k], val, threshold};
    }
    return std::nullopt;
}

// Shared iteration driver for extension sweeps. The glue node is pinned to the
// stored endpoint, so segment boundaries stay bit-identical.
struct ExtensionRun {
    SampledFn v;
    SolveReport report;
};

ExtensionRun iterate_extension(const ExtensionOperator& op, Real glue_value, Real tol,
                               int max_iter) {
    const Index n_ext = op.combined.size() - op.n_hist + 1;
    Vector ext_points(n_ext);
    ext_points = op.combined.points().tail(n_ext);
    TimeGrid ext_grid{std::move(ext_points)};

    SampledFn v = SampledFn::constant(ext_grid, glue_value);
    SolveReport report;
    for (int iter = 1; iter <= max_iter; ++iter) {
        SampledFn next = op.apply(v);
        next.values[0] = glue_value;
        report.iterations = iter;
        if (!next.values.isFinite().all()) {
            report.status = SolveStatus::Diverged;
            report.sup_updates.push_back(std::numeric_limits<Real>::infinity());
            break;
        }
        const Real update = sup_distance(next, v);
        report.sup_updates.push_back(update);
        v = std::move(next);
        if (update <= tol) {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    return {std::move(v), std::move(report)};
}

}  // namespace

GlobalSolution extend_segment(GlobalSolution solution, const ProblemSpec& spec,
                              const ContinuationConfig& config, Real tol, int max_iter) {
    if (solution.verdict)
        throw std::invalid_argument("extend_segment: solution already carries a terminal verdict");
    const Real remaining = spec.horizon - solution.beta;
    if (!(remaining > 0.0))
        throw std::invalid_argument("extend_segment: nothing left before the horizon");

    const Real two_a = 2.0 * spec.alpha.value();
    // Per-extension radius with the continuation clamp h <= 1.
    const Real h =
        std::min({existence_radius_unclamped(config.step_b, spec), Real(1), remaining});
    const TimeGrid ext_grid = TimeGrid::graded(solution.beta, solution.beta + h,
                                               segment_cells(config, h, two_a), config.grading);

    const ExtensionOperator op(solution, spec, ext_grid);
    const Real glue_value = op.ctx.glued.values[op.n_hist - 1];
    ExtensionRun run = iterate_extension(op, glue_value, tol, max_iter);

    if (run.report.status == SolveStatus::Converged) {
        const Vector u1 = op.history_values(run.v);
        run.report.in_ball = (run.v.values - u1).abs().maxCoeff() <= config.step_b;
        solution.beta = run.v.grid.back();
        solution.segments.push_back(std::move(run.v));
        const SampledFn whole = solution.glued();
        const ResidualPair res = residuals(whole, spec);
        run.report.integral_residual = res.integral;
        run.report.differential_residual = res.differential;
        run.report.contraction_estimate = run.report.sup_updates.size() > 1
                                              ? run.report.sup_updates.back()
                                                    / run.report.sup_updates.front()
                                              : 0.0;
        solution.last_report = std::move(run.report);
        return solution;
    }

    // Failed sweep: escape if the last finite iterate already left the window,
    // solver failure otherwise. The escaping iterate is kept as an explicit
    // blow-up record.
    solution.last_report = std::move(run.report);
    if (auto witness = find_escape(run.v, config.blowup_threshold)) {
        solution.escape = witness;
        solution.verdict = Verdict::NoncontinuableEscape;
        solution.beta = run.v.grid.back();
        solution.segments.push_back(std::move(run.v));
    } else {
        solution.verdict = Verdict::SolverFailure;
    }
    return solution;
}

Termination classify_termination(const GlobalSolution& solution,
                                 const ContinuationConfig& config) {
    if (solution.segments.empty())
        throw std::invalid_argument("classify_termination: empty solution");
    if (solution.beta >= solution.horizon) return {Verdict::ReachedHorizon, std::nullopt};
    if (auto witness = find_escape(solution.glued(), config.blowup_threshold))
        return {Verdict::NoncontinuableEscape, witness};
    return {Verdict::SolverFailure, std::nullopt};
}

namespace {

// Kernel coefficient for the attached certificate: the smallest constant a
// with lambda * f(s_j, u_j) / (Gamma(2a) (delta + I_k)^2) <= a |u_j| along the
// computed trajectory, so the Gronwall hypothesis holds termwise. Empty when
// the trajectory touches zero.
std::optional<Real> certificate_coefficient(const SampledFn& u, const ProblemSpec& spec) {
    const Real u_min = u.values.abs().minCoeff();
    if (!(u_min > 0.0)) return std::nullopt;
    const NonlocalState state = accumulate(spec.f, u);
    Real rho = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
        const Real f_j = eval_conductivity(spec.f, u.grid[j], u.values[j]);
        const Real denom = spec.delta + state.integral.values[std::max<Index>(j, 1)];
        if (!(denom > 0.0)) return std::nullopt;
        rho = std::max(rho, f_j / (denom * denom));
    }
    return spec.lambda * rho / (gamma_fn(2.0 * spec.alpha.value()) * u_min);
}

void attach_certificate(GlobalSolution& solution, const ProblemSpec& spec, Real tol,
                        int max_iter) {
    const SampledFn u = solution.glued();
    const HypothesisReport audit = validate_hypotheses(
        spec, {u.grid.front(), u.grid.back()}, {u.values.minCoeff(), u.values.maxCoeff()}, 17);
    if (!audit.h1.holds()) return;

    const auto a = certificate_coefficient(u, spec);
    if (!a) return;

    const SampledFn v{u.grid, u.values.abs()};
    const SampledFn w = SampledFn::constant(u.grid, std::abs(spec.u0));
    const Real exponent = 1.0 - 2.0 * spec.alpha.value();
    const Real cert_tol = std::max(tol, 1e-12) * std::max(Real(1), std::abs(spec.u0));
    solution.certificate = gronwall_majorant(v, w, *a, exponent, cert_tol, std::max(max_iter, 64));
}

}  // namespace

GlobalSolution global_solve(const ProblemSpec& spec, const ContinuationConfig& config, Real tol,
                            int max_iter) {
    spec.validate();
    config.validate();

    const Real two_a = 2.0 * spec.alpha.value();
    const LocalBall ball = make_local_ball(config.step_b, spec);
    const TimeGrid grid0 =
        TimeGrid::uniform(0.0, ball.h, segment_cells(config, ball.h, two_a));
    LocalSolution first = solve_local(spec, ball, grid0, tol, max_iter);
    GlobalSolution solution =
        GlobalSolution::from_segment(std::move(first.u), std::move(first.report), spec.horizon);

    if (!solution.last_report.converged()) {
        if (auto witness = find_escape(solution.segments.front(), config.blowup_threshold)) {
            solution.escape = witness;
            solution.verdict = Verdict::NoncontinuableEscape;
        } else {
            solution.verdict = Verdict::SolverFailure;
        }
        return solution;
    }

    while (!solution.verdict) {
        if (solution.beta >= solution.horizon) {
            solution.verdict = Verdict::ReachedHorizon;
            break;
        }
        if (auto witness = find_escape(solution.segments.back(), config.blowup_threshold)) {
            solution.escape = witness;
            solution.verdict = Verdict::NoncontinuableEscape;
            break;
        }
        if (static_cast<int>(solution.segments.size()) >= config.max_segments) {
            solution.verdict = Verdict::SolverFailure;
            break;
        }
        solution = extend_segment(std::move(solution), spec, config, tol, max_iter);
    }

    if (solution.verdict == Verdict::ReachedHorizon) {
        try {
            attach_certificate(solution, spec, tol, max_iter);
        } catch (const std::exception&) {
            // audit could not be evaluated (e.g. trajectory left a user table);
            // the certificate stays absent
        }
    }
    return solution;
}

}  // namespace fractherm
