#pragma once

#include "fractherm/model.hpp"
#include "fractherm/picard.hpp"
#include "fractherm/types.hpp"

#include <optional>
#include <vector>

namespace fractherm {

enum class Verdict {
    ReachedHorizon,        // beta >= horizon
    NoncontinuableEscape,  // some node left [-B, B]; carries the witness t*
    SolverFailure,         // iteration exhausted or blown up without a witness
};

struct EscapeWitness {
    Real t_star;
    Real value;
    Real threshold;
};

enum class CertificateStatus {
    Holds,        // majorant constructed and v <= majorant at every node
    Fails,        // v exceeds the majorant; hypothesis witness recorded
    Unavailable,  // iteration did not settle within its budget
};

/// Constructive realization of the generalized Gronwall bound: the majorant is
/// the limit of m^0 = w, m^{j+1} = w + a * int_0^t m^j / (t-s)^exponent, and
/// certifies v whenever v satisfies the same inequality discretely.
struct GronwallCertificate {
    SampledFn w;
    Real a;
    Real exponent;  // in (0, 1); kernel is (t - s)^(-exponent)
    SampledFn majorant;
    int iterations = 0;
    CertificateStatus status = CertificateStatus::Unavailable;
    bool holds = false;
    std::optional<Index> hypothesis_witness;  // node violating v <= w + a*T[v]
    std::optional<Index> majorant_witness;    // node violating v <= majorant
};

/// Checks the hypothesis v <= w + a * T[v] discretely, then iterates the
/// majorant until the sup increment falls below tol. A budget overrun is
/// reported as Unavailable, distinct from a refuted certificate.
[[nodiscard]] GronwallCertificate gronwall_majorant(const SampledFn& v, const SampledFn& w, Real a,
                                                    Real exponent, Real tol, int max_iter);

/// Escape detection window and per-extension solver knobs.
struct ContinuationConfig {
    Real step_b = 1.0;          // per-extension ball radius
    Real blowup_threshold = 0;  // escape bound B; defaults() sets 1e6 * max(1, |u0|)
    int max_segments = 32;
    Real grid_density = 256.0;  // cells per unit^(2 alpha) of segment length
    Real grading = 2.0;         // extension-grid clustering toward the segment start

    static ContinuationConfig defaults(const ProblemSpec& spec);
    void validate() const;
};

/// Ordered solution segments with bit-identical values at shared boundary
/// nodes. beta is the right end reached so far; verdict stays empty while the
/// solution is still continuable.
struct GlobalSolution {
    std::vector<SampledFn> segments;
    Real beta = 0.0;
    Real horizon = 0.0;  // target the run aims for
    std::optional<Verdict> verdict;
    std::optional<EscapeWitness> escape;
    SolveReport last_report;
    std::optional<GronwallCertificate> certificate;

    static GlobalSolution from_segment(SampledFn segment, SolveReport report, Real horizon);

    /// Concatenation of all segments, shared boundary nodes stored once.
    [[nodiscard]] SampledFn glued() const;
};

/// The memory contribution of the stored solution over [0, beta] when
/// extending to time t >= beta:
///   u1(t) = u0 + (lambda / Gamma(2a)) * H(t) / (delta + I(t))^2,
/// with H(t) the kernel integral over the frozen history and I(t) the
/// accumulator continued past beta. Without a candidate extension the
/// accumulator continues with u frozen at u(beta); the overload accounts for
/// the candidate the solver is iterating on.
[[nodiscard]] Real history_term(const GlobalSolution& solution, Real t, const ProblemSpec& spec);
[[nodiscard]] Real history_term(const GlobalSolution& solution, Real t, const ProblemSpec& spec,
                                const SampledFn& candidate);

/// One application of the extension map on the candidate's grid, which must
/// start at beta: (Kv)(t) = u1(t) + local kernel integral of f(s, v(s)) over
/// [beta, t], denominator frozen at the outer node. (Kv)(beta) = u1(beta).
[[nodiscard]] SampledFn extension_map(const SampledFn& v, const GlobalSolution& solution,
                                      const ProblemSpec& spec);

/// Extends the solution by one segment of length min{radius(step_b), 1,
/// horizon - beta} on a grid graded toward beta, Picard-iterating the
/// extension map from the constant continuation. Failure and escape become
/// verdicts on the returned solution, never silent truncation.
[[nodiscard]] GlobalSolution extend_segment(GlobalSolution solution, const ProblemSpec& spec,
                                            const ContinuationConfig& config, Real tol,
                                            int max_iter);

struct Termination {
    Verdict verdict;
    std::optional<EscapeWitness> escape;
};

/// reached-horizon if beta >= horizon; otherwise noncontinuable-escape at the
/// first node with |u| > B (or non-finite u); otherwise solver-failure.
[[nodiscard]] Termination classify_termination(const GlobalSolution& solution,
                                               const ContinuationConfig& config);

/// First segment on [0, radius(step_b)], then extensions until the horizon is
/// reached, the trajectory escapes [-B, B], or the segment budget runs out.
/// When the run reaches its horizon and the sampled H1 bounds pass along the
/// trajectory, a Gronwall certificate for |u| with constant forcing |u0| is
/// attached.
[[nodiscard]] GlobalSolution global_solve(const ProblemSpec& spec, const ContinuationConfig& config,
                                          Real tol, int max_iter);

}  // namespace fractherm
