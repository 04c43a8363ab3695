#pragma once

#include <span>
#include <vector>

#include "radplan/nonlinearity.hpp"
#include "radplan/radial_solver.hpp"

namespace radplan {

enum class Asymptotic { Large, Bounded, Inconclusive };

struct AsymptoticReport {
    double p_under_estimate = 0.0;  // +inf when the probe sequence keeps growing
    double p_bar_estimate = 0.0;
    Asymptotic classification = Asymptotic::Inconclusive;
    std::vector<double> probe_radii;
    std::vector<double> p_under_values;
    std::vector<double> p_bar_values;
};

struct BoundsReport {
    bool a1_holds = false;
    double c1 = 0.0;  // H^{-1}(Pbar(r_max)), +inf beyond the envelope reach
    bool a2_holds = false;
    double c2 = 0.0;  // sup(a+b) * (h(u(r_max)) + g(u(r_max)))
    bool lower_envelope_holds = false;  // u >= u0 + Punder pointwise
    bool upper_envelope_holds = false;  // u <= H^{-1}(Pbar) pointwise
    double min_lower_margin = 0.0;
    double min_upper_margin = 0.0;
    double min_a1_margin = 0.0;
    double min_a2_margin = 0.0;
    double worst_margin = 0.0;
    double tolerance = 0.0;  // slack used by the booleans
};

struct ConvexityReport {
    bool coefficients_nondecreasing = false;  // precondition, checked by sampling
    bool convex = false;
    double min_second_difference = 0.0;  // min interior (u_{i+1}-2u_i+u_{i-1})/dr^2
    double u2_origin = 0.0;              // one-sided 2(u_1-u_0)/dr^2
    double u2_expected = 0.0;            // (a(0)h(u0)+b(0)g(u0))/N
    bool origin_consistent = false;
    double tolerance = 0.0;
};

enum class LimitStatus { Converged, DivergentBoth, Inconclusive };

struct LimitIdentityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    LimitStatus status = LimitStatus::Inconclusive;
};

/// m(s) = a(s) h(u0) when g(u0) = 0 (tested with absolute tolerance 1e-12),
/// otherwise (a(s)+b(s)) * min{h(u0), g(u0)}.
double m_function(const RadialProblem& problem, double s);

/// Envelope integrals Pbar(r) = T[a+b](r) and Punder(r) = T[m](r) evaluated
/// by adaptive quadrature (relative error <= 1e-8), independent of the
/// solver's grid quadrature.
double p_bar(const RadialProblem& problem, double r);
double p_under(const RadialProblem& problem, double r);

/// Evaluates the envelopes along the probe schedule and classifies:
/// Large when Punder still grows >= 10x across the last probe decade,
/// Bounded when Pbar's last two increments fall below 1e-10 * Pbar,
/// Inconclusive otherwise (the dichotomy is not exhaustive).
AsymptoticReport classify(const RadialProblem& problem,
                          std::span<const double> probe_schedule);

/// Verifies, at every grid point of a converged solution,
///   u0 <= u(r) <= H^{-1}(Pbar(r)),  u(r) >= u0 + Punder(r),
///   0 <= u'(r) <= C2 (r+1)
/// with C2 the concrete constant sup(a+b)(h(u(r_max)) + g(u(r_max))).
/// Radii where Pbar exceeds H(inf) get a +inf upper bound. Violations are
/// report entries, never exceptions.
BoundsReport check_bounds(const RadialProblem& problem, const RadialSolution& sol,
                          const HTransform& ht);

/// Interior second differences of u must be >= -1e-8 * max(1, max|u|);
/// additionally checks the one-sided u''(0) against (a(0)h(u0)+b(0)g(u0))/N.
/// Meaningful when a and b are nondecreasing (sampled).
ConvexityReport check_convexity(const RadialProblem& problem,
                                const RadialSolution& sol);

/// Both sides of the tail identity
///   lim_{r->inf} T[a+b](r) = (1/(N-2)) int_0^inf r (a(r)+b(r)) dr,
/// the left side extrapolated from the last two schedule radii with the
/// R^{2-N} tail model. Requires N >= 3 (std::invalid_argument otherwise).
/// A divergent right-hand tail yields +inf on both sides when Pbar also
/// diverges, Inconclusive otherwise.
LimitIdentityResult limit_identity(const RadialProblem& problem,
                                   std::span<const double> r_max_schedule);

}  // namespace radplan
