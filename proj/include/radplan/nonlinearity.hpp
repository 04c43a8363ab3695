#pragma once

#include <functional>
#include <string>
#include <vector>

namespace radplan {

using ScalarFn = std::function<double(double)>;

enum class PairKind { ModelLog, PowerPair, Custom };

/// A nonlinearity pair (h, g) with the declared zero s0 of g.
///
/// h is defined on [0,inf) with h(0)=0, h>0 and nondecreasing on (0,inf).
/// g is defined on (0,inf), negative below s0, zero at s0, positive and
/// nondecreasing above s0. Conditions are verified by sampling via
/// validate_pair; they are not assumed symbolically.
struct NonlinearityPair {
    ScalarFn h;
    ScalarFn g;
    double s0 = 1.0;
    PairKind kind = PairKind::Custom;

    /// h(u) = u, g(u) = u ln u, s0 = 1 (the production-planning pair).
    static NonlinearityPair model_log();

    /// h(u) = u^p, g(u) = u^q - s0^q. Built-in pair whose H-integral has a
    /// finite limit for p > 1; used to exercise blow-up handling.
    static NonlinearityPair power(double p, double q, double s0);

    static NonlinearityPair custom(ScalarFn h, ScalarFn g, double s0);
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    bool advisory = false;  // reported but not gating
    double sample = 0.0;    // first violating sample, if any
    double value = 0.0;     // function value there
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool passed = false;  // conjunction of non-advisory checks

    const ValidationCheck* find(const std::string& name) const;
};

/// Samples the pair on (0, s_max] and reports each structural condition as
/// pass/fail with the first violating sample. A non-finite value at any
/// sample fails the corresponding check outright.
///
/// The origin-limit condition (g -> 0 as s -> 0+) is reported as an advisory
/// check: solves start from u0 >= s0 and never evaluate g below s0, and the
/// library admits pairs like g(u) = u - 1 that violate it.
ValidationReport validate_pair(const NonlinearityPair& pair, int sample_count,
                               double s_max);

/// The transform H(s) = integral_{u0}^{s} dt / (h(t) + g(t)) together with
/// its numerically estimated limit H(inf).
///
/// h_infinity is estimated at construction by integrating decade by decade
/// up to 1e12: once the per-decade increments drop below 1e-14 the limit is
/// declared finite, otherwise +inf. A finite limit means the existence
/// envelope H^{-1}(Pbar(r)) stops at the radius where Pbar reaches it.
struct HTransform {
    NonlinearityPair pair;
    double u0 = 1.0;
    double h_infinity = 0.0;  // +inf when the tail integral diverges

    HTransform(NonlinearityPair p, double u0_value);
};

/// Adaptive-quadrature value of H(s), relative error <= 1e-10.
/// Throws std::domain_error if h+g <= 0 is detected at a quadrature node
/// and std::invalid_argument for s < u0.
double eval_H(const HTransform& ht, double s);

/// Inverse of H by bracket expansion and bisection; |H(s) - y| <= 1e-10 * max(1, y).
/// Throws std::range_error for y >= h_infinity (no finite preimage exists,
/// signalling a potential finite blow-up radius to the caller).
double eval_H_inv(const HTransform& ht, double y);

namespace detail {
/// Adaptive Simpson quadrature used by the H machinery and the analysis
/// module. Throws std::domain_error via the integrand when it does.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol);
}  // namespace detail

}  // namespace radplan
