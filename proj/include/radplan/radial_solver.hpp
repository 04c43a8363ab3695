#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "radplan/nonlinearity.hpp"

namespace radplan {

/// Radial problem u'' + (N-1)u'/r = a(r)h(u) + b(r)g(u), u(0)=u0, u'(0)=0.
struct RadialProblem {
    int N = 3;
    ScalarFn a;
    ScalarFn b;
    NonlinearityPair pair;
    double u0 = 1.0;
};

struct GridConfig {
    double r_max = 1.0;
    int n_points = 1001;       // uniform grid 0 = r0 < ... < r_{n-1} = r_max
    double tol_abs = 1e-12;
    double tol_rel = 1e-12;
    int max_iter = 200;
    double blowup_cap = 1e12;  // iterate values beyond this flag blow-up
};

enum class SolveMethod { Picard, RungeKutta };

struct RadialSolution {
    std::vector<double> grid;
    std::vector<double> u;
    std::vector<double> du;
    int iterations = 0;
    bool converged = false;
    SolveMethod method = SolveMethod::Picard;
    std::optional<double> blowup_radius;  // first radius exceeding the cap
};

/// T[phi](r_i) = int_0^{r_i} t^{1-N} int_0^t s^{N-1} phi(s) ds dt by
/// cumulative composite trapezoid on the shared uniform grid. The outer
/// integrand at t=0 is the analytic limit 0. Throws std::runtime_error
/// (with the offending index in the message) on non-finite intermediates.
std::vector<double> nested_integral(std::span<const double> phi, int N,
                                    std::span<const double> grid);

/// Called with each retained successive-approximation iterate.
using IterateObserver = std::function<void(int iteration, std::span<const double> u)>;

/// Successive approximation u^n = u0 + T[a h(u^{n-1}) + b g(u^{n-1})],
/// stopping when the sup-norm change is <= tol_abs + tol_rel * sup|u^n|.
/// Iterates are pointwise nondecreasing in n for u0 >= s0. The derivative
/// is recovered exactly from the integrated form, du(r) = r^{1-N} I(r).
///
/// Blow-up (any iterate beyond cfg.blowup_cap, or a non-finite value) is
/// reported in-band: converged=false and blowup_radius set to the first
/// offending grid point. Exhausting max_iter leaves converged=false.
RadialSolution picard_solve(const RadialProblem& problem, const GridConfig& cfg,
                            const IterateObserver& observer = {});

/// Independent classical RK4 integration of the second-order ODE on the
/// same grid. The first step leaves r=0 by the series expansion
///   u(d) = u0 + c d^2/(2N),  u'(d) = c d / N,  c = a(0)h(u0) + b(0)g(u0),
/// avoiding the (N-1)/r singularity.
RadialSolution ode_oracle(const RadialProblem& problem, const GridConfig& cfg);

/// Mesh-independent correctness score: max over interior grid points of
/// |centered-difference (r^{N-1}u')' - r^{N-1}(a h(u) + b g(u))|
/// normalized per point by max(1, r^{N-1}(a h + b g)).
double residual(const RadialProblem& problem, const RadialSolution& sol);

/// Uniform grid helper: n points from 0 to r_max inclusive.
std::vector<double> uniform_grid(double r_max, int n_points);

}  // namespace radplan
