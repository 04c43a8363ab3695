#pragma once

#include <span>
#include <utility>
#include <vector>

#include "radplan/radial_solver.hpp"

namespace radplan {

/// Stochastic production-planning instance: N goods, diffusion vector sigma,
/// discount rate alpha. Induces the radial problem with a(r) = r^2/|sigma|^4,
/// b(r) = 2 alpha / |sigma|^2 and the (u, u ln u) nonlinearity pair (s0 = 1).
struct PlanningModel {
    int N = 3;
    std::vector<double> sigma;
    double alpha = 1.0;
    double u0 = 1.0;
    double sigma_sq = 0.0;  // |sigma|^2
    double sigma_4 = 0.0;   // |sigma|^4
};

/// Validates the parameters (every sigma_i nonzero, alpha > 0, u0 >= 1) and
/// returns the model together with its induced radial problem.
std::pair<PlanningModel, RadialProblem> build_model(int N,
                                                    std::vector<double> sigma,
                                                    double alpha, double u0);

/// Closed forms for the model's H machinery and envelopes:
///   H(s)      = ln(ln s + 1) - ln(ln u0 + 1)
///   H^{-1}(y) = exp((1 + ln u0) e^y - 1)
///   Pbar(r)   = r^4 / (4 (N+2) |sigma|^4) + alpha r^2 / (N |sigma|^2)
///   Punder(r) = r^4 / (4 (N+2) |sigma|^4)                      if u0 = 1
///             = min{u0, u0 ln u0} * Pbar(r)                    otherwise
/// The u0 != 1 prefactor is min{h(u0), g(u0)}, i.e. the general envelope
/// constant rather than min{1, u0 ln u0}.
double closed_H(const PlanningModel& model, double s);
double closed_H_inv(const PlanningModel& model, double y);
double closed_p_bar(const PlanningModel& model, double r);
double closed_p_under(const PlanningModel& model, double r);

/// Radial value/policy field built from a converged solution of the induced
/// problem. u and u' are linearly interpolated on the grid; evaluations are
/// pure and safe to call concurrently.
class PolicyField {
public:
    PolicyField(PlanningModel model, RadialSolution solution);

    const PlanningModel& model() const { return model_; }
    const RadialSolution& solution() const { return sol_; }
    double r_max() const { return sol_.grid.back(); }

    /// Linear interpolation of u / u' at radius r in [0, r_max].
    double u_at(double r) const;
    double du_at(double r) const;

private:
    PlanningModel model_;
    RadialSolution sol_;
    double dr_ = 0.0;
};

/// z(x) = -2 |sigma|^2 ln u(|x|). Throws std::out_of_range beyond the grid.
double value_function(const PolicyField& field, std::span<const double> x);

/// Gradient of z by the chain rule through the solver's u':
/// dz/dx_i = -2|sigma|^2 (u'/u)(|x|) * x_i/|x|, zero vector at the origin.
std::vector<double> grad_z(const PolicyField& field, std::span<const double> x);

/// Feedback production rates p*_i(x) = max{0, -dz/dx_i / 2}; components
/// vanish at the origin and wherever x_i <= 0.
std::vector<double> optimal_control(const PolicyField& field,
                                    std::span<const double> x);

struct PGridSpec {
    double half_width = 1.0;   // box half-width around p* (clamped to p >= 0)
    int points_per_axis = 41;  // lattice points per dimension
};

struct ArgminReport {
    std::vector<double> p_star;       // clamped analytic minimizer
    std::vector<double> grid_argmin;  // brute-force lattice minimizer
    double f_star = 0.0;              // F(p*)
    double grid_min = 0.0;            // lattice minimum of F
    double grad_norm_sq = 0.0;        // |grad z|^2
    double cell = 0.0;                // lattice spacing
    bool clamp_active = false;
    bool within_one_cell = false;     // lattice argmin within one cell of p*
    bool quarter_identity_ok = false; // F(p*) = -|grad z|^2/4 (unclamped only)
};

/// Brute-force minimization of F(p) = p . grad z + |p|^2 over a lattice of
/// admissible p >= 0 around p*, confirming the clamped analytic minimizer.
ArgminReport hamiltonian_argmin_check(const PolicyField& field,
                                      std::span<const double> x,
                                      const PGridSpec& spec);

struct HjbResidualReport {
    std::vector<double> radii;      // probe radii snapped to interior grid points
    std::vector<double> residuals;  // |-2|s|^2 dz + (z')^2 + 4 a z - 4 r^2|
    double max_residual = 0.0;
    double mean_residual = 0.0;
};

/// Reconstructs z on the radial grid and evaluates the reduced equation
/// -2|sigma|^2 (z'' + (N-1) z'/r) + (z')^2 + 4 alpha z = 4 r^2
/// with centered finite differences at the probe radii.
HjbResidualReport hjb_residual(const PolicyField& field,
                               std::span<const double> radii);

}  // namespace radplan
