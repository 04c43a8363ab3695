#include "radplan/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace radplan {

namespace {

void require_uniform(std::span<const double> grid) {
    if (grid.size() < 3) throw std::invalid_argument("grid needs >= 3 points");
    if (grid.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    double dr = grid[1] - grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double step = grid[i] - grid[i - 1];
        if (std::fabs(step - dr) > 1e-9 * std::max(1.0, dr))
            throw std::invalid_argument("grid must be uniform");
    }
}

void validate_cfg(const GridConfig& cfg) {
    if (!(cfg.r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
    if (cfg.n_points < 3) throw std::invalid_argument("n_points must be >= 3");
    if (!(cfg.tol_abs > 0.0) || !(cfg.tol_rel > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

}  // namespace

std::vector<double> uniform_grid(double r_max, int n_points) {
    std::vector<double> g(n_points);
    double dr = r_max / (n_points - 1);
    for (int i = 0; i < n_points; ++i) g[i] = i * dr;
    g.back() = r_max;
    return g;
}

std::vector<double> nested_integral(std::span<const double> phi, int N,
                                    std::span<const double> grid) {
    require_uniform(grid);
    if (phi.size() != grid.size())
        throw std::invalid_argument("phi and grid size mismatch");
    const std::size_t n = grid.size();
    const double dr = grid[1] - grid[0];

    // Inner integral I(t) = int_0^t s^{N-1} phi(s) ds. The first cell uses
    // the rule exact for linear phi, int_0^d s^{N-1}(phi0 + (phi1-phi0)s/d),
    // because the trapezoid is O(1) wrong in relative terms where the weight
    // s^{N-1} vanishes.
    std::vector<double> inner(n);
    inner[0] = 0.0;
    inner[1] = std::pow(dr, N) *
               (phi[0] / N + (phi[1] - phi[0]) / (N + 1));
    double prev_w = std::pow(grid[1], N - 1) * phi[1];
    for (std::size_t i = 2; i < n; ++i) {
        double w = std::pow(grid[i], N - 1) * phi[i];
        inner[i] = inner[i - 1] + 0.5 * dr * (prev_w + w);
        prev_w = w;
    }

    // Outer integral of t^{1-N} I(t); the integrand tends to 0 at t=0.
    std::vector<double> out(n);
    out[0] = 0.0;
    double prev_v = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double v = std::pow(grid[i], 1 - N) * inner[i];
        if (!std::isfinite(v))
            throw std::runtime_error("nested_integral: non-finite value at index " +
                                     std::to_string(i));
        out[i] = out[i - 1] + 0.5 * dr * (prev_v + v);
        prev_v = v;
    }
    return out;
}

namespace {

// Shared blow-up scan: first index where the cap is exceeded or the value
// is not finite, or -1.
int first_offender(std::span<const double> u, double cap) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!std::isfinite(u[i]) || u[i] > cap) return static_cast<int>(i);
    return -1;
}

std::vector<double> derivative_from_inner(const std::vector<double>& inner,
                                          std::span<const double> grid, int N) {
    std::vector<double> du(grid.size());
    du[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        du[i] = std::pow(grid[i], 1 - N) * inner[i];
    return du;
}

}  // namespace

RadialSolution picard_solve(const RadialProblem& problem, const GridConfig& cfg,
                            const IterateObserver& observer) {
    validate_cfg(cfg);
    if (!(problem.u0 >= problem.pair.s0))
        throw std::invalid_argument("picard_solve requires u0 >= s0");

    const int n = cfg.n_points;
    const double dr = cfg.r_max / (n - 1);
    RadialSolution sol;
    sol.method = SolveMethod::Picard;
    sol.grid = uniform_grid(cfg.r_max, n);

    std::vector<double> av(n), bv(n);
    for (int i = 0; i < n; ++i) {
        av[i] = problem.a(sol.grid[i]);
        bv[i] = problem.b(sol.grid[i]);
        if (!std::isfinite(av[i]) || av[i] < 0.0 || !std::isfinite(bv[i]) ||
            bv[i] < 0.0)
            throw std::invalid_argument("coefficients must be finite and >= 0");
    }

    std::vector<double> u(n, problem.u0), u_next(n), inner(n);
    if (observer) observer(0, u);

    auto compute_inner = [&](const std::vector<double>& cur) {
        auto f_at = [&](int i) {
            return av[i] * problem.pair.h(cur[i]) + bv[i] * problem.pair.g(cur[i]);
        };
        double f0 = f_at(0), f1 = f_at(1);
        inner[0] = 0.0;
        // first cell: rule exact for linear phi (see nested_integral)
        inner[1] = std::pow(dr, problem.N) *
                   (f0 / problem.N + (f1 - f0) / (problem.N + 1));
        double prev_w = std::pow(sol.grid[1], problem.N - 1) * f1;
        for (int i = 2; i < n; ++i) {
            double w = std::pow(sol.grid[i], problem.N - 1) * f_at(i);
            inner[i] = inner[i - 1] + 0.5 * dr * (prev_w + w);
            prev_w = w;
        }
    };

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        compute_inner(u);
        u_next[0] = problem.u0;
        double change = 0.0, scale = std::fabs(problem.u0);
        double acc = 0.0, prev_v = 0.0;
        for (int i = 1; i < n; ++i) {
            double v = std::pow(sol.grid[i], 1 - problem.N) * inner[i];
            acc += 0.5 * dr * (prev_v + v);
            u_next[i] = problem.u0 + acc;
            prev_v = v;
        }

        int bad = first_offender(u_next, cfg.blowup_cap);
        if (bad >= 0) {
            // keep the last finite iterate; inner still matches u here
            sol.u = u;
            sol.du = derivative_from_inner(inner, sol.grid, problem.N);
            sol.iterations = iter;
            sol.converged = false;
            sol.blowup_radius = sol.grid[bad];
            return sol;
        }

        for (int i = 0; i < n; ++i) {
            change = std::max(change, std::fabs(u_next[i] - u[i]));
            scale = std::max(scale, std::fabs(u_next[i]));
        }
        u.swap(u_next);
        if (observer) observer(iter, u);
        sol.iterations = iter;
        if (change <= cfg.tol_abs + cfg.tol_rel * scale) {
            sol.converged = true;
            break;
        }
    }

    compute_inner(u);
    sol.u = std::move(u);
    sol.du = derivative_from_inner(inner, sol.grid, problem.N);
    return sol;
}

RadialSolution ode_oracle(const RadialProblem& problem, const GridConfig& cfg) {
    validate_cfg(cfg);
    if (!(problem.u0 >= problem.pair.s0))
        throw std::invalid_argument("ode_oracle requires u0 >= s0");

    const int n = cfg.n_points;
    const double dr = cfg.r_max / (n - 1);
    RadialSolution sol;
    sol.method = SolveMethod::RungeKutta;
    sol.grid = uniform_grid(cfg.r_max, n);
    sol.u.assign(n, 0.0);
    sol.du.assign(n, 0.0);
    sol.u[0] = problem.u0;
    sol.du[0] = 0.0;
    sol.iterations = 1;

    auto rhs = [&problem](double r, double u) {
        return problem.a(r) * problem.pair.h(u) + problem.b(r) * problem.pair.g(u);
    };

    // Series start over the first cell.
    const double c0 = rhs(0.0, problem.u0);
    double u1 = problem.u0 + c0 * dr * dr / (2.0 * problem.N);
    double v1 = c0 * dr / problem.N;

    auto flag_blowup = [&](int idx) {
        sol.converged = false;
        sol.blowup_radius = sol.grid[idx];
        sol.u.resize(idx);
        sol.du.resize(idx);
        sol.grid.resize(idx);
    };

    if (!std::isfinite(u1) || u1 > cfg.blowup_cap) {
        flag_blowup(1);
        return sol;
    }
    sol.u[1] = u1;
    sol.du[1] = v1;

    double u = u1, v = v1;
    for (int i = 1; i + 1 < n; ++i) {
        double r = sol.grid[i];
        auto acc = [&](double rr, double uu, double vv) {
            return rhs(rr, uu) - (problem.N - 1) * vv / rr;
        };
        double k1u = v;
        double k1v = acc(r, u, v);
        double k2u = v + 0.5 * dr * k1v;
        double k2v = acc(r + 0.5 * dr, u + 0.5 * dr * k1u, v + 0.5 * dr * k1v);
        double k3u = v + 0.5 * dr * k2v;
        double k3v = acc(r + 0.5 * dr, u + 0.5 * dr * k2u, v + 0.5 * dr * k2v);
        double k4u = v + dr * k3v;
        double k4v = acc(r + dr, u + dr * k3u, v + dr * k3v);
        u += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dr / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(u) || u > cfg.blowup_cap) {
            flag_blowup(i + 1);
            return sol;
        }
        sol.u[i + 1] = u;
        sol.du[i + 1] = v;
    }
    sol.converged = true;
    return sol;
}

double residual(const RadialProblem& problem, const RadialSolution& sol) {
    if (!sol.converged) throw std::invalid_argument("residual requires a converged solution");
    const std::size_t n = sol.grid.size();
    const double dr = sol.grid[1] - sol.grid[0];
    double worst = 0.0;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = std::pow(sol.grid[i], problem.N - 1) * sol.du[i];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double lhs = (w[i + 1] - w[i - 1]) / (2.0 * dr);
        double rhs = std::pow(sol.grid[i], problem.N - 1) *
                     (problem.a(sol.grid[i]) * problem.pair.h(sol.u[i]) +
                      problem.b(sol.grid[i]) * problem.pair.g(sol.u[i]));
        double score = std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs));
        worst = std::max(worst, score);
    }
    return worst;
}

}  // namespace radplan
