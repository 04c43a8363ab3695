#include "radplan/planning_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace radplan {

namespace {

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

std::pair<PlanningModel, RadialProblem> build_model(int N,
                                                    std::vector<double> sigma,
                                                    double alpha, double u0) {
    if (N < 1) throw std::invalid_argument("build_model: N must be >= 1");
    if (static_cast<int>(sigma.size()) != N)
        throw std::invalid_argument("build_model: sigma must have N components");
    for (double s : sigma)
        if (s == 0.0 || !std::isfinite(s))
            throw std::invalid_argument("build_model: zero diffusion component");
    if (!(alpha > 0.0)) throw std::invalid_argument("build_model: alpha must be > 0");
    if (!(u0 >= 1.0)) throw std::invalid_argument("build_model: u0 must be >= 1");

    PlanningModel m;
    m.N = N;
    m.sigma = std::move(sigma);
    m.alpha = alpha;
    m.u0 = u0;
    m.sigma_sq = 0.0;
    for (double s : m.sigma) m.sigma_sq += s * s;
    m.sigma_4 = m.sigma_sq * m.sigma_sq;

    RadialProblem p;
    p.N = N;
    double s4 = m.sigma_4;
    double bc = 2.0 * m.alpha / m.sigma_sq;
    p.a = [s4](double r) { return r * r / s4; };
    p.b = [bc](double) { return bc; };
    p.pair = NonlinearityPair::model_log();
    p.u0 = u0;
    return {std::move(m), std::move(p)};
}

double closed_H(const PlanningModel& model, double s) {
    if (!(s >= model.u0)) throw std::domain_error("closed_H: s must be >= u0");
    return std::log(std::log(s) + 1.0) - std::log(std::log(model.u0) + 1.0);
}

double closed_H_inv(const PlanningModel& model, double y) {
    if (!(y >= 0.0)) throw std::domain_error("closed_H_inv: y must be >= 0");
    return std::exp((1.0 + std::log(model.u0)) * std::exp(y) - 1.0);
}

double closed_p_bar(const PlanningModel& model, double r) {
    if (!(r >= 0.0)) throw std::domain_error("closed_p_bar: r must be >= 0");
    double r2 = r * r;
    return r2 * r2 / (4.0 * (model.N + 2) * model.sigma_4) +
           model.alpha * r2 / (model.N * model.sigma_sq);
}

double closed_p_under(const PlanningModel& model, double r) {
    if (!(r >= 0.0)) throw std::domain_error("closed_p_under: r must be >= 0");
    double r2 = r * r;
    double quartic = r2 * r2 / (4.0 * (model.N + 2) * model.sigma_4);
    if (std::fabs(model.u0 * std::log(model.u0)) <= 1e-12) return quartic;
    double c = std::min(model.u0, model.u0 * std::log(model.u0));
    return c * closed_p_bar(model, r);
}

PolicyField::PolicyField(PlanningModel model, RadialSolution solution)
    : model_(std::move(model)), sol_(std::move(solution)) {
    if (!sol_.converged)
        throw std::invalid_argument("PolicyField requires a converged solution");
    if (sol_.grid.size() < 2)
        throw std::invalid_argument("PolicyField requires a nontrivial grid");
    dr_ = sol_.grid[1] - sol_.grid[0];
}

namespace {

double lerp_on_grid(const std::vector<double>& vals, double dr, double r) {
    double pos = r / dr;
    auto idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= vals.size()) return vals.back();
    double frac = pos - static_cast<double>(idx);
    return vals[idx] + frac * (vals[idx + 1] - vals[idx]);
}

}  // namespace

double PolicyField::u_at(double r) const {
    if (r < 0.0 || r > r_max() * (1.0 + 1e-12))
        throw std::out_of_range("PolicyField: radius beyond grid reach");
    return lerp_on_grid(sol_.u, dr_, std::min(r, r_max()));
}

double PolicyField::du_at(double r) const {
    if (r < 0.0 || r > r_max() * (1.0 + 1e-12))
        throw std::out_of_range("PolicyField: radius beyond grid reach");
    return lerp_on_grid(sol_.du, dr_, std::min(r, r_max()));
}

double value_function(const PolicyField& field, std::span<const double> x) {
    double r = norm(x);
    return -2.0 * field.model().sigma_sq * std::log(field.u_at(r));
}

std::vector<double> grad_z(const PolicyField& field, std::span<const double> x) {
    std::vector<double> g(x.size(), 0.0);
    double r = norm(x);
    if (r == 0.0) return g;
    double slope = -2.0 * field.model().sigma_sq * field.du_at(r) / field.u_at(r);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = slope * x[i] / r;
    return g;
}

std::vector<double> optimal_control(const PolicyField& field,
                                    std::span<const double> x) {
    std::vector<double> g = grad_z(field, x);
    for (double& v : g) v = std::max(0.0, -0.5 * v);
    return g;
}

ArgminReport hamiltonian_argmin_check(const PolicyField& field,
                                      std::span<const double> x,
                                      const PGridSpec& spec) {
    if (spec.points_per_axis < 3)
        throw std::invalid_argument("points_per_axis must be >= 3");
    const std::size_t N = x.size();
    std::vector<double> gz = grad_z(field, x);
    for (double v : gz)
        if (!std::isfinite(v))
            throw std::runtime_error("hamiltonian_argmin_check: non-finite grad z");

    ArgminReport rep;
    rep.p_star = optimal_control(field, x);
    rep.grad_norm_sq = 0.0;
    for (double v : gz) rep.grad_norm_sq += v * v;
    rep.clamp_active = false;
    for (std::size_t i = 0; i < N; ++i)
        if (-0.5 * gz[i] < 0.0) rep.clamp_active = true;

    auto F = [&gz](std::span<const double> p) {
        double v = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) v += p[i] * gz[i] + p[i] * p[i];
        return v;
    };
    rep.f_star = F(rep.p_star);

    const int m = spec.points_per_axis;
    rep.cell = 2.0 * spec.half_width / (m - 1);
    double total = std::pow(static_cast<double>(m), static_cast<double>(N));
    if (total > 3e7)
        throw std::invalid_argument(
            "hamiltonian_argmin_check: lattice too large, reduce points_per_axis");

    std::vector<double> lo(N), p(N);
    for (std::size_t i = 0; i < N; ++i) {
        lo[i] = std::max(0.0, rep.p_star[i] - spec.half_width);
        p[i] = lo[i];
    }
    std::vector<int> idx(N, 0);
    rep.grid_argmin = p;
    rep.grid_min = F(p);
    for (long long step = 1; step < static_cast<long long>(total); ++step) {
        // odometer increment over the lattice
        for (std::size_t i = 0; i < N; ++i) {
            if (++idx[i] < m) {
                p[i] = lo[i] + idx[i] * rep.cell;
                break;
            }
            idx[i] = 0;
            p[i] = lo[i];
        }
        double v = F(p);
        if (v < rep.grid_min) {
            rep.grid_min = v;
            rep.grid_argmin = p;
        }
    }

    rep.within_one_cell = true;
    for (std::size_t i = 0; i < N; ++i)
        if (std::fabs(rep.grid_argmin[i] - rep.p_star[i]) > rep.cell * (1.0 + 1e-12))
            rep.within_one_cell = false;
    rep.quarter_identity_ok =
        rep.clamp_active ||
        std::fabs(rep.f_star + 0.25 * rep.grad_norm_sq) <= 1e-10;
    return rep;
}

HjbResidualReport hjb_residual(const PolicyField& field,
                               std::span<const double> radii) {
    const auto& sol = field.solution();
    const std::size_t n = sol.grid.size();
    const double dr = sol.grid[1] - sol.grid[0];
    const double s2 = field.model().sigma_sq;
    const double alpha = field.model().alpha;
    const int N = field.model().N;

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = -2.0 * s2 * std::log(sol.u[i]);

    auto residual_at = [&](std::size_t i) {
        double zp, zpp, lap;
        if (i == 0) {
            // radial limit: z'(0) = 0, lap z(0) = N z''(0)
            zpp = 2.0 * (z[1] - z[0]) / (dr * dr);
            lap = N * zpp;
            zp = 0.0;
        } else {
            zp = (z[i + 1] - z[i - 1]) / (2.0 * dr);
            zpp = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / (dr * dr);
            lap = zpp + (N - 1) * zp / sol.grid[i];
        }
        double r = sol.grid[i];
        return std::fabs(-2.0 * s2 * lap + zp * zp + 4.0 * alpha * z[i] -
                         4.0 * r * r);
    };

    HjbResidualReport rep;
    for (double r : radii) {
        if (!(r >= 0.0)) throw std::invalid_argument("hjb_residual: radius < 0");
        auto i = static_cast<std::size_t>(std::llround(r / dr));
        if (i + 1 >= n) i = n - 2;  // snap inside; endpoint has no centered stencil
        rep.radii.push_back(sol.grid[i]);
        rep.residuals.push_back(residual_at(i));
    }
    double mx = 0.0, sum = 0.0;
    for (double v : rep.residuals) {
        mx = std::max(mx, v);
        sum += v;
    }
    rep.max_residual = mx;
    rep.mean_residual = rep.residuals.empty() ? 0.0 : sum / rep.residuals.size();
    return rep;
}

}  // namespace radplan
