#include "radplan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace radplan {

namespace {

constexpr double kEnvelopeRelTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Cached cumulative integral F(y) = int_0^y w(t) dt. Evaluations reuse the
// nearest cached point below y, so ascending queries cost only the gap.
class CumulativeIntegral {
public:
    CumulativeIntegral(std::function<double(double)> w, double rel_tol)
        : w_(std::move(w)), rel_tol_(rel_tol) {
        cache_[0.0] = 0.0;
    }

    double operator()(double y) {
        if (y == 0.0) return 0.0;
        auto it = cache_.upper_bound(y);
        --it;  // largest cached point <= y (0 always present)
        double base_y = it->first, base_v = it->second;
        if (base_y == y) return base_v;
        double v = base_v + chunked(base_y, y);
        cache_[y] = v;
        return v;
    }

private:
    // Integrate in decade-sized chunks so a localized integrand is never
    // missed by the first Simpson pass over a huge interval.
    double chunked(double lo, double hi) {
        double total = 0.0;
        double left = lo;
        while (left < hi) {
            double right = std::min(hi, std::max(left * 10.0, left + 1.0));
            total += detail::adaptive_simpson(w_, left, right, rel_tol_);
            left = right;
        }
        return total;
    }

    std::function<double(double)> w_;
    double rel_tol_;
    std::map<double, double> cache_;
};

// T[w](r) = int_0^r y^{1-N} Q(y) dy with Q(y) = int_0^y t^{N-1} w(t) dt,
// both by cached adaptive quadrature.
class NestedEnvelope {
public:
    NestedEnvelope(const std::function<double(double)>& w, int N)
        : N_(N),
          inner_(
              [w, N](double t) {
                  double v = w(t);
                  if (!std::isfinite(v))
                      throw std::runtime_error(
                          "envelope integrand non-finite at r=" + std::to_string(t));
                  return std::pow(t, N - 1) * v;
              },
              kEnvelopeRelTol),
          outer_(
              [this](double y) {
                  if (y <= 0.0) return 0.0;
                  return std::pow(y, 1 - N_) * inner_(y);
              },
              kEnvelopeRelTol) {}

    double operator()(double r) {
        if (r < 0.0) throw std::invalid_argument("envelope radius must be >= 0");
        return outer_(r);
    }

private:
    int N_;
    CumulativeIntegral inner_;
    CumulativeIntegral outer_;
};

ScalarFn sum_ab(const RadialProblem& p) {
    return [&p](double s) { return p.a(s) + p.b(s); };
}

ScalarFn m_fn(const RadialProblem& p) {
    return [&p](double s) { return m_function(p, s); };
}

}  // namespace

double m_function(const RadialProblem& problem, double s) {
    if (!(problem.u0 >= problem.pair.s0))
        throw std::invalid_argument("m_function requires u0 >= s0");
    double gu0 = problem.pair.g(problem.u0);
    double hu0 = problem.pair.h(problem.u0);
    if (std::fabs(gu0) <= 1e-12) return problem.a(s) * hu0;
    return (problem.a(s) + problem.b(s)) * std::min(hu0, gu0);
}

double p_bar(const RadialProblem& problem, double r) {
    NestedEnvelope env(sum_ab(problem), problem.N);
    return env(r);
}

double p_under(const RadialProblem& problem, double r) {
    NestedEnvelope env(m_fn(problem), problem.N);
    return env(r);
}

AsymptoticReport classify(const RadialProblem& problem,
                          std::span<const double> probes) {
    if (probes.size() < 4)
        throw std::invalid_argument("classify needs >= 4 probe radii");
    for (std::size_t i = 1; i < probes.size(); ++i)
        if (!(probes[i] > probes[i - 1]))
            throw std::invalid_argument("probe schedule must be increasing");
    if (!(probes.back() >= 1000.0 * probes.front()))
        throw std::invalid_argument("probe schedule must span >= 3 decades");

    AsymptoticReport rep;
    rep.probe_radii.assign(probes.begin(), probes.end());
    NestedEnvelope under(m_fn(problem), problem.N);
    NestedEnvelope bar(sum_ab(problem), problem.N);
    for (double r : probes) {
        rep.p_under_values.push_back(under(r));
        rep.p_bar_values.push_back(bar(r));
    }

    // Large: the lower envelope still grows >= 10x across the last decade.
    std::size_t last = probes.size() - 1;
    std::size_t decade = last;
    while (decade > 0 && probes[decade] > probes[last] / 10.0 * (1.0 + 1e-9))
        --decade;
    bool large = decade < last && rep.p_under_values[last] > 0.0 &&
                 rep.p_under_values[last] >= 10.0 * rep.p_under_values[decade];

    // Bounded: the upper envelope is Cauchy below a plateau.
    double pb = rep.p_bar_values[last];
    double inc1 = rep.p_bar_values[last] - rep.p_bar_values[last - 1];
    double inc2 = rep.p_bar_values[last - 1] - rep.p_bar_values[last - 2];
    bool bounded = inc1 <= 1e-10 * std::max(pb, 1e-300) &&
                   inc2 <= 1e-10 * std::max(pb, 1e-300);

    if (large) {
        rep.classification = Asymptotic::Large;
        rep.p_under_estimate = kInf;
        rep.p_bar_estimate = kInf;
    } else if (bounded) {
        rep.classification = Asymptotic::Bounded;
        rep.p_under_estimate = rep.p_under_values[last];
        rep.p_bar_estimate = pb;
    } else {
        rep.classification = Asymptotic::Inconclusive;
        rep.p_under_estimate = rep.p_under_values[last];
        rep.p_bar_estimate = pb;
    }
    return rep;
}

BoundsReport check_bounds(const RadialProblem& problem, const RadialSolution& sol,
                          const HTransform& ht) {
    const std::size_t n = sol.grid.size();
    if (n < 3 || sol.u.size() != n || sol.du.size() != n)
        throw std::invalid_argument("check_bounds needs a full solution");

    // Envelope integrals on the solution's own grid (same trapezoid rule the
    // scheme uses, so discretization errors track each other).
    std::vector<double> ab(n), mv(n);
    for (std::size_t i = 0; i < n; ++i) {
        ab[i] = problem.a(sol.grid[i]) + problem.b(sol.grid[i]);
        mv[i] = m_function(problem, sol.grid[i]);
    }
    std::vector<double> pbar = nested_integral(ab, problem.N, sol.grid);
    std::vector<double> punder = nested_integral(mv, problem.N, sol.grid);

    double u_max = 0.0, ab_sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u_max = std::max(u_max, std::fabs(sol.u[i]));
        ab_sup = std::max(ab_sup, ab[i]);
    }

    // Upper envelope H^{-1}(Pbar(r)); +inf where Pbar reaches H(inf).
    // Beyond H(10 max|u|) the bound dwarfs the solution (H is increasing),
    // so the inversion is skipped and the margin treated as infinite.
    double cap_value = std::max(10.0 * u_max, ht.u0 + 1.0);
    double h_at_cap = eval_H(ht, cap_value);
    std::vector<double> upper(n);
    bool failed = false;
    std::string what;
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        try {
            double y = pbar[i];
            if (y >= ht.h_infinity * (1.0 - 1e-9) || y >= h_at_cap)
                upper[i] = kInf;
            else
                upper[i] = eval_H_inv(ht, y);
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                what = e.what();
            }
        }
    }
    if (failed) throw std::runtime_error("check_bounds: " + what);

    BoundsReport rep;
    rep.tolerance = 1e-5 * std::max(1.0, u_max);
    rep.c1 = upper[n - 1];
    rep.c2 = ab_sup * (problem.pair.h(sol.u[n - 1]) + problem.pair.g(sol.u[n - 1]));

    double lo_m = kInf, up_m = kInf, a1_m = kInf, a2_m = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        lo_m = std::min(lo_m, sol.u[i] - (problem.u0 + punder[i]));
        if (std::isfinite(upper[i])) up_m = std::min(up_m, upper[i] - sol.u[i]);
        a1_m = std::min(a1_m, sol.u[i] - problem.u0);
        if (std::isfinite(rep.c1)) a1_m = std::min(a1_m, rep.c1 - sol.u[i]);
        double cap = rep.c2 * (sol.grid[i] + 1.0);
        a2_m = std::min(a2_m, cap - sol.du[i]);
        a2_m = std::min(a2_m, sol.du[i] + 1e-12);
    }
    rep.min_lower_margin = lo_m;
    rep.min_upper_margin = up_m;
    rep.min_a1_margin = a1_m;
    rep.min_a2_margin = a2_m;
    rep.lower_envelope_holds = lo_m >= -rep.tolerance;
    rep.upper_envelope_holds = up_m >= -rep.tolerance;
    rep.a1_holds = a1_m >= -rep.tolerance;
    rep.a2_holds = a2_m >= -rep.tolerance;
    rep.worst_margin = std::min(std::min(lo_m, up_m), std::min(a1_m, a2_m));
    return rep;
}

ConvexityReport check_convexity(const RadialProblem& problem,
                                const RadialSolution& sol) {
    const std::size_t n = sol.grid.size();
    if (n < 3) throw std::invalid_argument("check_convexity needs >= 3 points");
    const double dr = sol.grid[1] - sol.grid[0];

    ConvexityReport rep;
    rep.coefficients_nondecreasing = true;
    for (std::size_t i = 1; i < n; ++i) {
        if (problem.a(sol.grid[i]) < problem.a(sol.grid[i - 1]) - 1e-12 ||
            problem.b(sol.grid[i]) < problem.b(sol.grid[i - 1]) - 1e-12) {
            rep.coefficients_nondecreasing = false;
            break;
        }
    }

    double u_max = 0.0;
    for (double v : sol.u) u_max = std::max(u_max, std::fabs(v));
    rep.tolerance = 1e-8 * std::max(1.0, u_max);

    double min_d2 = kInf;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double d2 = (sol.u[i + 1] - 2.0 * sol.u[i] + sol.u[i - 1]) / (dr * dr);
        min_d2 = std::min(min_d2, d2);
    }
    rep.min_second_difference = min_d2;
    rep.convex = min_d2 >= -rep.tolerance;

    rep.u2_origin = 2.0 * (sol.u[1] - sol.u[0]) / (dr * dr);
    rep.u2_expected = (problem.a(0.0) * problem.pair.h(problem.u0) +
                       problem.b(0.0) * problem.pair.g(problem.u0)) /
                      problem.N;
    rep.origin_consistent = std::fabs(rep.u2_origin - rep.u2_expected) <= 1e-6;
    return rep;
}

LimitIdentityResult limit_identity(const RadialProblem& problem,
                                   std::span<const double> schedule) {
    if (problem.N < 3)
        throw std::invalid_argument("limit_identity requires N >= 3");
    if (schedule.size() < 2)
        throw std::invalid_argument("limit_identity needs >= 2 schedule radii");

    // Right side: (1/(N-2)) int_0^inf r (a+b) dr along the schedule with a
    // tail-increment convergence test.
    auto ab = sum_ab(problem);
    CumulativeIntegral moment([ab](double r) { return r * ab(r); }, 1e-10);
    std::vector<double> rhs_vals;
    for (double R : schedule) rhs_vals.push_back(moment(R));
    double rhs_last = rhs_vals.back();
    double tail_inc = rhs_last - rhs_vals[rhs_vals.size() - 2];
    bool tail_ok = tail_inc <= 1e-12 * std::max(1.0, rhs_last);

    LimitIdentityResult res;
    if (!tail_ok) {
        // Divergent moment integral: both sides +inf when Pbar also grows.
        NestedEnvelope bar(ab, problem.N);
        double p1 = bar(schedule[schedule.size() - 2]);
        double p2 = bar(schedule.back());
        if (p2 - p1 > 1e-10 * std::max(1.0, p2)) {
            res.lhs = kInf;
            res.rhs = kInf;
            res.status = LimitStatus::DivergentBoth;
        } else {
            res.lhs = p2;
            res.rhs = rhs_last / (problem.N - 2);
            res.status = LimitStatus::Inconclusive;
        }
        return res;
    }
    res.rhs = rhs_last / (problem.N - 2);

    // Left side: extrapolate Pbar(R) = L - C R^{2-N} from the last two radii.
    NestedEnvelope bar(ab, problem.N);
    double r1 = schedule[schedule.size() - 2], r2 = schedule.back();
    double p1 = bar(r1), p2 = bar(r2);
    double w1 = std::pow(r1, 2 - problem.N), w2 = std::pow(r2, 2 - problem.N);
    res.lhs = (p2 * w1 - p1 * w2) / (w1 - w2);
    res.status = LimitStatus::Converged;
    return res;
}

}  // namespace radplan
