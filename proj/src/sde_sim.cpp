#include "radplan/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace radplan {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, int path) {
    return splitmix64(seed ^ splitmix64(0x9E3779B97F4A7C15ull *
                                        static_cast<std::uint64_t>(path + 1)));
}

void validate(const SimConfig& cfg, std::span<const double> sigma) {
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (!(cfg.dt > 0.0) || cfg.dt > cfg.horizon)
        throw std::invalid_argument("dt must satisfy 0 < dt <= horizon");
    if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (cfg.y0.empty()) throw std::invalid_argument("y0 must be non-empty");
    if (sigma.size() != cfg.y0.size())
        throw std::invalid_argument("sigma and y0 dimension mismatch");
    if (cfg.probe_count < 2) throw std::invalid_argument("probe_count must be >= 2");
}

}  // namespace

bool ScaledFieldPolicy::eval(std::span<const double> y,
                             std::span<double> p) const {
    double r2 = 0.0;
    for (double v : y) r2 += v * v;
    double r = std::sqrt(r2);
    if (r > field_->r_max()) return false;
    if (r == 0.0) {
        for (double& v : p) v = 0.0;
        return true;
    }
    double slope =
        scale_ * field_->model().sigma_sq * field_->du_at(r) / field_->u_at(r) / r;
    for (std::size_t i = 0; i < y.size(); ++i)
        p[i] = y[i] > 0.0 ? slope * y[i] : 0.0;
    return true;
}

std::string ScaledFieldPolicy::name() const {
    return "scale=" + std::to_string(scale_);
}

PathEnsemble simulate_paths(const Policy& policy, const SimConfig& cfg,
                            std::span<const double> sigma, double alpha,
                            ExecMode mode) {
    validate(cfg, sigma);
    const int dim = static_cast<int>(cfg.y0.size());
    const int n_steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
    if (n_steps < 1) throw std::invalid_argument("horizon/dt yields no steps");

    PathEnsemble ens;
    ens.horizon = cfg.horizon;
    ens.dt = cfg.dt;
    ens.n_paths = cfg.n_paths;
    ens.n_steps = n_steps;
    ens.seed = cfg.seed;
    ens.y0 = cfg.y0;
    ens.sigma.assign(sigma.begin(), sigma.end());
    ens.alpha = alpha;
    ens.path_cost.assign(cfg.n_paths, 0.0);
    ens.final_loss.assign(cfg.n_paths, 0.0);
    ens.trunc_step.assign(cfg.n_paths, n_steps + 1);

    // Probe steps: probe_count snapshots evenly spread over [0, n_steps].
    std::vector<int> probe_step(cfg.probe_count);
    for (int k = 0; k < cfg.probe_count; ++k)
        probe_step[k] = static_cast<int>(std::llround(
            static_cast<double>(k) * n_steps / (cfg.probe_count - 1)));
    ens.probe_times.resize(cfg.probe_count);
    ens.probe_radius.assign(cfg.probe_count,
                            std::vector<double>(cfg.n_paths, 0.0));
    for (int k = 0; k < cfg.probe_count; ++k)
        ens.probe_times[k] = probe_step[k] * cfg.dt;

    const double sqrt_dt = std::sqrt(cfg.dt);
    const double disc_step = std::exp(-alpha * cfg.dt);

    auto run_path = [&](int path) {
        std::mt19937_64 rng(path_seed(cfg.seed, path));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> y = cfg.y0;
        std::vector<double> p(dim, 0.0);

        double cost = 0.0;
        double disc = 1.0;
        double loss = 0.0;
        int probe_idx = 0;
        for (int j = 0; j < n_steps; ++j) {
            while (probe_idx < cfg.probe_count && probe_step[probe_idx] == j) {
                double r2 = 0.0;
                for (double v : y) r2 += v * v;
                ens.probe_radius[probe_idx][path] = std::sqrt(r2);
                ++probe_idx;
            }
            if (!policy.eval(y, p)) {
                ens.trunc_step[path] = j;
                break;
            }
            loss = 0.0;
            for (int i = 0; i < dim; ++i) loss += p[i] * p[i] + y[i] * y[i];
            cost += loss * disc * cfg.dt;
            for (int i = 0; i < dim; ++i)
                y[i] += p[i] * cfg.dt + sigma[i] * sqrt_dt * normal(rng);
            disc *= disc_step;
        }
        if (ens.trunc_step[path] > n_steps) {
            while (probe_idx < cfg.probe_count) {
                double r2 = 0.0;
                for (double v : y) r2 += v * v;
                ens.probe_radius[probe_idx][path] = std::sqrt(r2);
                ++probe_idx;
            }
        }
        ens.path_cost[path] = cost;
        ens.final_loss[path] = loss;
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (int path = 0; path < cfg.n_paths; ++path) run_path(path);
    } else {
        for (int path = 0; path < cfg.n_paths; ++path) run_path(path);
    }

    // Deterministic reduction in path-index order.
    for (int path = 0; path < cfg.n_paths; ++path)
        if (ens.trunc_step[path] <= n_steps) ++ens.truncated_count;
    return ens;
}

CostEstimate discounted_cost(const PathEnsemble& ens) {
    CostEstimate est;
    double sum = 0.0, loss_sum = 0.0;
    for (int k = 0; k < ens.n_paths; ++k) {
        if (!ens.completed(k)) continue;
        sum += ens.path_cost[k];
        loss_sum += ens.final_loss[k];
        ++est.n_used;
    }
    est.n_truncated = ens.truncated_count;
    if (est.n_used == 0) {
        est.mean = std::numeric_limits<double>::quiet_NaN();
        est.stderr_ = est.mean;
        est.truncation_bound = est.mean;
        return est;
    }
    est.mean = sum / est.n_used;
    double var = 0.0;
    for (int k = 0; k < ens.n_paths; ++k) {
        if (!ens.completed(k)) continue;
        double d = ens.path_cost[k] - est.mean;
        var += d * d;
    }
    var = est.n_used > 1 ? var / (est.n_used - 1) : 0.0;
    est.stderr_ = std::sqrt(var / est.n_used);
    est.truncation_bound = std::exp(-ens.alpha * ens.horizon) *
                           (loss_sum / est.n_used) / ens.alpha;
    return est;
}

std::vector<TransversalityPoint> transversality_check(
    const PolicyField& field, const PathEnsemble& ens,
    std::span<const double> probe_times) {
    const double s2 = field.model().sigma_sq;
    std::vector<TransversalityPoint> series;
    for (double t : probe_times) {
        if (t < 0.0 || t > ens.horizon * (1.0 + 1e-12))
            throw std::invalid_argument("probe time outside horizon");
        // snap to the nearest stored probe
        std::size_t best = 0;
        for (std::size_t k = 1; k < ens.probe_times.size(); ++k)
            if (std::fabs(ens.probe_times[k] - t) <
                std::fabs(ens.probe_times[best] - t))
                best = k;
        double tt = ens.probe_times[best];
        int step = static_cast<int>(std::llround(tt / ens.dt));

        TransversalityPoint pt;
        pt.t = tt;
        double sum = 0.0;
        for (int k = 0; k < ens.n_paths; ++k) {
            if (ens.trunc_step[k] < step) continue;
            double r = ens.probe_radius[best][k];
            if (r > field.r_max()) continue;
            sum += 2.0 * s2 * std::log(field.u_at(r));
            ++pt.n_used;
        }
        pt.value = pt.n_used > 0
                       ? std::exp(-ens.alpha * tt) * sum / pt.n_used
                       : std::numeric_limits<double>::quiet_NaN();
        series.push_back(pt);
    }
    return series;
}

std::vector<PolicyRow> compare_policies(const PolicyField& field,
                                        const SimConfig& cfg,
                                        std::span<const double> scalings,
                                        ExecMode mode) {
    bool has0 = false, has1 = false;
    for (double s : scalings) {
        if (s == 0.0) has0 = true;
        if (s == 1.0) has1 = true;
    }
    if (!has0 || !has1)
        throw std::invalid_argument("scalings must include 0.0 and 1.0");

    std::vector<PolicyRow> rows;
    for (double s : scalings) {
        ScaledFieldPolicy policy(field, std::max(0.0, s));
        PathEnsemble ens = simulate_paths(policy, cfg, field.model().sigma,
                                          field.model().alpha, mode);
        CostEstimate est = discounted_cost(ens);
        PolicyRow row;
        row.name = policy.name();
        row.scaling = s;
        row.cost_mean = est.mean;
        row.cost_stderr = est.stderr_;
        row.truncation_bound = est.truncation_bound;
        row.n_truncated = est.n_truncated;
        row.valid = ens.valid_run();
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PolicyRow& a, const PolicyRow& b) {
                         if (std::isnan(a.cost_mean)) return false;
                         if (std::isnan(b.cost_mean)) return true;
                         return a.cost_mean < b.cost_mean;
                     });
    return rows;
}

}  // namespace radplan
