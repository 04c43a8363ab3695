#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radplan/planning_model.hpp"

namespace radplan {

/// Execution lane for the path ensemble kernel. Parallel uses OpenMP over
/// paths; Serial is the reference implementation kept for testing. Both
/// produce bit-identical ensembles: every path draws from its own substream
/// derived from (seed, path index) and reductions run in path-index order.
enum class ExecMode { Serial, Parallel };

struct SimConfig {
    double horizon = 15.0;
    double dt = 1e-3;
    int n_paths = 10000;
    std::uint64_t seed = 42;
    std::vector<double> y0;
    int probe_count = 61;  // evenly spaced state snapshots incl. t=0 and t=T
};

/// Feedback policy evaluated along simulated paths. eval returns false when
/// the state is outside the policy's reach (= radial grid), which flags the
/// path as truncated.
class Policy {
public:
    virtual ~Policy() = default;
    virtual bool eval(std::span<const double> y, std::span<double> p) const = 0;
    virtual std::string name() const = 0;
};

class ZeroPolicy final : public Policy {
public:
    bool eval(std::span<const double>, std::span<double> p) const override {
        for (double& v : p) v = 0.0;
        return true;
    }
    std::string name() const override { return "zero"; }
};

/// p(y) = scale * p*(y) with p* the clamped feedback rates of the field.
class ScaledFieldPolicy final : public Policy {
public:
    ScaledFieldPolicy(const PolicyField& field, double scale)
        : field_(&field), scale_(scale) {}
    bool eval(std::span<const double> y, std::span<double> p) const override;
    std::string name() const override;

private:
    const PolicyField* field_;
    double scale_;
};

/// Euler-Maruyama ensemble with online left-endpoint quadrature of the
/// discounted quadratic loss integral(|p|^2 + |y|^2) e^{-alpha t} dt.
/// Full trajectories are not retained (10^4 paths x 10^4+ steps would not
/// fit); instead each path stores its cost, its loss at the final step and
/// |y| snapshots on the probe grid.
struct PathEnsemble {
    double horizon = 0.0;
    double dt = 0.0;
    int n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> y0;
    std::vector<double> sigma;
    double alpha = 0.0;

    std::vector<double> path_cost;   // per path, valid when not truncated
    std::vector<double> final_loss;  // loss sample at the last executed step
    std::vector<int> trunc_step;     // n_steps+1 when the path completed
    int truncated_count = 0;

    std::vector<double> probe_times;
    std::vector<std::vector<double>> probe_radius;  // [probe][path] = |y(t)|

    bool completed(int path) const { return trunc_step[path] > n_steps; }
    /// A run is usable when at most 1% of paths left the policy's reach.
    bool valid_run() const { return truncated_count * 100 <= n_paths; }
};

/// Simulates n_paths of dy_i = p_i(y) dt + sigma_i dW_i from y0. Identical
/// (seed, config) yields a bit-identical ensemble in either exec mode.
PathEnsemble simulate_paths(const Policy& policy, const SimConfig& cfg,
                            std::span<const double> sigma, double alpha,
                            ExecMode mode = ExecMode::Parallel);

struct CostEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double truncation_bound = 0.0;  // e^{-alpha T} * (mean final loss) / alpha
    int n_used = 0;
    int n_truncated = 0;
};

/// Mean and standard error of the per-path discounted costs (truncated
/// paths excluded), plus the horizon-truncation bound of the infinite
/// integral's tail.
CostEstimate discounted_cost(const PathEnsemble& ensemble);

struct TransversalityPoint {
    double t = 0.0;
    double value = 0.0;  // estimate of E[e^{-alpha t} U(y(t))]
    int n_used = 0;
};

/// Estimates E[e^{-alpha t} U(y(t))] with U(y) = 2|sigma|^2 ln u(|y|) at the
/// requested probe times (snapped to the ensemble's stored probe grid).
/// Paths truncated before a probe, or outside the field's radial reach at
/// it, are excluded there.
std::vector<TransversalityPoint> transversality_check(
    const PolicyField& field, const PathEnsemble& ensemble,
    std::span<const double> probe_times);

struct PolicyRow {
    std::string name;
    double scaling = 0.0;
    double cost_mean = 0.0;
    double cost_stderr = 0.0;
    double truncation_bound = 0.0;
    int n_truncated = 0;
    bool valid = false;
};

/// Simulates p = s * p* for every scaling under common random numbers (the
/// shared seed gives every policy the same per-path noise) and returns the
/// cost table sorted by mean. Scalings must include 0.0 and 1.0.
std::vector<PolicyRow> compare_policies(const PolicyField& field,
                                        const SimConfig& cfg,
                                        std::span<const double> scalings,
                                        ExecMode mode = ExecMode::Parallel);

}  // namespace radplan
