// Timing comparison of the serial reference path kernel against the OpenMP
// lane, for the zero policy and the model feedback policy. Both lanes must
// produce identical ensembles; the checksum column makes that visible.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "radplan/planning_model.hpp"
#include "radplan/sde_sim.hpp"

using namespace radplan;

namespace {

double checksum(const PathEnsemble& ens) {
    double s = 0.0;
    for (double c : ens.path_cost) s += c;
    return s;
}

template <typename F>
double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main() {
    auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
    GridConfig grid;
    grid.r_max = 12.0;
    grid.n_points = 2401;
    grid.blowup_cap = 1e30;
    grid.max_iter = 2000;
    PolicyField field(model, picard_solve(problem, grid));

    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.dt = 1e-3;
    cfg.n_paths = 4000;
    cfg.seed = 7;
    cfg.y0 = {1.0, 1.0, 1.0};

    ZeroPolicy zero;
    ScaledFieldPolicy feedback(field, 1.0);

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("%-10s %12s %12s %9s %22s\n", "policy", "serial[ms]",
                "openmp[ms]", "speedup", "checksum match");

    const Policy* policies[] = {&zero, &feedback};
    const char* names[] = {"zero", "feedback"};
    for (int k = 0; k < 2; ++k) {
        PathEnsemble serial, parallel;
        double ts = time_ms([&] {
            serial = simulate_paths(*policies[k], cfg, model.sigma, model.alpha,
                                    ExecMode::Serial);
        });
        double tp = time_ms([&] {
            parallel = simulate_paths(*policies[k], cfg, model.sigma,
                                      model.alpha, ExecMode::Parallel);
        });
        bool match = serial.path_cost == parallel.path_cost &&
                     serial.probe_radius == parallel.probe_radius;
        std::printf("%-10s %12.1f %12.1f %8.2fx %14s %.6e\n", names[k], ts, tp,
                    ts / tp, match ? "yes" : "NO", checksum(parallel));
    }
    return 0;
}
