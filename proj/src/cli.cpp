#include "radplan/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "radplan/analysis.hpp"
#include "radplan/expr.hpp"
#include "radplan/planning_model.hpp"
#include "radplan/sde_sim.hpp"

namespace radplan::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

struct ProblemSpec {
    std::string pair = "model-log";
    std::string a_expr = "0";
    std::string b_expr = "0";
    double u0 = 1.0;
    int N = 3;
    bool use_model = false;  // coefficients induced by the planning model
    std::vector<double> sigma = {1.0, 1.0, 1.0};
    double alpha = 1.0;
};

struct GridSpec {
    double r_max = 1.0;
    int n_grid = 1001;
    double tol_abs = 1e-12;
    double tol_rel = 1e-12;
    int max_iter = 400;
    double blowup_cap = 1e12;
    std::string method = "picard";  // picard | rk4 | both
};

struct SimSpec {
    double horizon = 15.0;
    double dt = 1e-3;
    int paths = 10000;
    std::uint64_t seed = 42;
    std::vector<double> y0;
    std::vector<double> scalings = {0.0, 0.5, 1.0, 1.5, 2.0};
    int probe_count = 61;
};

struct RunConfig {
    std::string command;
    ProblemSpec problem;
    GridSpec grid;
    SimSpec sim;
    std::vector<double> probes;  // classify schedule / hjb probe radii
    std::string out = ".";
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ProblemSpec, pair, a_expr, b_expr, u0, N,
                                   use_model, sigma, alpha)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GridSpec, r_max, n_grid, tol_abs, tol_rel,
                                   max_iter, blowup_cap, method)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimSpec, horizon, dt, paths, seed, y0,
                                   scalings, probe_count)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunConfig, command, problem, grid, sim,
                                   probes, out)

std::string config_hash(const json& j) {
    // FNV-1a over the canonical dump; stable across runs and platforms.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Failure that maps directly to a process exit code.
struct CliError {
    int code;
    std::string message;
};

NonlinearityPair parse_pair(const std::string& name) {
    if (name == "model-log") return NonlinearityPair::model_log();
    if (name.rfind("power:", 0) == 0) {
        std::istringstream in(name.substr(6));
        double p, q, s0;
        char c1, c2;
        if (in >> p >> c1 >> q >> c2 >> s0 && c1 == ',' && c2 == ',')
            return NonlinearityPair::power(p, q, s0);
        throw CliError{kExitValidation, "bad power pair spec '" + name +
                                            "', expected power:p,q,s0"};
    }
    throw CliError{kExitValidation, "unknown nonlinearity pair '" + name + "'"};
}

struct BuiltProblem {
    RadialProblem problem;
    std::optional<PlanningModel> model;
};

BuiltProblem build_problem(const RunConfig& rc) {
    BuiltProblem bp;
    if (rc.problem.use_model) {
        try {
            auto [model, prob] =
                build_model(rc.problem.N, rc.problem.sigma, rc.problem.alpha,
                            rc.problem.u0);
            bp.model = std::move(model);
            bp.problem = std::move(prob);
        } catch (const std::invalid_argument& e) {
            throw CliError{kExitValidation, e.what()};
        }
        return bp;
    }
    bp.problem.N = rc.problem.N;
    bp.problem.u0 = rc.problem.u0;
    try {
        bp.problem.pair = parse_pair(rc.problem.pair);
        bp.problem.a = compile_expr(rc.problem.a_expr);
        bp.problem.b = compile_expr(rc.problem.b_expr);
    } catch (const std::invalid_argument& e) {
        throw CliError{kExitValidation, e.what()};
    }
    return bp;
}

json validation_json(const ValidationReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"advisory", c.advisory},
                          {"sample", c.sample},
                          {"value", c.value},
                          {"detail", c.detail}});
    return {{"passed", rep.passed}, {"checks", checks}};
}

json solution_json(const RadialSolution& sol) {
    json j{{"converged", sol.converged},
           {"iterations", sol.iterations},
           {"method", sol.method == SolveMethod::Picard ? "picard" : "rk4"},
           {"n_points", sol.grid.size()},
           {"r_max", sol.grid.empty() ? 0.0 : sol.grid.back()},
           {"u_end", sol.u.empty() ? 0.0 : sol.u.back()}};
    if (sol.blowup_radius)
        j["blowup_radius"] = *sol.blowup_radius;
    return j;
}

json bounds_json(const BoundsReport& b) {
    return {{"a1_holds", b.a1_holds},
            {"c1", b.c1},
            {"a2_holds", b.a2_holds},
            {"c2", b.c2},
            {"lower_envelope_holds", b.lower_envelope_holds},
            {"upper_envelope_holds", b.upper_envelope_holds},
            {"min_lower_margin", b.min_lower_margin},
            {"min_upper_margin", b.min_upper_margin},
            {"min_a1_margin", b.min_a1_margin},
            {"min_a2_margin", b.min_a2_margin},
            {"worst_margin", b.worst_margin},
            {"tolerance", b.tolerance}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{kExitNumeric, "cannot write " + path.string()};
    out << text;
}

void write_report(const RunConfig& rc, const std::string& filename,
                  json results) {
    json cfg = rc;
    json report{{"command", rc.command},
                {"config", cfg},
                {"config_hash", config_hash(cfg)},
                {"results", std::move(results)}};
    std::filesystem::create_directories(rc.out);
    write_text(std::filesystem::path(rc.out) / filename, report.dump(2) + "\n");
}

void write_solution_csv(const RunConfig& rc, const RadialSolution& sol,
                        const std::string& filename = "solution.csv") {
    std::ostringstream out;
    out << "r,u,du\n";
    char buf[96];
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sol.grid[i],
                      sol.u[i], sol.du[i]);
        out << buf;
    }
    std::filesystem::create_directories(rc.out);
    write_text(std::filesystem::path(rc.out) / filename, out.str());
}

GridConfig to_grid_config(const GridSpec& g) {
    GridConfig cfg;
    cfg.r_max = g.r_max;
    cfg.n_points = g.n_grid;
    cfg.tol_abs = g.tol_abs;
    cfg.tol_rel = g.tol_rel;
    cfg.max_iter = g.max_iter;
    cfg.blowup_cap = g.blowup_cap;
    return cfg;
}

ValidationReport validate_or_die(const RunConfig& rc, const RadialProblem& prob,
                                 const std::string& report_name) {
    double s_max = std::max({10.0, 2.0 * prob.u0, 2.0 * prob.pair.s0});
    ValidationReport rep = validate_pair(prob.pair, 64, s_max);
    if (!rep.passed) {
        write_report(rc, report_name,
                     {{"error", "nonlinearity validation failed"},
                      {"validation", validation_json(rep)}});
        throw CliError{kExitValidation, "nonlinearity validation failed"};
    }
    return rep;
}

int cmd_solve(const RunConfig& rc) {
    if (rc.grid.method != "picard" && rc.grid.method != "rk4" &&
        rc.grid.method != "both")
        throw CliError{kExitUsage, "unknown method '" + rc.grid.method +
                                       "', expected picard | rk4 | both"};
    BuiltProblem bp = build_problem(rc);
    ValidationReport vrep = validate_or_die(rc, bp.problem, "solve_report.json");

    GridConfig grid = to_grid_config(rc.grid);
    json results{{"validation", validation_json(vrep)}};
    RadialSolution primary;
    bool numeric_failure = false;

    if (rc.grid.method == "picard" || rc.grid.method == "both") {
        RadialSolution sol = picard_solve(bp.problem, grid);
        results["picard"] = solution_json(sol);
        if (sol.converged) results["picard"]["residual"] = residual(bp.problem, sol);
        numeric_failure |= !sol.converged;
        primary = std::move(sol);
    }
    if (rc.grid.method == "rk4" || rc.grid.method == "both") {
        RadialSolution sol = ode_oracle(bp.problem, grid);
        results["rk4"] = solution_json(sol);
        numeric_failure |= !sol.converged;
        if (rc.grid.method == "both" && primary.converged && sol.converged) {
            double sup = 0.0;
            for (std::size_t i = 0; i < sol.u.size(); ++i)
                sup = std::max(sup, std::fabs(sol.u[i] - primary.u[i]));
            results["sup_diff_picard_rk4"] = sup;
        }
        if (rc.grid.method == "rk4") primary = std::move(sol);
    }

    write_solution_csv(rc, primary);
    write_report(rc, "solve_report.json", std::move(results));
    return numeric_failure ? kExitNumeric : kExitOk;
}

int cmd_classify(const RunConfig& rc) {
    BuiltProblem bp = build_problem(rc);
    ValidationReport vrep =
        validate_or_die(rc, bp.problem, "classify_report.json");

    std::vector<double> probes = rc.probes;
    if (probes.empty())
        for (double r = 1e-1; r <= 1.5e13; r *= 10.0) probes.push_back(r);

    AsymptoticReport rep = classify(bp.problem, probes);
    const char* cls = rep.classification == Asymptotic::Large      ? "Large"
                      : rep.classification == Asymptotic::Bounded ? "Bounded"
                                                                  : "Inconclusive";
    write_report(rc, "classify_report.json",
                 {{"validation", validation_json(vrep)},
                  {"classification", cls},
                  {"p_under_estimate", rep.p_under_estimate},
                  {"p_bar_estimate", rep.p_bar_estimate},
                  {"probe_radii", rep.probe_radii},
                  {"p_under_values", rep.p_under_values},
                  {"p_bar_values", rep.p_bar_values}});
    return kExitOk;
}

int cmd_model(const RunConfig& rc) {
    RunConfig cfg = rc;
    cfg.problem.use_model = true;
    BuiltProblem bp = build_problem(cfg);
    ValidationReport vrep = validate_or_die(cfg, bp.problem, "model_report.json");

    GridConfig grid = to_grid_config(cfg.grid);
    RadialSolution sol = picard_solve(bp.problem, grid);
    json results{{"validation", validation_json(vrep)},
                 {"picard", solution_json(sol)}};
    if (!sol.converged) {
        write_solution_csv(cfg, sol);
        write_report(cfg, "model_report.json", std::move(results));
        return kExitNumeric;
    }
    results["picard"]["residual"] = residual(bp.problem, sol);

    RadialSolution oracle = ode_oracle(bp.problem, grid);
    double sup = 0.0;
    if (oracle.converged)
        for (std::size_t i = 0; i < sol.u.size(); ++i)
            sup = std::max(sup, std::fabs(sol.u[i] - oracle.u[i]));
    results["sup_diff_picard_rk4"] = sup;

    const PlanningModel& model = *bp.model;
    HTransform ht(bp.problem.pair, bp.problem.u0);
    BoundsReport bounds = check_bounds(bp.problem, sol, ht);
    ConvexityReport conv = check_convexity(bp.problem, sol);

    PolicyField field(model, sol);
    std::vector<double> hjb_probes;
    for (int k = 0; k <= 32; ++k)
        hjb_probes.push_back(cfg.grid.r_max * k / 32.0);
    HjbResidualReport hjb = hjb_residual(field, hjb_probes);

    results["closed_forms"] = {
        {"H_at_e", closed_H(model, std::exp(1.0) * model.u0)},
        {"p_bar_at_1", closed_p_bar(model, 1.0)},
        {"p_under_at_1", closed_p_under(model, 1.0)}};
    results["bounds"] = bounds_json(bounds);
    results["convexity"] = {{"convex", conv.convex},
                            {"coefficients_nondecreasing",
                             conv.coefficients_nondecreasing},
                            {"min_second_difference", conv.min_second_difference},
                            {"u2_origin", conv.u2_origin},
                            {"u2_expected", conv.u2_expected},
                            {"origin_consistent", conv.origin_consistent}};
    results["hjb"] = {{"max_residual", hjb.max_residual},
                      {"mean_residual", hjb.mean_residual}};

    write_solution_csv(cfg, sol);
    write_report(cfg, "model_report.json", std::move(results));
    return kExitOk;
}

int cmd_simulate(const RunConfig& rc) {
    RunConfig cfg = rc;
    cfg.problem.use_model = true;
    BuiltProblem bp = build_problem(cfg);
    validate_or_die(cfg, bp.problem, "simulate_report.json");

    GridConfig grid = to_grid_config(cfg.grid);
    RadialSolution sol = picard_solve(bp.problem, grid);
    if (!sol.converged) {
        write_report(cfg, "simulate_report.json",
                     {{"error", "field solve failed"},
                      {"picard", solution_json(sol)}});
        return kExitNumeric;
    }
    PolicyField field(*bp.model, std::move(sol));

    SimConfig sim;
    sim.horizon = cfg.sim.horizon;
    sim.dt = cfg.sim.dt;
    sim.n_paths = cfg.sim.paths;
    sim.seed = cfg.sim.seed;
    sim.y0 = cfg.sim.y0.empty()
                 ? std::vector<double>(cfg.problem.N, 1.0)
                 : cfg.sim.y0;
    sim.probe_count = cfg.sim.probe_count;

    std::vector<PolicyRow> table =
        compare_policies(field, sim, cfg.sim.scalings);

    json table_json = json::array();
    std::ostringstream table_csv;
    table_csv << "name,scaling,cost_mean,cost_stderr,truncation_bound,"
                 "n_truncated,valid\n";
    for (const auto& row : table) {
        table_json.push_back({{"name", row.name},
                              {"scaling", row.scaling},
                              {"cost_mean", row.cost_mean},
                              {"cost_stderr", row.cost_stderr},
                              {"truncation_bound", row.truncation_bound},
                              {"n_truncated", row.n_truncated},
                              {"valid", row.valid}});
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                      row.name.c_str(), row.scaling, row.cost_mean,
                      row.cost_stderr, row.truncation_bound, row.n_truncated,
                      row.valid ? 1 : 0);
        table_csv << buf;
    }

    // Transversality series for the candidate policy and the zero policy.
    json trans_json;
    std::ostringstream trans_csv;
    trans_csv << "scale,t,value,n_used\n";
    json per_policy;
    for (double s : {1.0, 0.0}) {
        ScaledFieldPolicy policy(field, s);
        PathEnsemble ens = simulate_paths(policy, sim, field.model().sigma,
                                          field.model().alpha);
        std::vector<TransversalityPoint> series =
            transversality_check(field, ens, ens.probe_times);
        json arr = json::array();
        for (const auto& p : series) {
            arr.push_back({{"t", p.t}, {"value", p.value}, {"n_used", p.n_used}});
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", s, p.t,
                          p.value, p.n_used);
            trans_csv << buf;
        }
        trans_json[policy.name()] = std::move(arr);
        CostEstimate est = discounted_cost(ens);
        per_policy[policy.name()] = {{"cost_mean", est.mean},
                                     {"cost_stderr", est.stderr_},
                                     {"truncation_bound", est.truncation_bound},
                                     {"n_truncated", est.n_truncated}};
    }

    json results{{"policy_table", std::move(table_json)},
                 {"transversality", std::move(trans_json)},
                 {"per_policy", std::move(per_policy)},
                 {"discount_at_horizon",
                  std::exp(-cfg.problem.alpha * cfg.sim.horizon)}};

    std::filesystem::create_directories(cfg.out);
    write_text(std::filesystem::path(cfg.out) / "policy_table.csv",
               table_csv.str());
    write_text(std::filesystem::path(cfg.out) / "transversality.csv",
               trans_csv.str());
    write_report(cfg, "simulate_report.json", std::move(results));
    return kExitOk;
}

int cmd_verify(const RunConfig& rc) {
    RunConfig cfg = rc;
    cfg.problem.use_model = true;
    BuiltProblem bp = build_problem(cfg);
    ValidationReport vrep = validate_or_die(cfg, bp.problem, "verify_report.json");

    json checks = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, json detail) {
        checks.push_back(
            {{"name", name}, {"passed", ok}, {"detail", std::move(detail)}});
        all_ok &= ok;
    };
    record("nonlinearity_conditions", vrep.passed, validation_json(vrep));

    GridConfig grid = to_grid_config(cfg.grid);
    RadialSolution sol = picard_solve(bp.problem, grid);
    record("picard_converged", sol.converged, solution_json(sol));
    if (!sol.converged) {
        write_report(cfg, "verify_report.json",
                     {{"passed", false}, {"checks", std::move(checks)}});
        return kExitNumeric;
    }

    RadialSolution oracle = ode_oracle(bp.problem, grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < sol.u.size(); ++i)
        sup = std::max(sup, std::fabs(sol.u[i] - oracle.u[i]));
    record("scheme_oracle_agreement", oracle.converged && sup <= 1e-5,
           {{"sup_diff", sup}});

    const PlanningModel& model = *bp.model;
    HTransform ht(bp.problem.pair, bp.problem.u0);
    double worst_h = 0.0, worst_pb = 0.0, worst_pu = 0.0;
    for (int k = 0; k <= 24; ++k) {
        double s = model.u0 + k * 4.0;
        double exact = closed_H(model, s);
        double quad = eval_H(ht, s);
        worst_h = std::max(worst_h,
                           std::fabs(quad - exact) / std::max(1.0, std::fabs(exact)));
    }
    for (int k = 0; k <= 20; ++k) {
        double r = 10.0 * k / 20.0;
        worst_pb = std::max(worst_pb,
                            std::fabs(p_bar(bp.problem, r) - closed_p_bar(model, r)) /
                                std::max(1.0, closed_p_bar(model, r)));
        worst_pu = std::max(worst_pu, std::fabs(p_under(bp.problem, r) -
                                                closed_p_under(model, r)) /
                                          std::max(1.0, closed_p_under(model, r)));
    }
    record("closed_forms_vs_quadrature",
           worst_h <= 1e-8 && worst_pb <= 1e-8 && worst_pu <= 1e-8,
           {{"worst_H", worst_h}, {"worst_p_bar", worst_pb},
            {"worst_p_under", worst_pu}});

    BoundsReport bounds = check_bounds(bp.problem, sol, ht);
    record("envelope_bounds",
           bounds.a1_holds && bounds.a2_holds && bounds.lower_envelope_holds &&
               bounds.upper_envelope_holds,
           bounds_json(bounds));

    ConvexityReport conv = check_convexity(bp.problem, sol);
    record("convexity", conv.convex && conv.origin_consistent,
           {{"min_second_difference", conv.min_second_difference},
            {"u2_origin", conv.u2_origin},
            {"u2_expected", conv.u2_expected}});

    PolicyField field(model, sol);
    std::vector<double> hjb_probes;
    for (int k = 0; k <= 32; ++k)
        hjb_probes.push_back(cfg.grid.r_max * k / 32.0);
    HjbResidualReport hjb = hjb_residual(field, hjb_probes);
    record("hjb_residual", hjb.max_residual <= 1e-3,
           {{"max_residual", hjb.max_residual},
            {"mean_residual", hjb.mean_residual}});

    bool argmin_ok = true;
    for (int k = 1; k <= 5; ++k) {
        std::vector<double> x(model.N, 0.0);
        x[0] = 0.15 * k * cfg.grid.r_max;
        PGridSpec spec;
        spec.points_per_axis = 41;
        spec.half_width = 0.5;
        ArgminReport rep = hamiltonian_argmin_check(field, x, spec);
        argmin_ok &= rep.within_one_cell && rep.quarter_identity_ok;
    }
    record("hamiltonian_argmin", argmin_ok, {{"states", 5}});

    RadialProblem decay;
    decay.N = 3;
    decay.a = [](double r) { return std::exp(-r); };
    decay.b = [](double) { return 0.0; };
    decay.pair = bp.problem.pair;
    decay.u0 = 2.0;
    std::vector<double> schedule{20.0, 40.0, 80.0};
    LimitIdentityResult lim = limit_identity(decay, schedule);
    record("limit_identity",
           lim.status == LimitStatus::Converged &&
               std::fabs(lim.lhs - lim.rhs) <= 1e-6 * std::max(1.0, lim.rhs),
           {{"lhs", lim.lhs}, {"rhs", lim.rhs}});

    write_report(cfg, "verify_report.json",
                 {{"passed", all_ok}, {"checks", std::move(checks)}});
    return all_ok ? kExitOk : kExitNumeric;
}

std::vector<double> split_csv(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

int dispatch(const RunConfig& rc) {
    if (rc.command == "solve") return cmd_solve(rc);
    if (rc.command == "classify") return cmd_classify(rc);
    if (rc.command == "model") return cmd_model(rc);
    if (rc.command == "simulate") return cmd_simulate(rc);
    if (rc.command == "verify") return cmd_verify(rc);
    std::cerr << "unknown command '" << rc.command << "'\n";
    return kExitUsage;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"radial semilinear solver and production-planning toolkit",
                 "radplan"};
    app.require_subcommand(0, 1);

    RunConfig rc;
    std::string config_path;
    std::string sigma_csv, y0_csv, scalings_csv, probes_csv;
    app.add_option("--config", config_path,
                   "run a serialized RunConfig JSON file");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", rc.out, "output directory");
        sub->add_option("--u0", rc.problem.u0, "initial value u(0)");
        sub->add_option("--N", rc.problem.N, "space dimension / goods count");
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--r-max", rc.grid.r_max, "grid extent");
        sub->add_option("--n-grid", rc.grid.n_grid, "grid point count");
        sub->add_option("--tol-abs", rc.grid.tol_abs, "absolute tolerance");
        sub->add_option("--tol-rel", rc.grid.tol_rel, "relative tolerance");
        sub->add_option("--max-iter", rc.grid.max_iter, "iteration cap");
        sub->add_option("--blowup-cap", rc.grid.blowup_cap, "blow-up value cap");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--sigma", sigma_csv, "diffusion vector, comma separated");
        sub->add_option("--alpha", rc.problem.alpha, "discount rate");
    };
    auto add_coeffs = [&](CLI::App* sub) {
        sub->add_option("--pair", rc.problem.pair,
                        "nonlinearity pair: model-log or power:p,q,s0");
        sub->add_option("--a", rc.problem.a_expr, "coefficient a(r) expression");
        sub->add_option("--b", rc.problem.b_expr, "coefficient b(r) expression");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the radial problem");
    add_common(solve);
    add_grid(solve);
    add_coeffs(solve);
    add_model(solve);
    solve->add_flag("--model-log", rc.problem.use_model,
                    "use the production model coefficients");
    solve->add_option("--method", rc.grid.method, "picard | rk4 | both");

    CLI::App* classify_cmd =
        app.add_subcommand("classify", "large/bounded classification");
    add_common(classify_cmd);
    add_coeffs(classify_cmd);
    classify_cmd->add_option("--probes", probes_csv,
                             "probe radii, comma separated");

    CLI::App* model_cmd =
        app.add_subcommand("model", "production model construction and checks");
    add_common(model_cmd);
    add_grid(model_cmd);
    add_model(model_cmd);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo policy simulation");
    add_common(simulate);
    add_grid(simulate);
    add_model(simulate);
    simulate->add_option("--horizon", rc.sim.horizon, "time horizon T");
    simulate->add_option("--dt", rc.sim.dt, "Euler-Maruyama step");
    simulate->add_option("--paths", rc.sim.paths, "number of paths");
    simulate->add_option("--seed", rc.sim.seed, "RNG seed");
    simulate->add_option("--y0", y0_csv, "initial inventory, comma separated");
    simulate->add_option("--scalings", scalings_csv,
                         "policy scalings, comma separated");
    simulate->add_option("--probe-count", rc.sim.probe_count,
                         "transversality probe count");

    CLI::App* verify =
        app.add_subcommand("verify", "run the model verification battery");
    add_common(verify);
    add_grid(verify);
    add_model(verify);

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "cannot open config " << config_path << "\n";
                return kExitUsage;
            }
            json j = json::parse(in, nullptr, false);
            if (j.is_discarded()) {
                std::cerr << "malformed config " << config_path << "\n";
                return kExitUsage;
            }
            RunConfig from_file;
            try {
                from_file = j.get<RunConfig>();
            } catch (const std::exception& e) {
                std::cerr << "bad config schema: " << e.what() << "\n";
                return kExitUsage;
            }
            return dispatch(from_file);
        }

        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitUsage;
        }
        CLI::App* sub = app.get_subcommands().front();
        rc.command = sub->get_name();

        // Per-command grid defaults: the verification battery runs on
        // [0,2] x 4001, the simulator needs a wide field for path reach.
        auto defaulted = [&](const std::string& flag) {
            return sub->get_option(flag)->count() == 0;
        };
        if (rc.command == "model" || rc.command == "verify") {
            if (defaulted("--r-max")) rc.grid.r_max = 2.0;
            if (defaulted("--n-grid")) rc.grid.n_grid = 4001;
        } else if (rc.command == "simulate") {
            if (defaulted("--r-max")) rc.grid.r_max = 12.0;
            if (defaulted("--n-grid")) rc.grid.n_grid = 2401;
            if (defaulted("--blowup-cap")) rc.grid.blowup_cap = 1e30;
            if (defaulted("--max-iter")) rc.grid.max_iter = 2000;
        }
        if (!sigma_csv.empty()) rc.problem.sigma = split_csv(sigma_csv);
        if (!y0_csv.empty()) rc.sim.y0 = split_csv(y0_csv);
        if (!scalings_csv.empty()) rc.sim.scalings = split_csv(scalings_csv);
        if (!probes_csv.empty()) rc.probes = split_csv(probes_csv);
        if (rc.command == "model" || rc.command == "simulate" ||
            rc.command == "verify")
            rc.problem.use_model = true;
        if (static_cast<int>(rc.problem.sigma.size()) != rc.problem.N &&
            rc.problem.use_model)
            rc.problem.sigma.assign(rc.problem.N, 1.0);
        return dispatch(rc);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("radplan");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace radplan::cli
