#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radplan/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("radplan_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("solve writes a strictly increasing CSV and a hashed report") {
    auto dir = fresh_dir("solve");
    int rc = radplan::cli::run({"solve", "--model-log", "--N", "3", "--sigma",
                                "1,1,1", "--alpha", "1", "--u0", "1", "--r-max",
                                "2", "--n-grid", "4001", "--method", "both",
                                "--out", dir.string()});
    CHECK(rc == 0);

    auto csv = slurp(dir / "solution.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "r,u,du");
    double prev_r = -1.0;
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        double r = std::stod(line.substr(0, line.find(',')));
        CHECK(r > prev_r);
        prev_r = r;
        ++rows;
    }
    CHECK(rows == 4001);

    auto rep = load_json(dir / "solve_report.json");
    CHECK(rep.contains("config_hash"));
    CHECK(rep["results"]["picard"]["converged"].get<bool>());
    CHECK(rep["results"]["sup_diff_picard_rk4"].get<double>() <= 1e-4);
}

TEST_CASE("classify recognizes decaying coefficients as Bounded") {
    auto dir = fresh_dir("classify");
    int rc = radplan::cli::run({"classify", "--a", "exp(-r)", "--b", "0",
                                "--pair", "model-log", "--u0", "2", "--N", "3",
                                "--out", dir.string()});
    CHECK(rc == 0);
    auto rep = load_json(dir / "classify_report.json");
    CHECK(rep["results"]["classification"] == "Bounded");
    // (1/(N-2)) int r e^{-r} dr = 1 for the single decaying coefficient
    CHECK(rep["results"]["p_bar_estimate"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("simulate is byte-identical under a fixed seed") {
    auto dir = fresh_dir("sim");
    std::vector<std::string> args{
        "simulate", "--N",     "3",    "--sigma",    "1,1,1", "--alpha",
        "1",        "--u0",    "1",    "--r-max",    "8",     "--n-grid",
        "801",      "--blowup-cap",    "1e30",       "--horizon", "1.0",
        "--dt",     "0.01",    "--paths", "50",      "--seed", "42",
        "--y0",     "1,1,1",   "--scalings", "0,1",  "--out", dir.string()};
    CHECK(radplan::cli::run(args) == 0);
    auto report1 = slurp(dir / "simulate_report.json");
    auto table1 = slurp(dir / "policy_table.csv");
    auto trans1 = slurp(dir / "transversality.csv");
    CHECK(radplan::cli::run(args) == 0);
    CHECK(slurp(dir / "simulate_report.json") == report1);
    CHECK(slurp(dir / "policy_table.csv") == table1);
    CHECK(slurp(dir / "transversality.csv") == trans1);
}

TEST_CASE("exit codes") {
    SUBCASE("unknown flag is usage error 64") {
        CHECK(radplan::cli::run({"solve", "--definitely-not-a-flag"}) == 64);
        CHECK(radplan::cli::run({"frobnicate"}) == 64);
        CHECK(radplan::cli::run({}) == 64);
        CHECK(radplan::cli::run({"solve", "--model-log", "--method", "euler"}) ==
              64);
    }
    SUBCASE("invalid nonlinearity pair is validation error 2") {
        auto dir = fresh_dir("badpair");
        CHECK(radplan::cli::run({"solve", "--pair", "nope", "--a", "1", "--b",
                             "0", "--out", dir.string()}) == 2);
    }
    SUBCASE("invalid model is validation error 2") {
        auto dir = fresh_dir("badmodel");
        CHECK(radplan::cli::run({"model", "--N", "2", "--sigma", "1,0",
                                 "--alpha", "1", "--u0", "1", "--out",
                                 dir.string()}) == 2);
    }
    SUBCASE("blow-up is numeric error 3 with the report still written") {
        auto dir = fresh_dir("blowup");
        int rc = radplan::cli::run({"solve", "--pair", "power:3,1,1", "--a",
                                    "1", "--b", "1", "--u0", "1", "--N", "3",
                                    "--r-max", "2.8", "--n-grid", "1401",
                                    "--out", dir.string()});
        CHECK(rc == 3);
        auto rep = load_json(dir / "solve_report.json");
        CHECK_FALSE(rep["results"]["picard"]["converged"].get<bool>());
        CHECK(rep["results"]["picard"].contains("blowup_radius"));
    }
}

TEST_CASE("model command emits the verification fields") {
    auto dir = fresh_dir("model");
    int rc = radplan::cli::run({"model", "--N", "3", "--sigma", "1,1,1",
                                "--alpha", "1", "--u0", "1", "--n-grid", "2001",
                                "--out", dir.string()});
    CHECK(rc == 0);
    auto rep = load_json(dir / "model_report.json");
    CHECK(rep["results"]["bounds"]["upper_envelope_holds"].get<bool>());
    CHECK(rep["results"]["bounds"]["lower_envelope_holds"].get<bool>());
    CHECK(rep["results"]["convexity"]["convex"].get<bool>());
    CHECK(rep["results"]["hjb"]["max_residual"].get<double>() <= 1e-3);
    CHECK(rep["results"]["closed_forms"]["p_bar_at_1"].get<double>() ==
          doctest::Approx(7.0 / 60.0));
    CHECK(rep["results"]["sup_diff_picard_rk4"].get<double>() <= 1e-5);
}

TEST_CASE("verify battery passes on the default model") {
    auto dir = fresh_dir("verify");
    int rc = radplan::cli::run({"verify", "--N", "3", "--sigma", "1,1,1",
                                "--alpha", "1", "--u0", "1", "--out",
                                dir.string()});
    CHECK(rc == 0);
    auto rep = load_json(dir / "verify_report.json");
    CHECK(rep["results"]["passed"].get<bool>());
    for (const auto& check : rep["results"]["checks"])
        CHECK(check["passed"].get<bool>());
}

TEST_CASE("config files round-trip losslessly") {
    auto dir1 = fresh_dir("cfg1");
    int rc = radplan::cli::run({"solve", "--model-log", "--N", "3", "--sigma",
                                "1,1,1", "--alpha", "1", "--u0", "1",
                                "--r-max", "1.5", "--n-grid", "501", "--out",
                                dir1.string()});
    REQUIRE(rc == 0);
    auto rep1 = load_json(dir1 / "solve_report.json");

    // Re-run from the emitted config, redirected to a second directory.
    auto dir2 = fresh_dir("cfg2");
    json cfg = rep1["config"];
    cfg["out"] = dir2.string();
    auto cfg_path = dir2 / "run.json";
    {
        std::ofstream out(cfg_path);
        out << cfg.dump(2);
    }
    CHECK(radplan::cli::run({"--config", cfg_path.string()}) == 0);
    auto rep2 = load_json(dir2 / "solve_report.json");

    // Identical settings except the output directory; identical results.
    json c1 = rep1["config"], c2 = rep2["config"];
    c1.erase("out");
    c2.erase("out");
    CHECK(c1 == c2);
    CHECK(rep1["results"] == rep2["results"]);
}
