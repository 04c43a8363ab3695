#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "radplan/analysis.hpp"
#include "radplan/planning_model.hpp"

using namespace radplan;

namespace {

RadialProblem sinh_problem() {
    RadialProblem p;
    p.N = 3;
    p.a = [](double) { return 1.0; };
    p.b = [](double) { return 0.0; };
    p.pair = NonlinearityPair::custom([](double u) { return u; },
                                      [](double u) { return u - 1.0; }, 1.0);
    p.u0 = 1.0;
    return p;
}

RadialProblem zero_problem(double u0) {
    RadialProblem p;
    p.N = 3;
    p.a = [](double) { return 0.0; };
    p.b = [](double) { return 0.0; };
    p.pair = NonlinearityPair::model_log();
    p.u0 = u0;
    return p;
}

}  // namespace

TEST_CASE("m_function selects the right branch") {
    SUBCASE("model with u0=1: g(u0)=0 branch") {
        auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
        (void)model;
        CHECK(m_function(problem, 2.0) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    }
    SUBCASE("g(u0) != 0 uses (a+b) min{h,g}") {
        RadialProblem p;
        p.N = 3;
        p.a = [](double) { return 1.0; };
        p.b = [](double) { return 1.0; };
        p.pair = NonlinearityPair::custom([](double) { return 2.0; },
                                          [](double) { return 3.0; }, 0.5);
        p.u0 = 1.0;  // h(u0)=2, g(u0)=3
        CHECK(m_function(p, 7.0) == doctest::Approx(4.0));
    }
    SUBCASE("u0 = s0 forces the first branch since g(s0)=0") {
        auto pair = NonlinearityPair::model_log();
        RadialProblem p;
        p.N = 3;
        p.a = [](double s) { return s; };
        p.b = [](double) { return 5.0; };
        p.pair = pair;
        p.u0 = pair.s0;
        CHECK(m_function(p, 3.0) == doctest::Approx(3.0 * pair.h(pair.s0)));
    }
}

TEST_CASE("envelope integrals against the model closed forms") {
    auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
    CHECK(p_bar(problem, 1.0) == doctest::Approx(7.0 / 60.0).epsilon(1e-9));
    CHECK(p_under(problem, 1.0) == doctest::Approx(1.0 / 180.0).epsilon(1e-9));
    CHECK(p_bar(problem, 0.0) == 0.0);

    for (double r : {0.5, 2.0, 5.0, 10.0}) {
        CHECK(p_bar(problem, r) ==
              doctest::Approx(closed_p_bar(model, r)).epsilon(1e-8));
        CHECK(p_under(problem, r) ==
              doctest::Approx(closed_p_under(model, r)).epsilon(1e-8));
    }

    auto zero = zero_problem(2.0);
    CHECK(p_bar(zero, 3.0) == 0.0);
    CHECK(p_under(zero, 3.0) == 0.0);
}

TEST_CASE("envelopes are nondecreasing in r, positive when coefficients are") {
    auto [model, problem] = build_model(3, {1.0, 2.0, 0.5}, 0.7, 1.5);
    (void)model;
    double prev_bar = 0.0, prev_under = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double pb = p_bar(problem, r), pu = p_under(problem, r);
        CHECK(pb >= prev_bar);
        CHECK(pu >= prev_under);
        CHECK(pb > 0.0);
        prev_bar = pb;
        prev_under = pu;
    }
}

TEST_CASE("classify: production model is Large for N in 1..6") {
    std::vector<double> probes;
    for (double r = 0.1; r <= 1.5e13; r *= 10.0) probes.push_back(r);
    for (int N = 1; N <= 6; ++N) {
        auto [model, problem] = build_model(
            N, std::vector<double>(N, 0.6 + 0.2 * N), 0.5 + 0.25 * N, 1.0);
        (void)model;
        auto rep = classify(problem, probes);
        CHECK(rep.classification == Asymptotic::Large);
        CHECK(std::isinf(rep.p_under_estimate));
    }
}

TEST_CASE("classify: decaying coefficients are Bounded with Pbar(inf)=2") {
    RadialProblem p;
    p.N = 3;
    p.a = [](double r) { return std::exp(-r); };
    p.b = [](double r) { return std::exp(-r); };
    p.pair = NonlinearityPair::model_log();
    p.u0 = 2.0;
    std::vector<double> probes{1e10, 1e11, 1e12, 1e13};
    auto rep = classify(p, probes);
    CHECK(rep.classification == Asymptotic::Bounded);
    // (1/(N-2)) int_0^inf r * 2 e^{-r} dr = 2 for N=3
    CHECK(rep.p_bar_estimate == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("classify: zero coefficients are Bounded at zero") {
    auto zero = zero_problem(1.0);
    std::vector<double> probes{0.1, 1.0, 10.0, 100.0, 1000.0};
    auto rep = classify(zero, probes);
    CHECK(rep.classification == Asymptotic::Bounded);
    CHECK(rep.p_bar_estimate == 0.0);
}

TEST_CASE("classify validates its probe schedule") {
    auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
    (void)model;
    std::vector<double> too_few{1.0, 10.0, 100.0};
    CHECK_THROWS_AS((void)classify(problem, too_few), std::invalid_argument);
    std::vector<double> narrow{1.0, 2.0, 4.0, 8.0};
    CHECK_THROWS_AS((void)classify(problem, narrow), std::invalid_argument);
}

TEST_CASE("check_bounds: trivial problem holds with equality") {
    auto zero = zero_problem(2.0);
    GridConfig cfg;
    cfg.r_max = 1.0;
    cfg.n_points = 101;
    auto sol = picard_solve(zero, cfg);
    HTransform ht(zero.pair, zero.u0);
    auto rep = check_bounds(zero, sol, ht);
    CHECK(rep.a1_holds);
    CHECK(rep.a2_holds);
    CHECK(rep.lower_envelope_holds);
    CHECK(rep.upper_envelope_holds);
    CHECK(rep.min_lower_margin == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("check_bounds: model envelope dominates the computed solution") {
    auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
    (void)model;
    GridConfig cfg;
    cfg.r_max = 1.0;
    cfg.n_points = 2001;
    auto sol = picard_solve(problem, cfg);
    REQUIRE(sol.converged);
    HTransform ht(problem.pair, problem.u0);
    auto rep = check_bounds(problem, sol, ht);
    CHECK(rep.a1_holds);
    CHECK(rep.a2_holds);
    CHECK(rep.lower_envelope_holds);
    CHECK(rep.upper_envelope_holds);
    CHECK(rep.worst_margin >= -rep.tolerance);
}

TEST_CASE("check_bounds: sinh case lower envelope") {
    // m(s) = a(s) h(1) = 1, so Punder(r) = r^2/6 at N=3 and the bound reads
    // sinh(1)/1 = 1.1752 >= 1 + 1/6 = 1.1667.
    auto problem = sinh_problem();
    GridConfig cfg;
    cfg.r_max = 1.0;
    cfg.n_points = 2001;
    auto sol = picard_solve(problem, cfg);
    REQUIRE(sol.converged);
    HTransform ht(problem.pair, problem.u0);
    auto rep = check_bounds(problem, sol, ht);
    CHECK(rep.lower_envelope_holds);
    CHECK(sol.u.back() >= 1.0 + 1.0 / 6.0);
    CHECK(sol.u.back() == doctest::Approx(std::sinh(1.0)).epsilon(1e-6));
}

TEST_CASE("envelope sandwich across the problem matrix") {
    GridConfig cfg;
    cfg.r_max = 0.8;
    cfg.n_points = 1601;

    std::vector<RadialProblem> matrix;
    {
        auto [m1, p1] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
        (void)m1;
        matrix.push_back(p1);
        auto [m2, p2] = build_model(2, {1.0, 0.5}, 2.0, std::exp(1.0));
        (void)m2;
        matrix.push_back(p2);
        matrix.push_back(sinh_problem());
        RadialProblem power;  // r_max kept below the envelope radius
        power.N = 3;
        power.a = [](double) { return 1.0; };
        power.b = [](double) { return 1.0; };
        power.pair = NonlinearityPair::power(3.0, 1.0, 1.0);
        power.u0 = 1.0;
        matrix.push_back(power);
    }

    for (const auto& problem : matrix) {
        auto sol = picard_solve(problem, cfg);
        REQUIRE(sol.converged);
        HTransform ht(problem.pair, problem.u0);
        auto rep = check_bounds(problem, sol, ht);
        CHECK(rep.lower_envelope_holds);
        CHECK(rep.upper_envelope_holds);
        CHECK(rep.worst_margin >= -1e-5 * std::max(1.0, sol.u.back()));
    }
}

TEST_CASE("convexity checks") {
    SUBCASE("zero coefficients: flat solution") {
        auto zero = zero_problem(2.0);
        GridConfig cfg;
        cfg.r_max = 1.0;
        cfg.n_points = 101;
        auto sol = picard_solve(zero, cfg);
        auto rep = check_convexity(zero, sol);
        CHECK(rep.convex);
        CHECK(rep.min_second_difference == 0.0);
        CHECK(rep.u2_expected == 0.0);
        CHECK(rep.origin_consistent);
    }
    SUBCASE("production model is convex") {
        auto [model, problem] = build_model(3, {1.0, 1.0, 1.0}, 1.0, 1.0);
        (void)model;
        GridConfig cfg;
        cfg.r_max = 2.0;
        cfg.n_points = 4001;
        auto sol = picard_solve(problem, cfg);
        REQUIRE(sol.converged);
        auto rep = check_convexity(problem, sol);
        CHECK(rep.coefficients_nondecreasing);
        CHECK(rep.convex);
        CHECK(rep.origin_consistent);
    }
    SUBCASE("sinh case: u''(0) = 1/3") {
        auto problem = sinh_problem();
        GridConfig cfg;
        cfg.r_max = 2.0;
        cfg.n_points = 4001;
        auto sol = picard_solve(problem, cfg);
        REQUIRE(sol.converged);
        auto rep = check_convexity(problem, sol);
        CHECK(rep.convex);
        CHECK(rep.u2_expected == doctest::Approx(1.0 / 3.0));
        CHECK(rep.u2_origin == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
        CHECK(rep.origin_consistent);
    }
}

TEST_CASE("limit identity") {
    SUBCASE("exponential decay, N=3: both sides equal 1") {
        RadialProblem p;
        p.N = 3;
        p.a = [](double r) { return std::exp(-r); };
        p.b = [](double) { return 0.0; };
        p.pair = NonlinearityPair::model_log();
        p.u0 = 2.0;
        std::vector<double> schedule{20.0, 40.0, 80.0};
        auto res = limit_identity(p, schedule);
        CHECK(res.status == LimitStatus::Converged);
        CHECK(res.rhs == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.lhs == doctest::Approx(res.rhs).epsilon(1e-6));
    }
    SUBCASE("zero coefficients give (0, 0)") {
        auto zero = zero_problem(1.0);
        std::vector<double> schedule{10.0, 20.0};
        auto res = limit_identity(zero, schedule);
        CHECK(res.status == LimitStatus::Converged);
        CHECK(res.lhs == 0.0);
        CHECK(res.rhs == 0.0);
    }
    SUBCASE("Beta-integral case, N=4: both sides equal 1/12") {
        RadialProblem p;
        p.N = 4;
        p.a = [](double r) { return std::pow(1.0 + r, -4.0); };
        p.b = [](double) { return 0.0; };
        p.pair = NonlinearityPair::model_log();
        p.u0 = 1.0;
        std::vector<double> schedule{5e5, 1e6, 2e6, 4e6};
        auto res = limit_identity(p, schedule);
        CHECK(res.status == LimitStatus::Converged);
        CHECK(res.rhs == doctest::Approx(1.0 / 12.0).epsilon(1e-7));
        CHECK(res.lhs == doctest::Approx(res.rhs).epsilon(1e-6));
    }
    SUBCASE("N < 3 is rejected") {
        auto [model, problem] = build_model(2, {1.0, 1.0}, 1.0, 1.0);
        (void)model;
        std::vector<double> schedule{10.0, 20.0};
        CHECK_THROWS_AS((void)limit_identity(problem, schedule),
                        std::invalid_argument);
    }
    SUBCASE("divergent tails report +inf on both sides") {
        RadialProblem p;
        p.N = 3;
        p.a = [](double) { return 1.0; };
        p.b = [](double) { return 1.0; };
        p.pair = NonlinearityPair::model_log();
        p.u0 = 1.0;
        std::vector<double> schedule{10.0, 100.0, 1000.0};
        auto res = limit_identity(p, schedule);
        CHECK(res.status == LimitStatus::DivergentBoth);
        CHECK(std::isinf(res.lhs));
        CHECK(std::isinf(res.rhs));
    }
}
