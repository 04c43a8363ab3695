#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "radplan/nonlinearity.hpp"

using namespace radplan;

TEST_CASE("model-log pair satisfies the structural conditions") {
    auto pair = NonlinearityPair::model_log();
    auto rep = validate_pair(pair, 64, 10.0);
    CHECK(rep.passed);
    CHECK(pair.g(0.5) == doctest::Approx(0.5 * std::log(0.5)));
    CHECK(pair.g(0.5) < 0.0);
    CHECK(pair.g(2.0) == doctest::Approx(2.0 * std::log(2.0)));
    CHECK(pair.g(2.0) > 0.0);
}

TEST_CASE("linear pair g(u)=u-1 passes, shifted g(u)=u+1 fails") {
    auto ok = NonlinearityPair::custom([](double u) { return u; },
                                       [](double u) { return u - 1.0; }, 1.0);
    CHECK(validate_pair(ok, 64, 10.0).passed);

    auto bad = NonlinearityPair::custom([](double u) { return u; },
                                        [](double u) { return u + 1.0; }, 1.0);
    auto rep = validate_pair(bad, 64, 10.0);
    CHECK_FALSE(rep.passed);
    auto* check = rep.find("g(s0)=0");
    REQUIRE(check != nullptr);
    CHECK_FALSE(check->passed);
    CHECK(check->value == doctest::Approx(2.0));
}

TEST_CASE("non-finite sample fails validation naming the point") {
    auto nasty = NonlinearityPair::custom(
        [](double u) { return u >= 5.0 ? std::nan("") : u; },
        [](double u) { return u - 1.0; }, 1.0);
    auto rep = validate_pair(nasty, 64, 10.0);
    CHECK_FALSE(rep.passed);
    auto* check = rep.find("h>0 on (0,s_max]");
    REQUIRE(check != nullptr);
    CHECK_FALSE(check->passed);
    CHECK(check->sample >= 5.0);
}

TEST_CASE("H for the model-log pair matches ln(1+ln s)") {
    HTransform ht(NonlinearityPair::model_log(), 1.0);
    CHECK(std::isinf(ht.h_infinity));

    CHECK(eval_H(ht, 1.0) == 0.0);
    CHECK(eval_H(ht, std::exp(1.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-10));

    for (double s : {1.5, 4.0, 1e2, 1e4, 1e6}) {
        double exact = std::log(1.0 + std::log(s));
        CHECK(eval_H(ht, s) == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("cubic power pair has a finite H limit") {
    // h(u)=u^3, g(u)=u-1: the tail behaves like t^-3, so H(inf) is finite.
    auto pair = NonlinearityPair::power(3.0, 1.0, 1.0);
    HTransform ht(pair, 1.0);
    REQUIRE(std::isfinite(ht.h_infinity));

    // Oracle: quadrature to a large cutoff plus the analytic tail bound
    // int_S^inf dt/(t^3+t-1) <= int_S^inf t^-3 dt = 1/(2 S^2).
    double cutoff = 1e5;
    double partial = eval_H(ht, cutoff);
    double tail_bound = 0.5 / (cutoff * cutoff);
    CHECK(ht.h_infinity >= partial - 1e-12);
    CHECK(ht.h_infinity <= partial + 2.0 * tail_bound + 1e-12);

    CHECK_THROWS_AS((void)eval_H_inv(ht, 10.0), std::range_error);
}

TEST_CASE("H inverse closed form and trivial points") {
    HTransform ht(NonlinearityPair::model_log(), 1.0);
    CHECK(eval_H_inv(ht, 0.0) == 1.0);
    CHECK(eval_H_inv(ht, std::log(2.0)) ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("round trip H^{-1}(H(s)) = s across the bracketed range") {
    HTransform ht(NonlinearityPair::model_log(), 1.0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    for (int k = 0; k < 50; ++k) {
        double s = ht.u0 + dist(rng);
        double back = eval_H_inv(ht, eval_H(ht, s));
        CHECK(back == doctest::Approx(s).epsilon(1e-8));
    }
}

TEST_CASE("H is strictly monotone") {
    HTransform ht(NonlinearityPair::model_log(), 2.0);
    double prev = eval_H(ht, 2.0);
    for (double s = 2.5; s < 40.0; s += 2.5) {
        double cur = eval_H(ht, s);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("domain guards") {
    HTransform ht(NonlinearityPair::model_log(), 1.0);
    CHECK_THROWS_AS((void)eval_H(ht, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)eval_H_inv(ht, -1.0), std::invalid_argument);

    // u0 below s0 is rejected outright: g < 0 there can make h+g vanish.
    CHECK_THROWS_AS(HTransform(NonlinearityPair::model_log(), 0.2),
                    std::invalid_argument);

    // A denominator that dies above u0 surfaces as a domain error as soon
    // as the tail estimate reaches it.
    auto dying = NonlinearityPair::custom(
        [](double u) { return u > 3.0 ? -u : u; },
        [](double u) { return u - 1.0; }, 1.0);
    CHECK_THROWS_AS(HTransform(dying, 1.0), std::domain_error);
}

TEST_CASE("validate_pair rejects degenerate arguments") {
    auto pair = NonlinearityPair::model_log();
    CHECK_THROWS_AS((void)validate_pair(pair, 4, 10.0), std::invalid_argument);
    CHECK_THROWS_AS((void)validate_pair(pair, 64, 0.5), std::invalid_argument);
}
