#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "firesale/errors.hpp"
#include "firesale/inverse_demand.hpp"
#include "support.hpp"

#include <cmath>

using namespace firesale;

TEST_CASE("linear price values") {
    const auto f = InverseDemand::linear(1.0 / 210.0, 100.0);
    CHECK(f.price(0.0) == 1.0);
    CHECK(f.price(9.89011) == doctest::Approx(1.0 - 9.89011 / 210.0).epsilon(1e-15));
    CHECK(f.price(9.89011) == doctest::Approx(0.9529043).epsilon(1e-7));
    CHECK(f.slope(37.0) == doctest::Approx(-1.0 / 210.0));
    CHECK(f.curvature(37.0) == 0.0);
}

TEST_CASE("hyperbolic and exponential values") {
    const auto h = InverseDemand::hyperbolic(200.0, 100.0);
    CHECK(h.price(100.0) == doctest::Approx(200.0 / 300.0));
    CHECK(h.slope(100.0) == doctest::Approx(-200.0 / (300.0 * 300.0)));
    CHECK(h.curvature(100.0) == doctest::Approx(2.0 * 200.0 / (300.0 * 300.0 * 300.0)));

    const auto e = InverseDemand::exponential(0.005, 100.0);
    CHECK(e.price(40.0) == doctest::Approx(std::exp(-0.2)));
    CHECK(e.slope(40.0) == doctest::Approx(-0.005 * std::exp(-0.2)));
    CHECK(e.curvature(40.0) == doctest::Approx(0.005 * 0.005 * std::exp(-0.2)));
}

TEST_CASE("price outside [0, M] is a domain error") {
    const auto f = InverseDemand::linear(0.001, 100.0);
    CHECK_THROWS_AS(f.price(-0.5), DomainError);
    CHECK_THROWS_AS(f.price(100.5), DomainError);
    CHECK_THROWS_AS(f.slope(101.0), DomainError);
    CHECK_THROWS_AS(f.curvature(-1.0), DomainError);
    CHECK_NOTHROW(f.price(100.0));
}

TEST_CASE("bad parameters are rejected") {
    CHECK_THROWS_AS(InverseDemand::linear(-1.0, 10.0), InvalidInput);
    CHECK_THROWS_AS(InverseDemand::linear(0.01, 0.0), InvalidInput);
    CHECK_THROWS_AS(InverseDemand::hyperbolic(0.0, 10.0), InvalidInput);
}

TEST_CASE("finite differences agree with analytic derivatives") {
    const double M = 100.0;
    const InverseDemand families[] = {InverseDemand::linear(0.004, M), InverseDemand::exponential(0.005, M),
                                      InverseDemand::hyperbolic(180.0, M)};
    const double d = 1e-5 * M;
    for (const auto& f : families) {
        CAPTURE(f.describe());
        for (int k = 1; k < 1000; ++k) {
            const double s = M * k / 1000.0;
            if (s - d < 0.0 || s + d > M) continue;
            const double fd_slope = (f.price(s + d) - f.price(s - d)) / (2 * d);
            const double fd_curv = (f.slope(s + d) - f.slope(s - d)) / (2 * d);
            REQUIRE(std::abs(fd_slope - f.slope(s)) <= 1e-6);
            REQUIRE(std::abs(fd_curv - f.curvature(s)) <= 1e-6);
        }
    }
}

TEST_CASE("price is monotone and stays in [f(M), 1]") {
    const double M = 50.0;
    const InverseDemand families[] = {InverseDemand::linear(0.009, M), InverseDemand::exponential(0.01, M),
                                      InverseDemand::hyperbolic(90.0, M)};
    for (const auto& f : families) {
        double prev = f.price(0.0);
        for (int k = 1; k <= 2000; ++k) {
            const double p = f.price(M * k / 2000.0);
            REQUIRE(p < prev);
            REQUIRE(p >= f.price(M));
            REQUIRE(p <= 1.0);
            prev = p;
        }
    }
}

TEST_CASE("standing assumption on the named families") {
    const double M = 100.0;
    CHECK(validate_assumption1(InverseDemand::linear(0.9 / (2 * M), M)).pass);

    const auto steep = validate_assumption1(InverseDemand::linear(1.0 / M, M));
    CHECK_FALSE(steep.pass);
    CHECK_FALSE(steep.clause("revenue_increasing").pass);
    CHECK(steep.clause("revenue_concave").pass);
    CHECK(steep.clause("revenue_increasing").worst_location > M / 2);

    CHECK(validate_assumption1(InverseDemand::exponential(0.5 / M, M)).pass);
    CHECK_FALSE(validate_assumption1(InverseDemand::exponential(1.2 / M, M)).pass);
    CHECK(validate_assumption1(InverseDemand::hyperbolic(0.3 * M, M)).pass);
}

TEST_CASE("custom families are judged on the grid") {
    const double M = 10.0;
    // f(s) = 1 - 0.02 s^2 has s f(s) peaking at s = sqrt(1/0.06) ~ 4.08 < M.
    const auto bad = InverseDemand::custom([](double s) { return 1.0 - 0.02 * s * s; },
                                           [](double s) { return -0.04 * s; }, [](double) { return -0.04; }, M);
    const auto report = validate_assumption1(bad);
    CHECK_FALSE(report.pass);
    CHECK_FALSE(report.clause("revenue_increasing").pass);
    CHECK_FALSE(report.clause("slope_nondecreasing").pass);

    const auto good = InverseDemand::custom([](double s) { return 1.0 / (1.0 + 0.01 * s); },
                                            [](double s) { return -0.01 / ((1.0 + 0.01 * s) * (1.0 + 0.01 * s)); },
                                            [](double s) {
                                                const double u = 1.0 + 0.01 * s;
                                                return 2.0 * 0.0001 / (u * u * u);
                                            },
                                            M);
    CHECK(validate_assumption1(good).pass);
}

TEST_CASE("uniqueness conditions") {
    const double M = 100.0;
    const auto lin = validate_uniqueness(InverseDemand::linear(1.0 / 210.0, M));
    CHECK(lin.pass);
    CHECK(lin.margin == doctest::Approx((1.0 - M / 210.0) - M / 210.0));

    // Exponential: passes below W(1)/M, fails above it.
    const double w1 = testing_support::lambert_w1();
    CHECK(w1 == doctest::Approx(0.5671432904097838));
    CHECK(validate_uniqueness(InverseDemand::exponential(0.5 / M, M)).pass);
    CHECK(validate_uniqueness(InverseDemand::exponential(0.99 * w1 / M, M)).pass);
    CHECK_FALSE(validate_uniqueness(InverseDemand::exponential(1.01 * w1 / M, M)).pass);

    // Hyperbolic: the golden-ratio threshold.
    CHECK(validate_uniqueness(InverseDemand::hyperbolic(1.7 * M, M)).pass);
    CHECK_FALSE(validate_uniqueness(InverseDemand::hyperbolic(1.5 * M, M)).pass);

    // With a haircut the bound tightens to nu.
    const auto coll = validate_uniqueness(InverseDemand::linear(1.0 / 210.0, M), 0.01);
    CHECK_FALSE(coll.pass);
    CHECK(coll.margin == doctest::Approx(0.01 - M / 210.0));
    CHECK(validate_uniqueness(InverseDemand::linear(0.0005, M), 0.1).pass);
}

TEST_CASE("idf specs parse and round-trip") {
    const auto f = parse_inverse_demand("linear:alpha=1/210", 100.0);
    CHECK(f.family() == InverseDemand::Family::Linear);
    CHECK(f.parameter() == doctest::Approx(1.0 / 210.0));
    const auto g = parse_inverse_demand(f.describe(), 100.0);
    CHECK(g.parameter() == f.parameter());
    CHECK(parse_inverse_demand("exp:alpha=0.002", 10.0).family() == InverseDemand::Family::Exponential);
    CHECK(parse_inverse_demand("hyp:eps=300", 10.0).parameter() == 300.0);
    CHECK_THROWS_AS(parse_inverse_demand("cubic:alpha=1", 10.0), InvalidInput);
    CHECK_THROWS_AS(parse_inverse_demand("linear:eps=1", 10.0), InvalidInput);
    CHECK_THROWS_AS(parse_inverse_demand("linear:alpha=abc", 10.0), InvalidInput);
}

TEST_CASE("property: random linear and exponential parameters match their analytic verdicts") {
    testing_support::Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const double M = rng.uniform(1.0, 500.0);
        const double x = rng.uniform(0.01, 1.9);
        const bool lin_ok = x < 1.0;  // 2 alpha M < 1 with alpha = x / (2M)
        CHECK(validate_assumption1(InverseDemand::linear(x / (2 * M), M), 2001).pass == lin_ok);
        const bool exp_ok = x < 1.0;  // alpha M < 1
        CHECK(validate_assumption1(InverseDemand::exponential(x / M, M), 2001).pass == exp_ok);
    }
}
