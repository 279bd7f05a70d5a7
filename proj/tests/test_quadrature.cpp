#include <doctest.h>

#include <cmath>

#include "bistab/quadrature.hpp"

using namespace bistab;

TEST_CASE("gauss_legendre_rule: weights positive and sum to interval length") {
    for (int n : {8, 64, 128, 256}) {
        const QuadratureRule rule = gauss_legendre_rule(n);
        REQUIRE(rule.nodes.size() == n);
        CHECK(rule.weights.minCoeff() > 0.0);
        CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rule.nodes.minCoeff() > 0.0);
        CHECK(rule.nodes.maxCoeff() < 1.0);
    }
}

TEST_CASE("gauss_legendre_rule: exact on polynomials up to degree 2n-1") {
    const int n = 16;
    const QuadratureRule rule = gauss_legendre_rule(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
        const double got = integrate(rule, [d](double x) { return std::pow(x, d); });
        CHECK(std::abs(got - 1.0 / (d + 1)) < 1e-13);
    }
}

TEST_CASE("integrate: interval mapping and error case") {
    const QuadratureRule rule = gauss_legendre_rule(32);
    const double got = integrate(rule, [](double x) { return std::sin(x); }, 0.0, 2.0);
    CHECK(got == doctest::Approx(1.0 - std::cos(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(integrate(rule, [](double) { return 0.0; }, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("gauss_legendre_nodes: invalid order rejected") {
    CHECK_THROWS_AS(gauss_legendre_nodes<double>(0, 1e-15), std::invalid_argument);
}
