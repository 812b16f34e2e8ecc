#include <doctest.h>

#include <cmath>

#include "cad/rng.hpp"
#include "cad/specfun.hpp"
#include "support/oracles.hpp"

using namespace cad;

TEST_CASE("digamma matches frozen reference values") {
    // psi(1) = -gamma, psi(0.5) = -gamma - 2 ln 2
    CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286060).epsilon(1e-12));
    CHECK(digamma(0.5) == doctest::Approx(-1.9635100260214234794).epsilon(1e-12));
    CHECK(digamma(2.0) - digamma(1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("digamma recurrence psi(x+1) = psi(x) + 1/x") {
    for (double x : {0.1, 0.37, 1.0, 2.5, 5.9, 6.1, 17.0, 123.4}) {
        CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
    }
}

TEST_CASE("digamma agrees with the lgamma finite-difference oracle") {
    for (double x : {0.2, 0.5, 0.9, 1.0, 1.7, 3.0, 6.0, 10.5, 42.0, 300.0}) {
        CHECK(digamma(x) == doctest::Approx(test::digamma_reference(x)).epsilon(5e-9));
    }
}

TEST_CASE("digamma rejects nonpositive arguments") {
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-3.5), std::domain_error);
}

TEST_CASE("trigamma matches the known value at 1 and the recurrence") {
    // psi'(1) = pi^2 / 6
    CHECK(trigamma(1.0) == doctest::Approx(1.6449340668482264365).epsilon(1e-12));
    for (double x : {0.3, 1.1, 4.2, 9.0})
        CHECK(trigamma(x + 1.0) == doctest::Approx(trigamma(x) - 1.0 / (x * x)).epsilon(1e-12));
}

TEST_CASE("inv_digamma inverts digamma") {
    for (double x : {0.5, 1.0, 5.0, 40.0}) {
        CHECK(inv_digamma(digamma(x)) == doctest::Approx(x).epsilon(1e-8));
    }
    CHECK(inv_digamma(-0.57721566490153286060) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("inv_digamma is monotone on a random grid") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const double y1 = rng.uniform(-30.0, 8.0);
        const double y2 = y1 + rng.uniform(1e-3, 2.0);
        CHECK(inv_digamma(y1) < inv_digamma(y2));
    }
}
