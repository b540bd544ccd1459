#include "fractherm/gamma.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace fractherm;

namespace {

Real rel_err(Real got, Real want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_SUITE("gamma") {

TEST_CASE("integer and half-integer values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(7.0) == doctest::Approx(720.0).epsilon(1e-13));
    CHECK(rel_err(gamma_fn(0.5), oracles::kGammaHalf) <= 1e-12);
    CHECK(rel_err(gamma_fn(1.5), oracles::kGammaThreeHalves) <= 1e-12);
    CHECK(rel_err(gamma_fn(2.5), oracles::kGammaFiveHalves) <= 1e-12);
}

TEST_CASE("frozen high-precision spot values") {
    CHECK(rel_err(gamma_fn(1e-3), oracles::kGammaMilli) <= 1e-12);
    CHECK(rel_err(gamma_fn(10.3), oracles::kGammaTenPointThree) <= 1e-12);
    CHECK(rel_err(gamma_fn(33.33), oracles::kGamma33_33) <= 1e-12);
    CHECK(rel_err(gamma_fn(170.0), oracles::kGamma170) <= 1e-12);
}

TEST_CASE("recurrence gamma(x+1) = x gamma(x)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<Real> dist(1e-3, 80.0);
    for (int i = 0; i < 200; ++i) {
        const Real x = dist(rng);
        CHECK(rel_err(gamma_fn(x + 1.0), x * gamma_fn(x)) <= 1e-12);
    }
}

TEST_CASE("contract accuracy across [1e-3, 170] against libm") {
    // std::tgamma is an independent implementation (glibc), accurate to a few
    // ulp; agreement at 1e-12 checks the contract over the whole domain.
    for (int i = 0; i <= 600; ++i) {
        const Real x = 1e-3 * std::pow(170.0 / 1e-3, i / 600.0);
        CHECK(rel_err(gamma_fn(x), std::tgamma(x)) <= 1e-12);
    }
}

TEST_CASE("domain and overflow errors") {
    CHECK_THROWS_AS((void)gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS((void)gamma_fn(-2.5), std::domain_error);
    CHECK_THROWS_AS((void)gamma_fn(170.5), std::overflow_error);
    CHECK_NOTHROW((void)gamma_fn(170.0));
}

}  // TEST_SUITE
