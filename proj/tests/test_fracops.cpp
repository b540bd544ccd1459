#include "fractherm/fracops.hpp"

#include "fractherm/gamma.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fractherm;

TEST_SUITE("fracops") {

TEST_CASE("singular weights reproduce the constant moment on random grids") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const TimeGrid grid = oracles::random_grid(rng, 24, 2.0);
        const Real mu = -0.5;  // 2 alpha - 1 at alpha = 0.25
        const Index k = 1 + static_cast<Index>(rng() % 23);
        const QuadWeights w = singular_weights(grid, k, mu);
        const Real tk = grid[k];
        const Real analytic = std::pow(tk, mu + 1.0) / (mu + 1.0);
        CHECK(w.weights.sum() == doctest::Approx(analytic).epsilon(1e-12));
        // nothing past the target node contributes
        for (Index j = k + 1; j < grid.size(); ++j) CHECK(w.weights[j] == 0.0);
    }
}

TEST_CASE("two-point grid reproduces the Beta moment of a linear function") {
    // integral over [0, t] of (t-s)^(2a-1) * s ds = B(2, 2a) t^(2a+1),
    // B(2, 1/2) = 4/3 at alpha = 0.25.
    const Real t = 1.7;
    const TimeGrid grid = TimeGrid::uniform(0.0, t, 1);
    const QuadWeights w = singular_weights(grid, 1, -0.5);
    const Real got = w.weights[0] * 0.0 + w.weights[1] * t;
    const Real want = (4.0 / 3.0) * std::pow(t, 1.5);
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("weights are exact for piecewise-linear functions (quadrature oracle)") {
    std::mt19937_64 rng(13);
    const TimeGrid grid = oracles::random_grid(rng, 12, 1.5);
    const Vector v = oracles::random_values(rng, grid.size(), -2.0, 3.0);
    for (const Real mu : {-0.8, -0.5, -0.2}) {
        const Index k = grid.size() - 1;
        const QuadWeights w = singular_weights(grid, k, mu);
        const Real got = (w.weights * v).sum();
        const Real want = oracles::singular_integral(
            [&](Real s) { return oracles::interp(grid, v, s); }, grid[k], mu);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("weight errors: bad index, bad exponent") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    CHECK_THROWS_AS((void)singular_weights(grid, 0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)singular_weights(grid, 9, -0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)singular_weights(grid, 3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)singular_weights(grid, 3, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)singular_weights(grid, 3, 0.5), std::invalid_argument);
}

TEST_CASE("batch history sums match the per-node weights") {
    std::mt19937_64 rng(17);
    const Real mu = -0.37;
    SUBCASE("uniform grid takes the table path") {
        const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 40);
        const Vector v = oracles::random_values(rng, grid.size(), -1.0, 1.0);
        const Vector sums = weakly_singular_sums(grid, mu, v);
        CHECK(sums[0] == 0.0);
        for (Index k = 1; k < grid.size(); ++k) {
            const Real want = (singular_weights(grid, k, mu).weights * v).sum();
            CHECK(sums[k] == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("graded grid takes the general path") {
        const TimeGrid grid = TimeGrid::graded(0.0, 2.0, 40, 2.0);
        const Vector v = oracles::random_values(rng, grid.size(), -1.0, 1.0);
        const Vector sums = weakly_singular_sums(grid, mu, v);
        for (Index k = 1; k < grid.size(); ++k) {
            const Real want = (singular_weights(grid, k, mu).weights * v).sum();
            CHECK(sums[k] == doctest::Approx(want).epsilon(1e-12));
        }
    }
    SUBCASE("tail variant zeroes the skipped rows") {
        const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
        const Vector v = oracles::random_values(rng, grid.size(), 0.0, 1.0);
        const Vector all = weakly_singular_sums(grid, mu, v);
        const Vector tail = weakly_singular_sums_tail(grid, mu, v, 10);
        for (Index k = 0; k < 10; ++k) CHECK(tail[k] == 0.0);
        for (Index k = 10; k < grid.size(); ++k) CHECK(tail[k] == all[k]);
    }
}

TEST_CASE("history integral with outer time matches the quadrature oracle") {
    std::mt19937_64 rng(19);
    const TimeGrid grid = oracles::random_grid(rng, 10, 0.5);
    const Vector v = oracles::random_values(rng, grid.size(), 0.5, 2.0);
    const Real t_outer = 0.75;
    const Real got = weakly_singular_history(grid, -0.5, v, t_outer);
    // t_outer > back keeps the kernel smooth over the history, so plain
    // composite Simpson is an independent oracle here
    const Real direct = [&] {
        const int n = 200000;
        const Real h = grid.back() / n;
        auto f = [&](Real s) {
            return std::pow(t_outer - s, -0.5) * oracles::interp(grid, v, s);
        };
        Real odd = 0.0, even = 0.0;
        for (int i = 1; i < n; i += 2) odd += f(h * i);
        for (int i = 2; i < n; i += 2) even += f(h * i);
        return (f(0.0) + f(grid.back()) + 4.0 * odd + 2.0 * even) * h / 3.0;
    }();
    CHECK(got == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("rl_integral of 1 equals t^a / gamma(a+1) to rounding") {
    // piecewise-linear product integration reproduces constants exactly
    for (const bool graded : {false, true}) {
        const TimeGrid grid = graded ? TimeGrid::graded(0.0, 1.0, 256, 2.0)
                                     : TimeGrid::uniform(0.0, 1.0, 256);
        const SampledFn one = SampledFn::constant(grid, 1.0);
        const SampledFn j = rl_integral(one, FracOrder(0.5));
        CHECK(j.values[0] == 0.0);
        for (Index k = 1; k < grid.size(); ++k) {
            const Real want = std::sqrt(grid[k]) * oracles::kInvGammaThreeHalves;
            CHECK(j.values[k] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("rl_integral near order 1 approaches the classical integral") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 512);
    const SampledFn g{grid, grid.points()};
    const SampledFn j = rl_integral(g, FracOrder(0.999));
    CHECK(j.values[grid.size() - 1] == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("rl_integral of zero is identically zero") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 64);
    const SampledFn z = SampledFn::constant(grid, 0.0);
    const SampledFn j = rl_integral(z, FracOrder(0.3));
    CHECK((j.values == 0.0).all());
}

TEST_CASE("rl_integral requires a grid starting at zero") {
    const TimeGrid grid = TimeGrid::uniform(0.5, 1.0, 8);
    const SampledFn g = SampledFn::constant(grid, 1.0);
    CHECK_THROWS_AS((void)rl_integral(g, FracOrder(0.5)), std::invalid_argument);
}

TEST_CASE("linearity to machine precision") {
    std::mt19937_64 rng(23);
    const TimeGrid grid = oracles::random_grid(rng, 48, 1.0);
    const Vector g = oracles::random_values(rng, grid.size(), -1.0, 1.0);
    const Vector q = oracles::random_values(rng, grid.size(), -1.0, 1.0);
    const Real a = 2.25, b = -0.75;
    const SampledFn lhs = rl_integral({grid, a * g + b * q}, FracOrder(0.4));
    const SampledFn ga = rl_integral({grid, g}, FracOrder(0.4));
    const SampledFn qa = rl_integral({grid, q}, FracOrder(0.4));
    const Vector rhs = a * ga.values + b * qa.values;
    CHECK(sup_norm(lhs.values - rhs) <= 1e-13 * std::max(1.0, sup_norm(rhs)));
}

TEST_CASE("semigroup under refinement: I^a1 I^a2 = I^(a1+a2)") {
    const Real a1 = 0.3, a2 = 0.4;
    Real prev_err = 0.0;
    std::vector<Real> errs;
    for (const Index n : {64, 128, 256}) {
        const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
        const SampledFn g{grid, grid.points().square()};
        const SampledFn lhs = rl_integral(rl_integral(g, FracOrder(a1)), FracOrder(a2));
        const SampledFn rhs = rl_integral(g, FracOrder(a1 + a2));
        errs.push_back(sup_distance(lhs, rhs));
        (void)prev_err;
    }
    CHECK(oracles::empirical_order(errs[0], errs[1]) >= 1.0);
    CHECK(oracles::empirical_order(errs[1], errs[2]) >= 1.0);
}

TEST_CASE("caputo annihilates constants bit-exactly") {
    const TimeGrid grid = TimeGrid::graded(0.0, 3.0, 100, 2.0);
    const SampledFn c = SampledFn::constant(grid, 7.0);
    const SampledFn d = caputo_derivative(c, FracOrder(0.5));
    CHECK((d.values == 0.0).all());
}

TEST_CASE("caputo power rule for t and t^2") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4096);
    SUBCASE("g = t is reproduced to rounding (telescoping sum)") {
        const SampledFn g{grid, grid.points()};
        const SampledFn d = caputo_derivative(g, FracOrder(0.5));
        const Index last = grid.size() - 1;
        CHECK(d.values[last] == doctest::Approx(oracles::kInvGammaThreeHalves).epsilon(1e-12));
    }
    SUBCASE("g = t^2 converges at the L1 rate") {
        const SampledFn g{grid, grid.points().square()};
        const SampledFn d = caputo_derivative(g, FracOrder(0.5));
        const Index last = grid.size() - 1;
        CHECK(std::abs(d.values[last] - oracles::kCaputoSquareHalf) / oracles::kCaputoSquareHalf
              <= 1e-4);
    }
}

TEST_CASE("power-rule convergence orders sit at the scheme rates") {
    const Real gam = 0.5;
    std::vector<Real> caputo_errs, rl_errs, caputo_t_errs, rl_t_errs;
    for (const Index n : {256, 512, 1024}) {
        const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
        const Vector t = grid.points();
        const SampledFn g2{grid, t.square()};
        const SampledFn g1{grid, t};

        const SampledFn d2 = caputo_derivative(g2, FracOrder(gam));
        const Vector d2_want = (2.0 / gamma_fn(3.0 - gam)) * t.pow(2.0 - gam);
        caputo_errs.push_back(sup_norm(d2.values - d2_want));

        const SampledFn j2 = rl_integral(g2, FracOrder(gam));
        const Vector j2_want = (2.0 / gamma_fn(3.0 + gam)) * t.pow(2.0 + gam);
        rl_errs.push_back(sup_norm(j2.values - j2_want));

        const SampledFn d1 = caputo_derivative(g1, FracOrder(gam));
        const Vector d1_want = (1.0 / gamma_fn(2.0 - gam)) * t.pow(1.0 - gam);
        caputo_t_errs.push_back(sup_norm(d1.values - d1_want));

        const SampledFn j1 = rl_integral(g1, FracOrder(gam));
        const Vector j1_want = (1.0 / gamma_fn(2.0 + gam)) * t.pow(1.0 + gam);
        rl_t_errs.push_back(sup_norm(j1.values - j1_want));
    }
    // t^2: genuine discretization error at the theoretical rates
    CHECK(std::abs(oracles::empirical_order(caputo_errs[0], caputo_errs[1]) - (2.0 - gam)) <= 0.25);
    CHECK(std::abs(oracles::empirical_order(caputo_errs[1], caputo_errs[2]) - (2.0 - gam)) <= 0.25);
    CHECK(std::abs(oracles::empirical_order(rl_errs[0], rl_errs[1]) - 2.0) <= 0.25);
    CHECK(std::abs(oracles::empirical_order(rl_errs[1], rl_errs[2]) - 2.0) <= 0.25);
    // t: both schemes reproduce the power exactly, so the error sits at rounding
    for (const Real e : caputo_t_errs) CHECK(e <= 1e-12);
    for (const Real e : rl_t_errs) CHECK(e <= 1e-12);
}

TEST_CASE("round trip I^g D^g recovers g - g(0) under refinement") {
    const Real gam = 0.5;
    std::vector<Real> errs;
    for (const Index n : {128, 256, 512}) {
        const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
        const Vector g = grid.points().square() + 1.0;
        const SampledFn round{grid, g};
        const SampledFn back = rl_integral(caputo_derivative(round, FracOrder(gam)), FracOrder(gam));
        errs.push_back(sup_norm(back.values - (g - g[0])));
    }
    CHECK(oracles::empirical_order(errs[0], errs[1]) >= 1.0);
    CHECK(oracles::empirical_order(errs[1], errs[2]) >= 1.0);
}

TEST_CASE("rl_derivative diagnostic: nonzero on constants") {
    // the Riemann-Liouville derivative of a constant is c t^(-gam) / gamma(1-gam)
    const Real gam = 0.5;
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4096);
    const SampledFn c = SampledFn::constant(grid, 3.0);
    const SampledFn d = rl_derivative(c, FracOrder(gam));
    const Index mid = grid.size() / 2;
    const Real want = 3.0 * std::pow(grid[mid], -gam) / gamma_fn(1.0 - gam);
    CHECK(d.values[mid] == doctest::Approx(want).epsilon(1e-3));
}

}  // TEST_SUITE
