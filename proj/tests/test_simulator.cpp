#include <doctest.h>

#include <cmath>

#include "capdist/analytic.hpp"
#include "capdist/errors.hpp"
#include "capdist/simulator.hpp"
#include "oracles.hpp"

using namespace capdist;

TEST_CASE("simulate: concentration at the D = 0.1 optimizer") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    const InputDistribution px({0.25, 0.75});
    const auto r = simulate(m, px, 100000, 1);
    CHECK(r.analytic_distortion == doctest::Approx(0.1));
    CHECK(std::abs(r.empirical_distortion - 0.1) <= 3 * std::sqrt(0.1 * 0.9 / 1e5));
    CHECK(r.empirical_mi >= 0.0);
    CHECK(r.empirical_distortion >= 0.0);
    CHECK(r.empirical_distortion <= 1.0);
}

TEST_CASE("simulate: a zero-cost letter gives zero distortion") {
    const auto r = simulate(analytic::scalar_multiplicative_model(0.4), InputDistribution::point_mass(2, 1), 10000, 5);
    CHECK(r.empirical_distortion == 0.0);
    CHECK(r.empirical_mi == 0.0);
}

TEST_CASE("simulate: blind estimation costs the prior error") {
    const auto r = simulate(analytic::scalar_multiplicative_model(0.4), InputDistribution::point_mass(2, 0), 100000, 2);
    CHECK(r.empirical_distortion == doctest::Approx(0.4).epsilon(0.01));
}

TEST_CASE("simulate: deterministic and independent of the worker count") {
    const auto m = analytic::block_multiplicative_model(0.3, 2);
    const auto px = InputDistribution::uniform(4);
    const auto a = simulate(m, px, 300000, 42, 1);
    const auto b = simulate(m, px, 300000, 42, 1);
    const auto c = simulate(m, px, 300000, 42, 4);
    CHECK(a == b);
    CHECK(a == c);
    CHECK_FALSE(a == simulate(m, px, 300000, 43, 1));
}

TEST_CASE("simulate: plug-in mutual information") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    const InputDistribution px({0.25, 0.75});
    const double exact = oracle::scalar_mi(0.4, 0.75);
    // Spread across seeds estimates the estimator's standard deviation.
    std::vector<double> est;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) est.push_back(simulate(m, px, 100000, seed, 2).empirical_mi);
    double mean = 0.0, var = 0.0;
    for (double v : est) mean += v / est.size();
    for (double v : est) var += (v - mean) * (v - mean) / (est.size() - 1);
    const double bound = 4.0 / (2 * 1e5) + 5 * std::sqrt(var);
    for (double v : est) CHECK(std::abs(v - exact) <= bound);
    CHECK(std::abs(simulate(m, px, 1000000, 9, 4).empirical_mi - exact) <= 0.01);
}

TEST_CASE("simulate: argument checks") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    CHECK_THROWS_AS(simulate(m, InputDistribution::uniform(2), 0, 1), InvalidArgument);
    CHECK_THROWS_AS(simulate(m, InputDistribution::uniform(3), 10, 1), DimensionMismatch);
}

TEST_CASE("check_factorization") {
    SUBCASE("scalar model, n = 3") {
        const auto r = check_factorization(analytic::scalar_multiplicative_model(0.4), InputDistribution({0.5, 0.5}), 3,
                                           100, 1);
        CHECK(r.passed);
        CHECK(r.trials == 100);
        CHECK(r.max_deviation < 1e-12);
    }
    SUBCASE("K = 2 super-symbol model, n = 2") {
        const auto r = check_factorization(analytic::block_multiplicative_model(0.3, 2), InputDistribution::uniform(4),
                                           2, 100, 2);
        CHECK(r.passed);
    }
    SUBCASE("ternary random channel, n = 4") {
        std::mt19937_64 gen(5);
        const auto raw = oracle::random_channel(gen, 3, 3, 3);
        ChannelSpec spec{3, 3, 3, raw.t, raw.prior, raw.d};
        const auto r = check_factorization(validate_channel(spec), InputDistribution::uniform(3), 4, 50, 3);
        CHECK(r.passed);
    }
    SUBCASE("a posterior that skips renormalization fails") {
        const PosteriorFn corrupted = [](const ChannelModel& m, std::size_t x, std::size_t y) {
            std::vector<double> p(m.state_size());
            for (std::size_t s = 0; s < p.size(); ++s) p[s] = m.transition(x, s, y) * m.state_prior()[s];
            return p;
        };
        const auto r = check_factorization(analytic::scalar_multiplicative_model(0.4), InputDistribution({0.5, 0.5}), 3,
                                           100, 1, corrupted);
        CHECK_FALSE(r.passed);
        CHECK(r.max_deviation > 1e-3);
    }
    SUBCASE("limits") {
        const auto m = analytic::scalar_multiplicative_model(0.4);
        CHECK_THROWS_AS(check_factorization(m, InputDistribution::uniform(2), 5, 1, 1), InvalidArgument);
    }
}
