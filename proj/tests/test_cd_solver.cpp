#include <doctest.h>

#include <cmath>
#include <random>

#include "capdist/analytic.hpp"
#include "capdist/cd_solver.hpp"
#include "capdist/errors.hpp"
#include "oracles.hpp"

using namespace capdist;

namespace {

// Pinned from a 50-digit evaluation of the two-branch closed form.
constexpr double kC01 = 0.106105551797951;  // r = 0.4, D = 0.1
constexpr double kCuc = 0.170504678878601;  // r = 0.4, unconstrained
constexpr double kPuc = 0.391902139485509;  // r = 0.4, unconstrained P(x=1)
constexpr double kDmax = 0.243239144205796;

ChannelModel uniform_cost_model(double d0) {
    // Binary symmetric channel whose state is never revealed; every letter costs d0.
    ChannelSpec spec;
    spec.inputs = spec.outputs = 2;
    spec.states = 2;
    spec.transition = {{{0.9, 0.1}, {0.9, 0.1}}, {{0.1, 0.9}, {0.1, 0.9}}};
    spec.state_prior = {1 - d0, d0};
    spec.distortion = {{0, 1}, {1, 0}};
    return validate_channel(spec);
}

}  // namespace

TEST_CASE("feasible_range") {
    SUBCASE("scalar multiplicative") {
        const auto r = feasible_range(analytic::scalar_multiplicative_model(0.4));
        CHECK(r.d_min == 0.0);
        CHECK(r.d_max == doctest::Approx(kDmax).epsilon(1e-8));
        CHECK(r.unconstrained_capacity == doctest::Approx(kCuc).epsilon(1e-12));
    }
    SUBCASE("additive mod-2") {
        const auto r = feasible_range(analytic::additive_mod2_model(0.3));
        CHECK(r.d_min == 0.0);
        CHECK(r.d_max == 0.0);
    }
    SUBCASE("uniform cost") {
        const auto r = feasible_range(uniform_cost_model(0.2));
        CHECK(r.d_min == doctest::Approx(0.2));
        CHECK(r.d_max == doctest::Approx(0.2));
    }
}

TEST_CASE("lagrangian_ba_step") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    const std::vector<double> cost{0.4, 0.0};
    SUBCASE("the unconstrained optimizer is a fixed point") {
        const InputDistribution p({1 - kPuc, kPuc});
        const auto next = lagrangian_ba_step(m, p, 0.0, cost);
        CHECK(next[1] == doctest::Approx(kPuc).epsilon(1e-9));
    }
    SUBCASE("a large multiplier pushes mass onto the zero-cost letter") {
        auto p = InputDistribution::uniform(2);
        for (int i = 0; i < 5; ++i) p = lagrangian_ba_step(m, p, 200.0, cost);
        CHECK(p[1] > 0.999);
    }
    SUBCASE("lambda = 0 is the classical step") {
        const auto p = InputDistribution::uniform(2);
        const auto classical = ba::step(ba::MixtureObjective(m.channel_matrix()), p.probs(), std::vector<double>(2, 0.0));
        const auto next = lagrangian_ba_step(m, p, 0.0, cost);
        CHECK(next[0] == doctest::Approx(classical[0]).epsilon(1e-15));
    }
}

TEST_CASE("capacity_distortion_point on the scalar channel") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    SUBCASE("D = 0.1, constraint active") {
        const auto p = capacity_distortion_point(m, 0.1);
        CHECK(p.capacity == doctest::Approx(kC01).epsilon(1e-8));
        CHECK(p.optimizer[1] == doctest::Approx(0.75).epsilon(1e-6));
        CHECK(p.constraint_active);
        CHECK(p.multiplier > 0.0);
        CHECK(average_cost(p.optimizer, optimal_estimator(m)) <= 0.1 + 1e-8);
    }
    SUBCASE("D = 0.3, constraint inactive") {
        const auto p = capacity_distortion_point(m, 0.3);
        CHECK(p.capacity == doctest::Approx(kCuc).epsilon(1e-10));
        CHECK_FALSE(p.constraint_active);
    }
    SUBCASE("D = 0 forces the zero-cost letter") {
        const auto p = capacity_distortion_point(m, 0.0);
        CHECK(p.capacity == doctest::Approx(0.0));
        CHECK(p.optimizer[1] == doctest::Approx(1.0));
    }
    SUBCASE("D below d_min") {
        CHECK_THROWS_AS(capacity_distortion_point(m, -0.01), InfeasibleDistortion);
        try {
            capacity_distortion_point(m, -0.01);
        } catch (const InfeasibleDistortion& e) {
            CHECK(e.d_min() == 0.0);
        }
    }
    SUBCASE("deterministic") {
        const auto a = capacity_distortion_point(m, 0.17);
        const auto b = capacity_distortion_point(m, 0.17);
        CHECK(a.capacity == b.capacity);
        CHECK(a.optimizer == b.optimizer);
        CHECK(a.multiplier == b.multiplier);
    }
}

TEST_CASE("cd_curve") {
    SUBCASE("scalar curves rise then flatten") {
        for (double r : {0.1, 0.3, 0.5}) {
            std::vector<double> grid;
            for (int i = 0; i < 50; ++i) grid.push_back(r * i / 49.0);
            const auto c = cd_curve(analytic::scalar_multiplicative_model(r), grid);
            REQUIRE(c.points.size() == 50);
            CHECK(c.points.front().capacity == doctest::Approx(0.0));
            for (std::size_t i = 1; i < c.points.size(); ++i)
                CHECK(c.points[i].capacity >= c.points[i - 1].capacity - 1e-12);
            for (const auto& p : c.points)
                if (p.distortion_budget >= c.d_max)
                    CHECK(p.capacity == doctest::Approx(c.points.back().capacity).epsilon(1e-8));
            CHECK(c.points.back().capacity == doctest::Approx(feasible_range(analytic::scalar_multiplicative_model(r))
                                                                  .unconstrained_capacity));
        }
    }
    SUBCASE("additive mod-2 is flat at the binary symmetric channel capacity") {
        const std::vector<double> grid{0.0, 0.1, 0.5, 2.0};
        const auto c = cd_curve(analytic::additive_mod2_model(0.3), grid);
        for (const auto& p : c.points)
            CHECK(p.capacity == doctest::Approx(std::log(2.0) - oracle::h2(0.3)).epsilon(1e-10));
    }
    SUBCASE("single point at d_max") {
        const auto m = analytic::scalar_multiplicative_model(0.4);
        const auto c = cd_curve(m, std::size_t{1});
        REQUIRE(c.points.size() == 1);
        CHECK(c.points[0].distortion_budget == doctest::Approx(c.d_max));
        CHECK(c.points[0].capacity == doctest::Approx(kCuc).epsilon(1e-9));
    }
    SUBCASE("grid below d_min is rejected") {
        const std::vector<double> grid{0.1, 0.3};
        CHECK_THROWS_AS(cd_curve(uniform_cost_model(0.2), grid), InfeasibleDistortion);
    }
}

TEST_CASE("multi_constraint_point") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    const std::vector<double> est{0.4, 0.0}, energy{0.0, 1.0};
    SUBCASE("a single estimation constraint reduces to capacity_distortion_point") {
        for (double d : {0.05, 0.1, 0.2, 0.3}) {
            const auto a = multi_constraint_point(m, {{est, d}});
            CHECK(a.capacity == doctest::Approx(capacity_distortion_point(m, d).capacity).epsilon(1e-7));
        }
    }
    SUBCASE("energy constraint binds") {
        const auto p = multi_constraint_point(m, {{est, 0.3}, {energy, 0.3}});
        const double grid = oracle::binary_grid_max([](double q) { return oracle::scalar_mi(0.4, q); },
                                                    [](double q) { return (1 - q) * 0.4 <= 0.3 && q <= 0.3; }, 1e-5);
        CHECK(p.capacity == doctest::Approx(grid).epsilon(1e-5));
        CHECK(p.optimizer[1] <= 0.3 + 1e-8);
    }
    SUBCASE("estimation constraint binds") {
        const auto p = multi_constraint_point(m, {{est, 0.2}, {energy, 0.6}});
        const double grid = oracle::binary_grid_max([](double q) { return oracle::scalar_mi(0.4, q); },
                                                    [](double q) { return (1 - q) * 0.4 <= 0.2 && q <= 0.6; }, 1e-5);
        CHECK(p.capacity == doctest::Approx(grid).epsilon(1e-5));
        CHECK(average_cost(p.optimizer.probs(), est) <= 0.2 + 1e-8);
    }
    SUBCASE("incompatible budgets") {
        // Estimation cost <= 0.1 needs P(x=1) >= 0.75, energy <= 0.5 allows at most 0.5.
        CHECK_THROWS_AS(multi_constraint_point(m, {{est, 0.1}, {energy, 0.5}}), InfeasibleConstraints);
    }
    SUBCASE("a budget below every letter's cost") {
        CHECK_THROWS_AS(multi_constraint_point(m, {{est, 0.1}, {{0.5, 0.7}, 0.2}}), InfeasibleConstraints);
    }
    SUBCASE("empty set") { CHECK_THROWS_AS(multi_constraint_point(m, {}), InvalidArgument); }
}

TEST_CASE("grid_search_capacity") {
    const auto m = analytic::scalar_multiplicative_model(0.4);
    CHECK(std::abs(grid_search_capacity(m, 0.1) - kC01) <= 1e-4);
    CHECK(std::abs(grid_search_capacity(m, 1.0) - kCuc) <= 1e-4);
    CHECK_THROWS_AS(grid_search_capacity(analytic::block_multiplicative_model(0.3, 2), 0.1), AlphabetTooLarge);
}

TEST_CASE("property: solver agrees with the grid oracle on random binary-input channels") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto raw = oracle::random_channel(gen, 2, 2 + trial % 2, 2 + (trial / 2) % 2);
        ChannelSpec spec{2, raw.t[0][0].size(), raw.prior.size(), raw.t, raw.prior, raw.d};
        const auto m = validate_channel(spec);
        const auto costs = raw.letter_costs();
        const double lo = std::min(costs[0], costs[1]), hi = std::max(costs[0], costs[1]);
        const double d = lo + u(gen) * (hi - lo);
        const auto w = raw.marginal();
        const double grid = oracle::binary_grid_max(
            [&](double p) { return oracle::mutual_information(w, {1 - p, p}); },
            [&](double p) { return (1 - p) * costs[0] + p * costs[1] <= d + 1e-15; }, 1e-5);
        const auto point = capacity_distortion_point(m, d);
        CHECK(std::abs(point.capacity - grid) <= 5e-4);
        CHECK(point.capacity >= grid - 1e-7);  // the solver is never worse than a grid point
        CHECK(average_cost(point.optimizer.probs(), costs) <= d + 1e-8);
    }
}

TEST_CASE("property: ternary-input channels against the simplex grid") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto raw = oracle::random_channel(gen, 3, 3, 2);
        ChannelSpec spec{3, 3, 2, raw.t, raw.prior, raw.d};
        const auto m = validate_channel(spec);
        const auto costs = raw.letter_costs();
        const double d = 0.5 * (*std::min_element(costs.begin(), costs.end()) +
                                *std::max_element(costs.begin(), costs.end()));
        const auto point = capacity_distortion_point(m, d);
        const double grid = grid_search_capacity(m, d);
        CHECK(point.capacity >= grid - 1e-7);
        CHECK(point.capacity - grid <= 5e-3);
    }
}

TEST_CASE("property: C(D) is concave") {
    const auto m = analytic::scalar_multiplicative_model(0.3);
    std::vector<double> grid;
    for (int i = 0; i <= 30; ++i) grid.push_back(0.3 * i / 30.0);
    const auto c = cd_curve(m, grid);
    for (std::size_t i = 1; i + 1 < c.points.size(); ++i)
        CHECK(c.points[i].capacity >= 0.5 * (c.points[i - 1].capacity + c.points[i + 1].capacity) - 1e-9);
}
