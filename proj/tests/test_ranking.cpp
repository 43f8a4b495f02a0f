#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ecopf/errors.hpp"
#include "ecopf/ranking.hpp"
#include "ecopf/rng.hpp"

using namespace ecopf;

TEST_CASE("rank_transform basic examples") {
    CHECK(rank_transform({3.2, 1.1, 2.5}) == std::vector<double>{0.75, 0.25, 0.50});
    CHECK(rank_transform({5.0}) == std::vector<double>{0.5});

    // stable ordinal tie-break: first occurrence gets the lower rank
    CHECK(rank_transform({1.0, 1.0, 2.0}) == std::vector<double>{0.25, 0.50, 0.75});
}

TEST_CASE("rank_transform rejects bad input") {
    CHECK_THROWS_WITH_AS(rank_transform({}), "empty sample", DataError);
    CHECK_THROWS_AS(rank_transform({1.0, std::numeric_limits<double>::quiet_NaN()}), DataError);
    CHECK_THROWS_AS(rank_transform({std::numeric_limits<double>::infinity()}), DataError);
}

TEST_CASE("rank_transform output is the exact rank set") {
    const CounterRng rng(99, 0);
    std::vector<double> values(37);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = rng.uniform_at(i) * 100.0 - 50.0;

    auto ranks = rank_transform(values);
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        CHECK(ranks[i] == static_cast<double>(i + 1) / static_cast<double>(values.size() + 1));
    }
}

TEST_CASE("rank_transform is permutation-equivariant for distinct values") {
    const std::vector<double> values = {4.0, -1.0, 7.5, 3.25, 0.5};
    const auto ranks = rank_transform(values);

    std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    std::vector<double> shuffled(values.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = values[perm[i]];
    const auto shuffled_ranks = rank_transform(shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(shuffled_ranks[i] == ranks[perm[i]]);
    }
}

TEST_CASE("pseudo_rank interpolation and clamping") {
    const RankColumn col = make_rank_column({10.0, 20.0, 30.0});

    SUBCASE("exact matches return the stored knot") {
        CHECK(pseudo_rank(10.0, col) == 0.25);
        CHECK(pseudo_rank(20.0, col) == 0.50);
        CHECK(pseudo_rank(30.0, col) == 0.75);
    }
    SUBCASE("outside the observed range clamps to the extreme knots") {
        CHECK(pseudo_rank(-5.0, col) == 0.25);
        CHECK(pseudo_rank(99.0, col) == 0.75);
    }
    SUBCASE("midway between knots interpolates linearly") {
        CHECK(pseudo_rank(15.0, col) == doctest::Approx(0.375));
    }
    SUBCASE("non-finite input is rejected") {
        CHECK_THROWS_AS(pseudo_rank(std::numeric_limits<double>::quiet_NaN(), col), DataError);
    }
}

TEST_CASE("inverse_rank knots, interpolation, degenerate column") {
    const RankColumn col = make_rank_column({10.0, 20.0, 30.0});
    CHECK(inverse_rank(0.25, col) == 10.0);
    CHECK(inverse_rank(0.50, col) == 20.0);
    CHECK(inverse_rank(0.375, col) == doctest::Approx(15.0));

    // flat extrapolation beyond the extreme knots
    CHECK(inverse_rank(0.01, col) == 10.0);
    CHECK(inverse_rank(0.99, col) == 30.0);

    const RankColumn constant = make_rank_column({7.0, 7.0, 7.0, 7.0});
    for (const double u : {0.01, 0.3, 0.5, 0.77, 0.99}) {
        CHECK(inverse_rank(u, constant) == 7.0);
    }

    CHECK_THROWS_AS(inverse_rank(0.0, col), DataError);
    CHECK_THROWS_AS(inverse_rank(1.0, col), DataError);
    CHECK_THROWS_AS(inverse_rank(-0.2, col), DataError);
}

TEST_CASE("round trip through rank space is exact for unique values") {
    const CounterRng rng(7, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform_at(1000 + trial) * 40);
        std::vector<double> values(m);
        for (std::size_t i = 0; i < m; ++i) {
            values[i] = rng.uniform_at(trial * 100 + i) * 2000.0 - 1000.0;
        }
        const RankColumn col = make_rank_column(values);
        for (const double v : values) {
            const bool unique = std::count(values.begin(), values.end(), v) == 1;
            if (unique) CHECK(inverse_rank(pseudo_rank(v, col), col) == v);
        }
    }
}

TEST_CASE("monotonicity of the transforms") {
    const CounterRng rng(13, 2);
    std::vector<double> values(25);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = rng.uniform_at(i) * 10.0;
    values[3] = values[10]; // include a tie
    const RankColumn col = make_rank_column(values);

    double prev_rank = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double v = -1.0 + 12.0 * k / 400.0;
        const double u = pseudo_rank(v, col);
        CHECK(u >= prev_rank);
        prev_rank = u;
    }

    double prev_value = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < 400; ++k) {
        const double u = static_cast<double>(k) / 400.0;
        const double v = inverse_rank(u, col);
        CHECK(v >= prev_value);
        prev_value = v;
    }
}
