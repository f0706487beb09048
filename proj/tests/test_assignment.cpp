#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spit/assignment.hpp"
#include "spit/errors.hpp"

using namespace spit;

TEST_CASE("distance matrix examples") {
    const std::vector<Vec3> a{{1, 0, 0}, {0, 0, 0}};
    const std::vector<Vec3> b{{0, 0, 0}, {1, 0, 0}};
    const DistanceMatrix d = distance_matrix(a, b);
    CHECK(d(0, 0) == 1.0);
    CHECK(d(0, 1) == 0.0);
    CHECK(d(1, 0) == 0.0);
    CHECK(d(1, 1) == 1.0);

    const DistanceMatrix self = distance_matrix(a, a);
    CHECK(self(0, 0) == 0.0);
    CHECK(self(1, 1) == 0.0);

    const std::vector<Vec3> three(3);
    CHECK_THROWS_AS(distance_matrix(a, three), ShapeError);
}

TEST_CASE("distance matrix matches per-pair recomputation") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Vec3> g(3), e(3);
        for (auto &v : g) v = oracle::random_vec(rng);
        for (auto &v : e) v = oracle::random_vec(rng);
        const DistanceMatrix d = distance_matrix(g, e);
        const DistanceMatrix sq = distance_matrix(g, e, DistanceKind::squared);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double dx = g[i].x - e[j].x, dy = g[i].y - e[j].y, dz = g[i].z - e[j].z;
                const double want = std::sqrt(dx * dx + dy * dy + dz * dz);
                CHECK(d(i, j) == doctest::Approx(want).epsilon(1e-14));
                CHECK(sq(i, j) == doctest::Approx(want * want).epsilon(1e-13));
            }
    }
}

TEST_CASE("hungarian examples") {
    CHECK(hungarian(DistanceMatrix(2, {0, 1, 1, 0})) == Permutation{0, 1});
    CHECK(hungarian(DistanceMatrix(2, {1, 0, 0, 1})) == Permutation{1, 0});
    CHECK(hungarian(DistanceMatrix(0)).empty());
    CHECK(hungarian(DistanceMatrix(1, {5})) == Permutation{0});
}

TEST_CASE("hungarian equals exhaustive minimum for M <= 6") {
    std::mt19937_64 rng(17);
    for (std::size_t m = 1; m <= 6; ++m) {
        for (int rep = 0; rep < 200; ++rep) {
            const DistanceMatrix d = oracle::random_matrix(m, rng);
            const Permutation p = hungarian(d);
            REQUIRE(is_permutation(p));
            const auto [best, best_perm] = oracle::brute_force_assignment(d);
            CHECK(assignment_cost(d, p) == best);
            CHECK(p == best_perm);
        }
    }
}

TEST_CASE("hungarian breaks ties toward the lexicographically smallest mapping") {
    CHECK(hungarian(DistanceMatrix(3, 0.0)) == Permutation{0, 1, 2});
    CHECK(hungarian(DistanceMatrix(3, 7.0)) == Permutation{0, 1, 2});
    // Two zero rows (padding) and one real row: ties among the padded rows.
    CHECK(hungarian(DistanceMatrix(3, {1, 1, 0, 1, 1, 0, 0, 2, 2})) == Permutation{1, 2, 0});

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> small(0, 3);
    for (std::size_t m = 2; m <= 6; ++m) {
        for (int rep = 0; rep < 200; ++rep) {
            DistanceMatrix d(m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) d(i, j) = small(rng);
            const auto [best, best_perm] = oracle::brute_force_assignment(d);
            const Permutation p = hungarian(d);
            CHECK(assignment_cost(d, p) == best);
            CHECK(p == best_perm);
        }
    }
}

TEST_CASE("row and column shifts keep the assignment optimal") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> shift(0.0, 5.0);
    std::uniform_int_distribution<int> pick(0, 4);
    for (int rep = 0; rep < 300; ++rep) {
        DistanceMatrix d = oracle::random_matrix(5, rng);
        const Permutation before = hungarian(d);
        const bool row = rep % 2 == 0;
        const int k = pick(rng);
        const double c = shift(rng);
        for (int i = 0; i < 5; ++i) (row ? d(k, i) : d(i, k)) += c;
        const auto [best, best_perm] = oracle::brute_force_assignment(d);
        CHECK(assignment_cost(d, before) == doctest::Approx(best).epsilon(1e-12));
        CHECK(assignment_cost(d, hungarian(d)) == best);
    }
}

TEST_CASE("hungarian handles larger matrices") {
    std::mt19937_64 rng(31);
    for (std::size_t m : {10, 25, 60}) {
        const DistanceMatrix d = oracle::random_matrix(m, rng, 10.0);
        const Permutation p = hungarian(d);
        CHECK(is_permutation(p));
        // No 2-swap can improve an optimal assignment.
        const double cost = assignment_cost(d, p);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                Permutation q = p;
                std::swap(q[i], q[j]);
                CHECK(assignment_cost(d, q) >= cost - 1e-12);
            }
    }
}

TEST_CASE("permutation helpers") {
    CHECK(is_permutation(std::vector<int>{2, 0, 1}));
    CHECK_FALSE(is_permutation(std::vector<int>{0, 0, 1}));
    CHECK_FALSE(is_permutation(std::vector<int>{0, 3, 1}));
    CHECK(inverse({2, 0, 1}) == Permutation{1, 2, 0});
}

namespace {
DistanceMatrixSequence scalars(std::initializer_list<double> xs) {
    DistanceMatrixSequence seq;
    for (double x : xs) seq.emplace_back(1, std::vector<double>{x});
    return seq;
}
}  // namespace

TEST_CASE("moving average examples") {
    const auto causal = moving_average(scalars({4, 0, 2}), 2, WindowMode::causal);
    CHECK(causal[0](0, 0) == 4.0);
    CHECK(causal[1](0, 0) == 2.0);
    CHECK(causal[2](0, 0) == 1.0);

    const auto seq = scalars({1.5, -2, 7, 3});
    CHECK(moving_average(seq, 1, WindowMode::causal) == seq);
    CHECK(moving_average(seq, 1, WindowMode::centered) == seq);

    // centered, window 3: [(1.5-2)/2, (1.5-2+7)/3, (-2+7+3)/3, (7+3)/2]
    const auto centered = moving_average(seq, 3, WindowMode::centered);
    CHECK(centered[0](0, 0) == doctest::Approx(-0.25));
    CHECK(centered[1](0, 0) == doctest::Approx(6.5 / 3.0));
    CHECK(centered[2](0, 0) == doctest::Approx(8.0 / 3.0));
    CHECK(centered[3](0, 0) == doctest::Approx(5.0));

    const auto constant = moving_average(scalars({0.1, 0.1, 0.1, 0.1, 0.1}), 3, WindowMode::causal);
    for (const auto &d : constant) CHECK(d(0, 0) == doctest::Approx(0.1).epsilon(1e-15));

    CHECK_THROWS_AS(moving_average(seq, 0, WindowMode::causal), ParameterError);
}

TEST_CASE("moving average is linear") {
    std::mt19937_64 rng(37);
    DistanceMatrixSequence a, b, sum;
    for (int t = 0; t < 12; ++t) {
        a.push_back(oracle::random_matrix(3, rng));
        b.push_back(oracle::random_matrix(3, rng));
        DistanceMatrix s(3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s(i, j) = 2.0 * a[t](i, j) + 3.0 * b[t](i, j);
        sum.push_back(s);
    }
    for (auto mode : {WindowMode::causal, WindowMode::centered}) {
        const auto ma = moving_average(a, 4, mode);
        const auto mb = moving_average(b, 4, mode);
        const auto ms = moving_average(sum, 4, mode);
        for (int t = 0; t < 12; ++t)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    CHECK(ms[t](i, j) ==
                          doctest::Approx(2.0 * ma[t](i, j) + 3.0 * mb[t](i, j)).epsilon(1e-12));
    }
}

TEST_CASE("window bounds") {
    CHECK(window_bounds(0, 10, 3, WindowMode::causal) == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(window_bounds(5, 10, 3, WindowMode::causal) == std::pair<std::size_t, std::size_t>{3, 5});
    CHECK(window_bounds(5, 10, 3, WindowMode::centered) == std::pair<std::size_t, std::size_t>{4, 6});
    CHECK(window_bounds(5, 10, 4, WindowMode::centered) == std::pair<std::size_t, std::size_t>{3, 6});
    CHECK(window_bounds(9, 10, 5, WindowMode::centered) == std::pair<std::size_t, std::size_t>{7, 9});
}
