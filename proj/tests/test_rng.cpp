#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fdia/rng.hpp"
#include "fdia/stats.hpp"

using namespace fdia;

TEST_CASE("same seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform01 stays in [0,1) and is roughly uniform") {
    Rng rng(3);
    std::vector<double> draws(20000);
    for (double& d : draws) {
        d = rng.uniform01();
        REQUIRE(d >= 0.0);
        REQUIRE(d < 1.0);
    }
    const auto stats = sample_stats(draws);
    CHECK(stats.mean == doctest::Approx(0.5).epsilon(0.02));
    CHECK(stats.stddev == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(0.02));
}

TEST_CASE("normal draws match the target moments") {
    Rng rng(4);
    std::vector<double> draws(50000);
    for (double& d : draws) d = rng.normal(2.0, 3.0);
    const auto stats = sample_stats(draws);
    CHECK(stats.mean == doctest::Approx(2.0).epsilon(0.02));
    CHECK(stats.stddev == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("uniform_index is unbiased over a small range") {
    Rng rng(5);
    std::vector<std::size_t> counts(7, 0);
    const std::size_t draws = 70000;
    for (std::size_t i = 0; i < draws; ++i) ++counts[rng.uniform_index(7)];
    const std::vector<double> expected(7, static_cast<double>(draws) / 7.0);
    const double stat = chi_square_statistic(counts, expected);
    CHECK(stat < chi_square_quantile(0.999, 6));
}

TEST_CASE("sample_index_subset returns sorted unique sets of the right size") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto subset = sample_index_subset(10, 4, rng);
        REQUIRE(subset.size() == 4);
        for (std::size_t i = 1; i < subset.size(); ++i) REQUIRE(subset[i - 1] < subset[i]);
        for (int v : subset) REQUIRE((v >= 0 && v < 10));
    }
    CHECK_THROWS(sample_index_subset(3, 4, rng));
}

TEST_CASE("sample_index_subset covers all C(4,2) subsets") {
    Rng rng(7);
    std::set<std::vector<int>> seen;
    for (int i = 0; i < 500; ++i) {
        const auto s = sample_index_subset(4, 2, rng);
        seen.insert(std::set<std::vector<int>>::value_type(s.begin(), s.end()));
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("derive_seed separates streams and indices") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t stream = 0; stream < 10; ++stream)
        for (std::uint64_t index = 0; index < 100; ++index)
            seeds.insert(derive_seed(123, stream, index));
    CHECK(seeds.size() == 1000);
}
