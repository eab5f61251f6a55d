#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fdia/stats.hpp"

using namespace fdia;

TEST_CASE("chi-square cdf with two degrees of freedom is exponential") {
    // closed form: F(x; 2) = 1 - exp(-x/2)
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        const double expected = 1.0 - std::exp(-x / 2.0);
        CHECK(chi_square_cdf(x, 2) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("chi-square cdf with four degrees of freedom matches the closed form") {
    // F(x; 4) = 1 - exp(-x/2) (1 + x/2)
    for (double x : {0.5, 1.0, 3.0, 7.0, 15.0}) {
        const double expected = 1.0 - std::exp(-x / 2.0) * (1.0 + x / 2.0);
        CHECK(chi_square_cdf(x, 4) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("chi-square quantiles match standard table values") {
    struct Row {
        double probability;
        std::size_t dof;
        double value;
    };
    const Row table[] = {
        {0.95, 1, 3.8415},  {0.99, 1, 6.6349},   {0.95, 2, 5.9915},
        {0.95, 7, 14.0671}, {0.95, 10, 18.3070}, {0.95, 12, 21.0261},
        {0.99, 10, 23.2093}, {0.95, 100, 124.3421},
    };
    for (const auto& row : table)
        CHECK(chi_square_quantile(row.probability, row.dof)
              == doctest::Approx(row.value).epsilon(1e-3));
}

TEST_CASE("quantile inverts the cdf") {
    for (std::size_t dof : {1u, 3u, 7u, 12u, 69u, 112u}) {
        for (double p : {0.01, 0.25, 0.5, 0.9, 0.95, 0.99, 0.999}) {
            const double q = chi_square_quantile(p, dof);
            CHECK(chi_square_cdf(q, dof) == doctest::Approx(p).epsilon(1e-8));
        }
    }
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(chi_square_quantile(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_quantile(1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_quantile(0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_cdf(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_p(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("pearson statistic on a hand-computed table") {
    const std::vector<std::size_t> observed{12, 8, 10};
    const std::vector<double> expected{10.0, 10.0, 10.0};
    // (4 + 4 + 0) / 10
    CHECK(chi_square_statistic(observed, expected) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("sample stats on a tiny sequence") {
    const std::vector<double> values{1.0, 2.0, 3.0, 4.0};
    const auto s = sample_stats(values);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)));
}
