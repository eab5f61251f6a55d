#ifndef FDIA_STATS_HPP
#define FDIA_STATS_HPP

#include <cstddef>
#include <span>

namespace fdia {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// CDF of the chi-square distribution with dof degrees of freedom.
double chi_square_cdf(double x, std::size_t dof);

// Inverse CDF; probability in (0, 1), dof >= 1.
double chi_square_quantile(double probability, std::size_t dof);

// Pearson statistic for observed counts against expected counts.
double chi_square_statistic(std::span<const std::size_t> observed,
                            std::span<const double> expected);

struct SampleStats {
    double mean;
    double stddev; // population form (divide by n)
};
SampleStats sample_stats(std::span<const double> values);

} // namespace fdia

#endif
