#include "fdia/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace fdia {

namespace {

// series expansion, converges quickly for x < a + 1
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for the upper tail, for x >= a + 1
double gamma_q_continued_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_cdf(double x, std::size_t dof) {
    if (dof == 0) throw std::invalid_argument("chi_square_cdf: dof must be >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

double chi_square_quantile(double probability, std::size_t dof) {
    if (!(probability > 0.0 && probability < 1.0))
        throw std::invalid_argument("chi_square_quantile: probability must be in (0,1)");
    if (dof == 0) throw std::invalid_argument("chi_square_quantile: dof must be >= 1");

    // bracket then bisect; the CDF is monotone and cheap
    double lo = 0.0;
    double hi = static_cast<double>(dof) + 10.0 * std::sqrt(2.0 * static_cast<double>(dof)) + 10.0;
    while (chi_square_cdf(hi, dof) < probability) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(mid, dof) < probability)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

double chi_square_statistic(std::span<const std::size_t> observed,
                            std::span<const double> expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square_statistic: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0))
            throw std::invalid_argument("chi_square_statistic: expected counts must be positive");
        const double diff = static_cast<double>(observed[i]) - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

SampleStats sample_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sample_stats: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(var)};
}

} // namespace fdia
