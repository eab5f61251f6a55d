#ifndef FDIA_ESTIMATOR_HPP
#define FDIA_ESTIMATOR_HPP

#include <span>
#include <vector>

#include "fdia/dcmodel.hpp"
#include "fdia/linalg.hpp"

namespace fdia {

struct EstimationResult {
    StateVector x_hat;
    std::vector<double> residual; // z - H * x_hat
    double residual_norm2 = 0.0;  // sum of squared residuals
};

enum class BddDecision { clean, bad_data };

struct BddResult {
    BddDecision decision;
    double statistic;  // residual_norm2 / sigma^2
    double threshold;  // chi-square quantile actually used
};

// a = H c; adding a to any measurement leaves the WLS residual unchanged
struct StealthVector {
    std::vector<double> c;
    std::vector<double> a;
};

constexpr double kDefaultBddConfidence = 0.95;

// Weighted-least-squares state estimation with unit weights, solved through
// a Householder QR of H. Factor once, estimate many.
class WlsEstimator {
public:
    explicit WlsEstimator(const MeasurementModel& model);

    EstimationResult estimate(std::span<const double> z) const;

    // chi-square test on the residual norm at the given confidence,
    // m - (n-1) degrees of freedom
    BddResult bdd_detect(std::span<const double> z, double confidence = kDefaultBddConfidence) const;

    const MeasurementModel& model() const { return model_; }

private:
    const MeasurementModel& model_;
    QrFactor qr_;
    std::size_t dof_;
};

EstimationResult wls_estimate(const MeasurementModel& model, std::span<const double> z);

BddResult bdd_detect(const MeasurementModel& model, std::span<const double> z,
                     double confidence = kDefaultBddConfidence);

StealthVector stealth_vector(const MeasurementModel& model, std::span<const double> c);

} // namespace fdia

#endif
