#include "fdia/estimator.hpp"

#include <cmath>

#include "fdia/error.hpp"
#include "fdia/stats.hpp"

namespace fdia {

WlsEstimator::WlsEstimator(const MeasurementModel& model)
    : model_(model), qr_(model.h()) {
    if (!qr_.full_column_rank())
        throw SemanticError("case '" + model.case_name()
                            + "': H is rank deficient, state not observable");
    dof_ = model.meter_count() - model.state_dim();
}

EstimationResult WlsEstimator::estimate(std::span<const double> z) const {
    if (z.size() != model_.meter_count())
        throw DimensionError("estimate: expected " + std::to_string(model_.meter_count())
                             + " measurements, got " + std::to_string(z.size()));
    EstimationResult result;
    result.x_hat.theta = qr_.solve_least_squares(z);
    result.residual = model_.flows(result.x_hat.theta);
    for (std::size_t i = 0; i < z.size(); ++i) result.residual[i] = z[i] - result.residual[i];
    result.residual_norm2 = norm2_squared(result.residual);
    return result;
}

BddResult WlsEstimator::bdd_detect(std::span<const double> z, double confidence) const {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ConfigError("bdd_detect: confidence must be in (0,1)");
    const EstimationResult est = estimate(z);
    const double sigma = model_.sigma();
    if (sigma == 0.0) {
        if (est.residual_norm2 > 0.0)
            throw SemanticError("bdd_detect: sigma = 0 with nonzero residual, test is ill-posed");
        return {BddDecision::clean, 0.0, 0.0};
    }
    const double statistic = est.residual_norm2 / (sigma * sigma);
    const double threshold = chi_square_quantile(confidence, dof_);
    return {statistic > threshold ? BddDecision::bad_data : BddDecision::clean, statistic,
            threshold};
}

EstimationResult wls_estimate(const MeasurementModel& model, std::span<const double> z) {
    return WlsEstimator(model).estimate(z);
}

BddResult bdd_detect(const MeasurementModel& model, std::span<const double> z,
                     double confidence) {
    return WlsEstimator(model).bdd_detect(z, confidence);
}

StealthVector stealth_vector(const MeasurementModel& model, std::span<const double> c) {
    if (c.size() != model.state_dim())
        throw DimensionError("stealth_vector: expected state offset of length "
                             + std::to_string(model.state_dim()));
    StealthVector sv;
    sv.c.assign(c.begin(), c.end());
    sv.a = model.flows(sv.c);
    return sv;
}

} // namespace fdia
