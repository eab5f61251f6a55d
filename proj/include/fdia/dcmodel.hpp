#ifndef FDIA_DCMODEL_HPP
#define FDIA_DCMODEL_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fdia/casefile.hpp"
#include "fdia/linalg.hpp"

namespace fdia {

// Non-slack bus voltage angles in radians; the slack angle is fixed at 0
// and excluded.
struct StateVector {
    std::vector<double> theta;
};

// Per-unit branch active-power flows, one entry per meter.
struct Measurement {
    std::vector<double> z;
    double noise_sigma = 0.0;
};

// The DC branch-flow measurement map z = H x + e for one case, plus the
// cached factorizations needed to sample operating points efficiently.
class MeasurementModel {
public:
    MeasurementModel(CaseSystem system, double sigma);

    const CaseSystem& system() const { return case_; }
    const std::string& case_name() const { return case_.name; }
    const Matrix& h() const { return h_; }
    std::size_t meter_count() const { return h_.rows(); }       // m
    std::size_t state_dim() const { return h_.cols(); }         // n - 1
    int slack_bus() const { return case_.slack_bus; }
    double sigma() const { return sigma_; }
    const std::vector<int>& meter_ids() const { return meter_ids_; }

    // bus index (order of case_.buses) -> H column, slack excluded
    const std::vector<int>& state_column_of_bus() const { return state_col_; }

    // solves B' theta = p for per-unit non-slack injections p
    std::vector<double> solve_angles(std::span<const double> injections_pu) const;

    std::vector<double> flows(std::span<const double> theta) const; // H * theta

private:
    CaseSystem case_;
    Matrix h_;
    std::vector<int> meter_ids_;
    std::vector<int> state_col_;
    double sigma_;
    std::unique_ptr<CholeskyFactor> bprime_;
};

// Meter-noise default. 0.1% of a per-unit flow keeps the noise floor well
// below the per-meter variation the detectors key on; it is a single knob
// for experiments that want heavier noise.
constexpr double kDefaultSigma = 0.001;
constexpr double kDefaultLoadScaleLo = 0.8;
constexpr double kDefaultLoadScaleHi = 1.2;

MeasurementModel build_h(const CaseSystem& system, double sigma = kDefaultSigma);

// Solves the DC power flow for the given per-bus injections (MW, ordered
// like system.buses). The slack entry is overridden so injections balance.
StateVector dc_powerflow(const CaseSystem& system, std::span<const double> injections_mw);

// Operating points: every bus load scaled by an independent uniform draw
// from [lo, hi], slack balancing the net injection.
std::vector<StateVector> sample_states(const MeasurementModel& model, std::size_t count,
                                       double load_scale_lo, double load_scale_hi,
                                       std::uint64_t seed);

// z = H x + e with e ~ N(0, sigma^2) i.i.d. per meter.
Measurement measure(const MeasurementModel& model, const StateVector& x, std::uint64_t seed);

} // namespace fdia

#endif
