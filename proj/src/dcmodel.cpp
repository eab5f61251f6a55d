#include "fdia/dcmodel.hpp"

#include <cmath>
#include <map>

#include "fdia/error.hpp"
#include "fdia/rng.hpp"

namespace fdia {

MeasurementModel::MeasurementModel(CaseSystem system, double sigma)
    : case_(std::move(system)), sigma_(sigma) {
    if (sigma < 0.0) throw ConfigError("measurement sigma must be >= 0");
    const auto findings = validate(case_);
    if (!findings.empty()) {
        std::string msg = "cannot build measurement model";
        for (const auto& f : findings) msg += "; " + f;
        throw SemanticError(msg);
    }

    const std::size_t n = case_.buses.size();
    const std::size_t m = case_.branches.size();

    state_col_.assign(n, -1);
    int col = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (case_.buses[i].id == case_.slack_bus) continue;
        state_col_[i] = col++;
    }
    const std::size_t state_dim = static_cast<std::size_t>(col);

    h_ = Matrix(m, state_dim);
    meter_ids_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& br = case_.branches[k];
        const double susceptance = 1.0 / br.x;
        const int cf = state_col_[case_.bus_index(br.from)];
        const int ct = state_col_[case_.bus_index(br.to)];
        if (cf >= 0) h_(k, static_cast<std::size_t>(cf)) = susceptance;
        if (ct >= 0) h_(k, static_cast<std::size_t>(ct)) = -susceptance;
        meter_ids_[k] = br.meter_id;
    }

    // reduced susceptance matrix B' over non-slack buses
    Matrix bprime(state_dim, state_dim);
    for (const auto& br : case_.branches) {
        const double b = 1.0 / br.x;
        const int cf = state_col_[case_.bus_index(br.from)];
        const int ct = state_col_[case_.bus_index(br.to)];
        if (cf >= 0) bprime(cf, cf) += b;
        if (ct >= 0) bprime(ct, ct) += b;
        if (cf >= 0 && ct >= 0) {
            bprime(cf, ct) -= b;
            bprime(ct, cf) -= b;
        }
    }
    try {
        bprime_ = std::make_unique<CholeskyFactor>(bprime);
    } catch (const SemanticError&) {
        throw SemanticError("case '" + case_.name
                            + "': reduced susceptance matrix is singular (disconnected network)");
    }
}

std::vector<double> MeasurementModel::solve_angles(std::span<const double> injections_pu) const {
    return bprime_->solve(injections_pu);
}

std::vector<double> MeasurementModel::flows(std::span<const double> theta) const {
    if (theta.size() != state_dim()) throw DimensionError("flows: state dimension mismatch");
    // two nonzeros per row, computed from the branch list directly
    std::vector<double> f(meter_count(), 0.0);
    for (std::size_t k = 0; k < case_.branches.size(); ++k) {
        const auto& br = case_.branches[k];
        const int cf = state_col_[case_.bus_index(br.from)];
        const int ct = state_col_[case_.bus_index(br.to)];
        const double tf = cf >= 0 ? theta[static_cast<std::size_t>(cf)] : 0.0;
        const double tt = ct >= 0 ? theta[static_cast<std::size_t>(ct)] : 0.0;
        f[k] = (tf - tt) / br.x;
    }
    return f;
}

MeasurementModel build_h(const CaseSystem& system, double sigma) {
    return MeasurementModel(system, sigma);
}

StateVector dc_powerflow(const CaseSystem& system, std::span<const double> injections_mw) {
    if (injections_mw.size() != system.buses.size())
        throw DimensionError("dc_powerflow: one injection per bus required");
    MeasurementModel model(system, 0.0);
    std::vector<double> p(model.state_dim(), 0.0);
    for (std::size_t i = 0; i < system.buses.size(); ++i) {
        const int col = model.state_column_of_bus()[i];
        if (col >= 0) p[static_cast<std::size_t>(col)] = injections_mw[i] / system.base_mva;
    }
    return StateVector{model.solve_angles(p)};
}

std::vector<StateVector> sample_states(const MeasurementModel& model, std::size_t count,
                                       double load_scale_lo, double load_scale_hi,
                                       std::uint64_t seed) {
    if (count < 1) throw ConfigError("sample_states: count must be >= 1");
    if (!(load_scale_lo > 0.0) || load_scale_lo > load_scale_hi)
        throw ConfigError("sample_states: need 0 < lo <= hi");

    const auto& buses = model.system().buses;
    const double base = model.system().base_mva;
    std::vector<StateVector> states;
    states.reserve(count);
    std::vector<double> p(model.state_dim());
    for (std::size_t s = 0; s < count; ++s) {
        Rng rng(derive_seed(seed, /*stream=*/1, s));
        for (std::size_t i = 0; i < buses.size(); ++i) {
            const int col = model.state_column_of_bus()[i];
            if (col < 0) continue; // slack balances the residual by construction
            const double scale = rng.uniform(load_scale_lo, load_scale_hi);
            p[static_cast<std::size_t>(col)] = -buses[i].pd * scale / base;
        }
        states.push_back(StateVector{model.solve_angles(p)});
    }
    return states;
}

Measurement measure(const MeasurementModel& model, const StateVector& x, std::uint64_t seed) {
    if (x.theta.size() != model.state_dim())
        throw DimensionError("measure: state dimension mismatch");
    Measurement meas;
    meas.noise_sigma = model.sigma();
    meas.z = model.flows(x.theta);
    if (model.sigma() > 0.0) {
        Rng rng(derive_seed(seed, /*stream=*/2));
        for (double& v : meas.z) v += rng.normal(0.0, model.sigma());
    }
    return meas;
}

} // namespace fdia
