#include "fdia/attackspec.hpp"

#include <algorithm>

#include <json.hpp>

#include "fdia/error.hpp"

namespace fdia {

std::string to_string(AttackStrategy s) {
    switch (s) {
        case AttackStrategy::random_perturbation: return "random_perturbation";
        case AttackStrategy::universal_noise: return "universal_noise";
        case AttackStrategy::iterative_gaussian: return "iterative_gaussian";
        case AttackStrategy::iterative_gradient: return "iterative_gradient";
    }
    throw ConfigError("unknown attack strategy value");
}

AttackStrategy attack_strategy_from_string(const std::string& name) {
    if (name == "random_perturbation") return AttackStrategy::random_perturbation;
    if (name == "universal_noise") return AttackStrategy::universal_noise;
    if (name == "iterative_gaussian") return AttackStrategy::iterative_gaussian;
    if (name == "iterative_gradient") return AttackStrategy::iterative_gradient;
    throw ConfigError("unknown attack strategy '" + name + "'");
}

int effective_iterations(const AttackSpec& spec) {
    if (spec.iterations > 0) return spec.iterations;
    switch (spec.strategy) {
        case AttackStrategy::universal_noise: return kDefaultUniversalIterations;
        case AttackStrategy::iterative_gaussian: return kDefaultGaussianIterations;
        case AttackStrategy::iterative_gradient: return kDefaultGradientIterations;
        default: return 1;
    }
}

double effective_step(const AttackSpec& spec) {
    return spec.step > 0.0 ? spec.step : spec.epsilon / 10.0;
}

void validate_spec(const AttackSpec& spec, std::size_t meter_count) {
    if (spec.compromised.empty())
        throw ConfigError("attack spec: compromised meter set must not be empty");
    if (!std::is_sorted(spec.compromised.begin(), spec.compromised.end()))
        throw ConfigError("attack spec: compromised meter indices must be sorted");
    if (std::adjacent_find(spec.compromised.begin(), spec.compromised.end())
        != spec.compromised.end())
        throw ConfigError("attack spec: compromised meter indices must be unique");
    for (int idx : spec.compromised)
        if (idx < 0 || static_cast<std::size_t>(idx) >= meter_count)
            throw ConfigError("attack spec: compromised meter index " + std::to_string(idx)
                              + " out of range [0, " + std::to_string(meter_count) + ")");
    if (spec.epsilon < 0.0) throw ConfigError("attack spec: epsilon must be >= 0");
    if (spec.iterations < 0) throw ConfigError("attack spec: iterations must be >= 0");
    if (spec.step < 0.0) throw ConfigError("attack spec: step must be >= 0");
    if (spec.population < 0) throw ConfigError("attack spec: population must be >= 0");
}

std::string attack_spec_to_json(const AttackSpec& spec) {
    nlohmann::json j{{"strategy", to_string(spec.strategy)},
                     {"compromised", spec.compromised},
                     {"epsilon", spec.epsilon},
                     {"iterations", spec.iterations},
                     {"step", spec.step},
                     {"population", spec.population},
                     {"seed", spec.seed}};
    return j.dump();
}

AttackSpec attack_spec_from_json(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        AttackSpec spec;
        spec.strategy = attack_strategy_from_string(j.at("strategy").get<std::string>());
        spec.compromised = j.at("compromised").get<std::vector<int>>();
        spec.epsilon = j.at("epsilon").get<double>();
        spec.iterations = j.value("iterations", 0);
        spec.step = j.value("step", 0.0);
        spec.population = j.value("population", 32);
        spec.seed = j.value("seed", static_cast<std::uint64_t>(0));
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad attack spec JSON: ") + e.what());
    }
}

} // namespace fdia
