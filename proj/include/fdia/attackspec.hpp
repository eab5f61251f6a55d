#ifndef FDIA_ATTACKSPEC_HPP
#define FDIA_ATTACKSPEC_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace fdia {

enum class AttackStrategy {
    random_perturbation,
    universal_noise,
    iterative_gaussian,
    iterative_gradient,
};

// Budgets are expressed in per-meter standard deviations of the normal
// data. Three of those is roughly 15-40% of a typical branch reading,
// comfortably above the meter-noise floor yet small enough that the
// iterative attacks have room to hide inside it.
constexpr double kDefaultEpsilon = 3.0;

std::string to_string(AttackStrategy s);
AttackStrategy attack_strategy_from_string(const std::string& name);

// One concrete attack instance. The perturbation budget epsilon and the
// step size live in normalized feature units.
struct AttackSpec {
    AttackStrategy strategy = AttackStrategy::random_perturbation;
    std::vector<int> compromised;  // sorted unique meter indices, size k
    double epsilon = kDefaultEpsilon;
    int iterations = 0;            // 0 picks the strategy default
    double step = 0.0;             // 0 picks the strategy default (epsilon/10)
    int population = 32;           // iterative_gaussian candidates per round
    std::uint64_t seed = 0;

    int k() const { return static_cast<int>(compromised.size()); }
};

constexpr int kDefaultUniversalIterations = 100;
constexpr int kDefaultGaussianIterations = 50;
constexpr int kDefaultGradientIterations = 40;

// resolved defaults for the strategy at hand
int effective_iterations(const AttackSpec& spec);
double effective_step(const AttackSpec& spec);

// throws ConfigError; meter_count bounds the compromised indices
void validate_spec(const AttackSpec& spec, std::size_t meter_count);

std::string attack_spec_to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const std::string& text);

} // namespace fdia

#endif
