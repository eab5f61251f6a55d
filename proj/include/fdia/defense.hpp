#ifndef FDIA_DEFENSE_HPP
#define FDIA_DEFENSE_HPP

#include <array>
#include <cstdint>
#include <utility>

#include "fdia/dataset.hpp"
#include "fdia/nnet.hpp"
#include "fdia/rng.hpp"

namespace fdia {

constexpr int kDefaultTrainExpansion = 4; // K
constexpr int kDefaultInferVotes = 9;     // R

// Randomized input-reconstruction defense: every length-m measurement
// vector is stretched to length m+p by inserting p pad slots at random
// positions. Perturbations crafted against one padding layout lose their
// alignment under any other, so a fresh draw per prediction blunts
// transferred adversarial noise.
struct PaddingScheme {
    int m = 0;
    int p = 0;
    double value_lo = 0.0; // pad values drawn uniformly from [value_lo, value_hi]
    double value_hi = 0.0;
    int train_expansion = kDefaultTrainExpansion; // combinations per training sample
    int infer_votes = kDefaultInferVotes;         // paddings averaged per prediction

    int padded_dim() const { return m + p; }
};

// One concrete layout: sorted pad positions within [0, m+p) plus the values
// occupying them.
struct PaddingCombination {
    std::vector<int> positions;
    std::vector<double> values;
};

// value range = empirical [min, max] over the normalized training features
PaddingScheme make_scheme(int p, const Dataset& normalized_train,
                          int train_expansion = kDefaultTrainExpansion,
                          int infer_votes = kDefaultInferVotes);

// positions uniform over all C(m+p, p) subsets
PaddingCombination sample_combination(const PaddingScheme& scheme, Rng& rng);

// original features keep their order in the non-pad slots
std::vector<double> pad(std::span<const double> z, const PaddingCombination& combo, int m);
std::vector<double> unpad(std::span<const double> padded, const PaddingCombination& combo);

// padded index of each measurement slot, in measurement order
std::vector<int> measurement_slots(const PaddingCombination& combo, int m);

// every sample appears train_expansion times, each under a fresh combination
Dataset expand_training(const Dataset& d, const PaddingScheme& scheme, std::uint64_t seed);

struct DefendedPrediction {
    int label = 0;
    std::array<double, 2> probabilities{0.0, 0.0}; // mean over the votes
};

// R fresh combinations, probabilities averaged; combinations are drawn from
// the caller's rng and never exposed
DefendedPrediction defended_predict(const DetectorModel& model, const PaddingScheme& scheme,
                                    std::span<const double> z, Rng& rng);

// expands both splits, trains a detector of input width m+p
std::pair<DetectorModel, LossCurve> train_defended(const Dataset& raw_train,
                                                   const Dataset& raw_val,
                                                   const PaddingScheme& scheme,
                                                   std::span<const int> hidden_dims,
                                                   const TrainConfig& cfg);

// classifies a length-m dataset through defended_predict with per-sample rngs
Metrics evaluate_defended(const DetectorModel& model, const PaddingScheme& scheme,
                          const Dataset& d, std::uint64_t seed);

// log10 of C(m+p, p), the attacker's combination-guessing space
double guess_space_log10(const PaddingScheme& scheme);

} // namespace fdia

#endif
