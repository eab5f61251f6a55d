#ifndef FDIA_ATTACKS_HPP
#define FDIA_ATTACKS_HPP

#include <optional>
#include <utility>

#include "fdia/attackspec.hpp"
#include "fdia/dataset.hpp"
#include "fdia/defense.hpp"
#include "fdia/nnet.hpp"

namespace fdia {

// What the attacker probes: a detector over length-m measurement vectors,
// optionally seen through one fixed (leaked) padding combination. Counts
// forward/gradient queries.
class MeterSurface {
public:
    explicit MeterSurface(const DetectorModel& model);
    MeterSurface(const DetectorModel& model, PaddingCombination leaked);

    std::size_t dim() const { return dim_; }
    std::array<double, 2> probabilities(std::span<const double> z);
    int classify(std::span<const double> z); // ties toward 0

    // logit(1) - logit(0): the attacks rank and differentiate this rather
    // than the probabilities, which saturate on confidently-flagged samples
    double margin(std::span<const double> z);
    std::vector<double> margin_gradient(std::span<const double> z);

    std::vector<double> loss_gradient(std::span<const double> z, int target_label);
    std::size_t queries() const { return queries_; }

private:
    const DetectorModel& model_;
    std::optional<PaddingCombination> leaked_;
    std::vector<int> slots_; // measurement slot -> padded index
    std::size_t dim_;
    std::size_t queries_ = 0;
};

struct AttackResult {
    Dataset adversarial;       // label 1, same feature_dim as the sources
    double success_rate = 0.0; // fraction the target surface classifies as 0
    double mean_l2 = 0.0;      // mean perturbation norm
    std::size_t queries = 0;
};

// Crafting never reads a model; pass a surface only to score success_rate.
AttackResult random_perturbation(const Dataset& sources, const AttackSpec& spec,
                                 MeterSurface* surface = nullptr);

// One shared delta maximizing the mean label-1 loss over the sources.
std::pair<std::vector<double>, AttackResult> universal_noise(MeterSurface& surface,
                                                             const Dataset& sources,
                                                             const AttackSpec& spec);

// Query-only evolutionary search: Gaussian candidates around the current
// center, re-centering whenever the detector's label-1 probability drops.
AttackResult iterative_gaussian(MeterSurface& surface, const Dataset& sources,
                                const AttackSpec& spec);

// Projected multi-step signed-gradient ascent on the label-1 loss.
AttackResult iterative_gradient(MeterSurface& surface, const Dataset& sources,
                                const AttackSpec& spec);

AttackResult run_attack(MeterSurface& surface, const Dataset& sources, const AttackSpec& spec);

// The pipeline that finally classifies measurements: plain argmax, or
// randomized-padding voting when a scheme is present.
struct EvalPipeline {
    const DetectorModel* model = nullptr;
    std::optional<PaddingScheme> scheme;
    std::uint64_t seed = 0;
};

int pipeline_classify(const EvalPipeline& pipeline, std::span<const double> z,
                      std::uint64_t sample_index);

struct AttackOutcome {
    AttackResult result;
    double detection_recall = 0.0;  // crafted samples the pipeline flags as 1
    double attacked_accuracy = 0.0; // over clean normals + crafted samples
};

// Crafts adversarial samples from `sources` against `target`, then scores
// them through `pipeline`. `normals`, when given, joins the accuracy
// denominator with label 0; otherwise attacked_accuracy == detection_recall.
AttackOutcome evaluate_under_attack(MeterSurface& target, const EvalPipeline& pipeline,
                                    const Dataset& sources, const Dataset* normals,
                                    const AttackSpec& spec);

} // namespace fdia

#endif
