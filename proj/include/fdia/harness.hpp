#ifndef FDIA_HARNESS_HPP
#define FDIA_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "fdia/attacks.hpp"
#include "fdia/casefile.hpp"
#include "fdia/dataset.hpp"
#include "fdia/defense.hpp"
#include "fdia/nnet.hpp"

namespace fdia {

inline constexpr const char* kToolVersion = "0.1.0";

// One attack sweep: every k in k_values crossed with every epsilon.
struct AttackGrid {
    AttackStrategy strategy = AttackStrategy::random_perturbation;
    std::vector<int> k_values;
    std::vector<double> epsilons{kDefaultEpsilon};
    int iterations = 0; // 0 = strategy default
    double step = 0.0;
    int population = 32;
};

struct DefenseConfig {
    std::vector<int> p_values;
    int train_expansion = kDefaultTrainExpansion;
    int infer_votes = kDefaultInferVotes;
};

struct ExperimentConfig {
    std::string case_name;
    std::string case_file; // optional path overriding the builtin case
    double sigma = kDefaultSigma;
    std::uint64_t seed = 0;
    std::string out_dir = "runs";

    // dataset
    std::size_t count = 40000;
    double false_ratio = 0.5;
    double load_scale_lo = kDefaultLoadScaleLo;
    double load_scale_hi = kDefaultLoadScaleHi;
    SplitFractions split_fractions;
    std::vector<TrainAttack> attack_mix; // empty = default three-strategy mix

    // detector
    std::vector<int> hidden_dims{kDefaultHiddenDims.begin(), kDefaultHiddenDims.end()};
    TrainConfig train_cfg;

    std::vector<AttackGrid> attacks; // empty = all four strategies on the default k grid
    DefenseConfig defense;

    std::string base_dir() const { return out_dir + "/" + case_name; }
};

// JSON round-trip; unknown keys are rejected with their path.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg); // canonical, resolved defaults
std::string config_digest(const ExperimentConfig& cfg);

CaseSystem resolve_case(const ExperimentConfig& cfg);

// gen: dataset/{train,val,test}.csv + manifest.json + config.json
void cmd_gen(const ExperimentConfig& cfg);

// train: models/model_p<P>.json + curves/loss_p<P>.csv; padding absent means
// the sweep {0} + defense.p_values
void cmd_train(const ExperimentConfig& cfg, std::optional<int> padding = std::nullopt);

// attack: eval/attack_eval.csv (+ .meta.json), one row per
// (strategy, k, epsilon, defense setting)
void cmd_attack(const ExperimentConfig& cfg);

// embed: 2-D principal-component projection of the last hidden layer
void embed_to_csv(const DetectorModel& model, const Dataset& data, const std::string& out_path);
void cmd_embed(const ExperimentConfig& cfg);

// report: consolidated report.json + summary.csv; fails loudly on missing
// grid cells or mixed config digests
void cmd_report(const ExperimentConfig& cfg);

} // namespace fdia

#endif
