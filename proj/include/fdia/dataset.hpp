#ifndef FDIA_DATASET_HPP
#define FDIA_DATASET_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdia/attackspec.hpp"
#include "fdia/dcmodel.hpp"

namespace fdia {

struct Normalization {
    std::vector<double> mean;
    std::vector<double> stddev; // floored at 1e-8

    std::size_t dim() const { return mean.size(); }
};

struct LabeledSample {
    std::vector<double> features;
    int label = 0; // 0 normal, 1 false
};

// Row-major labeled feature table. feature_dim is m for raw measurement
// datasets and m + p once padded.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t feature_dim, std::size_t meter_count)
        : feature_dim_(feature_dim), meter_count_(meter_count) {}

    std::size_t size() const { return labels_.size(); }
    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t meter_count() const { return meter_count_; }

    std::span<double> row(std::size_t i) {
        return {features_.data() + i * feature_dim_, feature_dim_};
    }
    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * feature_dim_, feature_dim_};
    }
    int label(std::size_t i) const { return labels_[i]; }
    LabeledSample sample(std::size_t i) const {
        const auto r = row(i);
        return {{r.begin(), r.end()}, labels_[i]};
    }

    void append(std::span<const double> features, int label);
    void reserve(std::size_t rows);

    std::size_t count_label(int label) const;

    const std::optional<Normalization>& normalization() const { return normalization_; }
    void set_normalization(Normalization n) { normalization_ = std::move(n); }

    const std::string& provenance() const { return provenance_; }
    void set_provenance(std::string p) { provenance_ = std::move(p); }

private:
    std::size_t feature_dim_ = 0;
    std::size_t meter_count_ = 0;
    std::vector<double> features_;
    std::vector<int> labels_;
    std::optional<Normalization> normalization_;
    std::string provenance_;
};

// One entry of the training-data attack mix. Supports are redrawn per
// sample from k_choices, so the detector never keys on fixed positions.
struct TrainAttack {
    AttackStrategy strategy = AttackStrategy::random_perturbation;
    double epsilon = kDefaultEpsilon;
    std::vector<int> k_choices;
    double weight = 1.0;
};

struct GenerationConfig {
    std::size_t count = 40000;
    double false_ratio = 0.5;
    std::vector<TrainAttack> attack_mix;
    double load_scale_lo = kDefaultLoadScaleLo;
    double load_scale_hi = kDefaultLoadScaleHi;
    std::uint64_t seed = 0;
};

// equal-weight mix over the three model-free strategies
std::vector<TrainAttack> default_attack_mix(const std::string& case_name, double epsilon = kDefaultEpsilon);

Dataset generate_dataset(const MeasurementModel& model, const GenerationConfig& cfg);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct DatasetSplits {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Stratified by label; disjoint; union equals the parent.
DatasetSplits split(const Dataset& d, const SplitFractions& fractions, std::uint64_t seed);

// Standardizes d in place and returns the fitted table. Fit on the training
// split only; apply the returned table to every other split.
Normalization fit_normalization(Dataset& d);
void apply_normalization(Dataset& d, const Normalization& n);

// CSV: header meter_0,...,meter_{d-1},label; shortest round-trip decimals.
void write_dataset_csv(const Dataset& d, const std::string& path);
Dataset read_dataset_csv(const std::string& path, std::size_t meter_count = 0);

} // namespace fdia

#endif
