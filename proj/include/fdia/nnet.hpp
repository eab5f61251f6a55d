#ifndef FDIA_NNET_HPP
#define FDIA_NNET_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdia/dataset.hpp"
#include "fdia/linalg.hpp"

namespace fdia {

// Recorded on models trained behind the padding defense so prediction can
// reject mismatched schemes.
struct PaddingDescriptor {
    int m = 0;
    int p = 0;
    int train_expansion = 1; // K
    double value_lo = 0.0;
    double value_hi = 0.0;
};

// Fully-connected binary classifier: relu hidden layers, two-logit softmax
// output. Forward/backward are written out by hand; the attacks need exact
// input gradients and the file format must stay dependency-free.
struct DetectorModel {
    std::vector<int> layer_dims;              // input, hidden..., 2
    std::vector<Matrix> weights;              // weights[l]: dims[l+1] x dims[l]
    std::vector<std::vector<double>> biases;  // biases[l]: dims[l+1]
    Normalization normalization;              // raw-measurement space, dim = m
    std::optional<PaddingDescriptor> padding;
    std::string train_digest;   // training hyperparameters + data provenance
    std::string config_digest;  // experiment config that produced the model

    int input_dim() const { return layer_dims.front(); }
    std::size_t layer_count() const { return weights.size(); }
};

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-4; // L2 on weights, biases excluded
    std::uint64_t seed = 0;
};

struct EpochRecord {
    double train_loss;    // mean cross-entropy seen during the epoch
    double val_loss;      // after the epoch's updates
    double val_accuracy;
};
using LossCurve = std::vector<EpochRecord>;

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

constexpr std::array<int, 2> kDefaultHiddenDims{128, 64};

DetectorModel init_model(int input_dim, std::span<const int> hidden_dims, std::uint64_t seed);

// class probabilities (p0, p1); optionally captures the last hidden layer's
// post-activation values for embedding exports
std::array<double, 2> forward(const DetectorModel& model, std::span<const double> features,
                              std::vector<double>* last_hidden = nullptr);

int classify(const DetectorModel& model, std::span<const double> features); // ties -> 0

double cross_entropy_loss(const DetectorModel& model, std::span<const double> features,
                          int target_label);

// d loss(target) / d input, analytic
std::vector<double> input_gradient(const DetectorModel& model, std::span<const double> features,
                                   int target_label);

// logit(1) - logit(0); positive means the detector leans toward "false".
// The margin keeps a usable slope where softmax probabilities saturate,
// which is what the gradient attacks differentiate.
double logit_margin(const DetectorModel& model, std::span<const double> features);
std::vector<double> margin_input_gradient(const DetectorModel& model,
                                          std::span<const double> features);

struct Gradients {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;
};
// per-sample loss and parameter gradients; exposed so tests can check the
// analytic derivatives against finite differences
double backprop(const DetectorModel& model, std::span<const double> features, int target_label,
                Gradients& accum);

// Mini-batch SGD with momentum; mutates model, keeps the parameters from
// the best-validation-accuracy epoch. Deterministic for a fixed seed.
LossCurve train(DetectorModel& model, const Dataset& train_set, const Dataset& val_set,
                const TrainConfig& cfg);

Metrics evaluate(const DetectorModel& model, const Dataset& d);

void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

} // namespace fdia

#endif
