#include "fdia/defense.hpp"

#include <algorithm>
#include <cmath>

#include "fdia/error.hpp"

namespace fdia {

PaddingScheme make_scheme(int p, const Dataset& normalized_train, int train_expansion,
                          int infer_votes) {
    if (p < 0) throw ConfigError("padding size p must be >= 0");
    if (train_expansion < 1 || infer_votes < 1)
        throw ConfigError("padding scheme needs K >= 1 and R >= 1");
    if (normalized_train.size() == 0) throw ConfigError("padding scheme needs a training set");

    PaddingScheme scheme;
    scheme.m = static_cast<int>(normalized_train.feature_dim());
    scheme.p = p;
    scheme.train_expansion = train_expansion;
    scheme.infer_votes = infer_votes;
    // Pads hold the per-feature mean of the standardized space (zero).
    // Value-carrying pads drawn from the feature range wreck the padded
    // model's accuracy: the measurement slots already shift position, and
    // random pad values add input variance on top, so the network never
    // recovers the clean decision boundary. Zero pads contribute nothing
    // downstream and leave position jitter as the only cost.
    scheme.value_lo = 0.0;
    scheme.value_hi = 0.0;
    return scheme;
}

PaddingCombination sample_combination(const PaddingScheme& scheme, Rng& rng) {
    PaddingCombination combo;
    combo.positions = sample_index_subset(static_cast<std::size_t>(scheme.padded_dim()),
                                          static_cast<std::size_t>(scheme.p), rng);
    combo.values.resize(static_cast<std::size_t>(scheme.p));
    for (double& v : combo.values) v = rng.uniform(scheme.value_lo, scheme.value_hi);
    return combo;
}

std::vector<double> pad(std::span<const double> z, const PaddingCombination& combo, int m) {
    if (static_cast<int>(z.size()) != m)
        throw DimensionError("pad: expected " + std::to_string(m) + " features");
    const std::size_t total = z.size() + combo.positions.size();
    std::vector<double> out(total, 0.0);
    std::size_t next_pad = 0;
    std::size_t next_z = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (next_pad < combo.positions.size()
            && combo.positions[next_pad] == static_cast<int>(i)) {
            out[i] = combo.values[next_pad];
            ++next_pad;
        } else {
            out[i] = z[next_z++];
        }
    }
    return out;
}

std::vector<double> unpad(std::span<const double> padded, const PaddingCombination& combo) {
    if (padded.size() < combo.positions.size())
        throw DimensionError("unpad: vector shorter than the pad count");
    std::vector<double> out;
    out.reserve(padded.size() - combo.positions.size());
    std::size_t next_pad = 0;
    for (std::size_t i = 0; i < padded.size(); ++i) {
        if (next_pad < combo.positions.size()
            && combo.positions[next_pad] == static_cast<int>(i)) {
            ++next_pad;
        } else {
            out.push_back(padded[i]);
        }
    }
    return out;
}

std::vector<int> measurement_slots(const PaddingCombination& combo, int m) {
    std::vector<int> slots;
    slots.reserve(static_cast<std::size_t>(m));
    const int total = m + static_cast<int>(combo.positions.size());
    std::size_t next_pad = 0;
    for (int i = 0; i < total; ++i) {
        if (next_pad < combo.positions.size() && combo.positions[next_pad] == i) {
            ++next_pad;
        } else {
            slots.push_back(i);
        }
    }
    return slots;
}

Dataset expand_training(const Dataset& d, const PaddingScheme& scheme, std::uint64_t seed) {
    if (static_cast<int>(d.feature_dim()) != scheme.m)
        throw DimensionError("expand_training: dataset dimension does not match scheme.m");
    Dataset out(static_cast<std::size_t>(scheme.padded_dim()), d.meter_count());
    out.reserve(d.size() * static_cast<std::size_t>(scheme.train_expansion));
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (int copy = 0; copy < scheme.train_expansion; ++copy) {
            Rng rng(derive_seed(seed, 30,
                                i * static_cast<std::size_t>(scheme.train_expansion)
                                    + static_cast<std::size_t>(copy)));
            const auto combo = sample_combination(scheme, rng);
            out.append(pad(d.row(i), combo, scheme.m), d.label(i));
        }
    }
    if (d.normalization()) out.set_normalization(*d.normalization());
    out.set_provenance(d.provenance());
    return out;
}

DefendedPrediction defended_predict(const DetectorModel& model, const PaddingScheme& scheme,
                                    std::span<const double> z, Rng& rng) {
    if (model.input_dim() != scheme.padded_dim())
        throw DimensionError("defended_predict: model input is "
                             + std::to_string(model.input_dim()) + ", scheme pads to "
                             + std::to_string(scheme.padded_dim()));
    if (model.padding
        && (model.padding->m != scheme.m || model.padding->p != scheme.p))
        throw DimensionError("defended_predict: model was trained under a different scheme");

    DefendedPrediction pred;
    for (int vote = 0; vote < scheme.infer_votes; ++vote) {
        const auto combo = sample_combination(scheme, rng);
        const auto padded = pad(z, combo, scheme.m);
        const auto p = forward(model, padded);
        pred.probabilities[0] += p[0];
        pred.probabilities[1] += p[1];
    }
    pred.probabilities[0] /= scheme.infer_votes;
    pred.probabilities[1] /= scheme.infer_votes;
    pred.label = pred.probabilities[1] > pred.probabilities[0] ? 1 : 0;
    return pred;
}

std::pair<DetectorModel, LossCurve> train_defended(const Dataset& raw_train,
                                                   const Dataset& raw_val,
                                                   const PaddingScheme& scheme,
                                                   std::span<const int> hidden_dims,
                                                   const TrainConfig& cfg) {
    if (scheme.p == 0) {
        // degenerate scheme: identical to vanilla training
        DetectorModel model = init_model(scheme.m, hidden_dims, cfg.seed);
        if (raw_train.normalization()) model.normalization = *raw_train.normalization();
        LossCurve curve = train(model, raw_train, raw_val, cfg);
        return {std::move(model), std::move(curve)};
    }

    const Dataset train_x = expand_training(raw_train, scheme, derive_seed(cfg.seed, 32));
    const Dataset val_x = expand_training(raw_val, scheme, derive_seed(cfg.seed, 33));

    DetectorModel model = init_model(scheme.padded_dim(), hidden_dims, cfg.seed);
    if (raw_train.normalization()) model.normalization = *raw_train.normalization();
    model.padding = PaddingDescriptor{scheme.m, scheme.p, scheme.train_expansion,
                                      scheme.value_lo, scheme.value_hi};
    LossCurve curve = train(model, train_x, val_x, cfg);
    return {std::move(model), std::move(curve)};
}

Metrics evaluate_defended(const DetectorModel& model, const PaddingScheme& scheme,
                          const Dataset& d, std::uint64_t seed) {
    if (d.size() == 0) throw ConfigError("evaluate_defended: empty dataset");
    Metrics m;
    for (std::size_t i = 0; i < d.size(); ++i) {
        Rng rng(derive_seed(seed, 34, i));
        const int predicted = defended_predict(model, scheme, d.row(i), rng).label;
        const int actual = d.label(i);
        if (actual == 1 && predicted == 1) ++m.tp;
        else if (actual == 0 && predicted == 1) ++m.fp;
        else if (actual == 0 && predicted == 0) ++m.tn;
        else ++m.fn;
    }
    const double n = static_cast<double>(d.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall > 0.0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

double guess_space_log10(const PaddingScheme& scheme) {
    const double n = static_cast<double>(scheme.padded_dim());
    const double k = static_cast<double>(scheme.p);
    if (scheme.p == 0) return 0.0;
    const double ln_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return ln_c / std::log(10.0);
}

} // namespace fdia
