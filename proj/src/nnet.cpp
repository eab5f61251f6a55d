#include "fdia/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdia/csv.hpp"
#include "fdia/digest.hpp"
#include "fdia/error.hpp"
#include "fdia/rng.hpp"

namespace fdia {

namespace {

void check_input(const DetectorModel& model, std::span<const double> features) {
    if (static_cast<int>(features.size()) != model.input_dim())
        throw DimensionError("detector expects " + std::to_string(model.input_dim())
                             + " features, got " + std::to_string(features.size()));
}

// forward pass keeping every post-activation layer; acts[0] is the input
void forward_layers(const DetectorModel& model, std::span<const double> features,
                    std::vector<std::vector<double>>& acts) {
    const std::size_t layers = model.layer_count();
    acts.resize(layers + 1);
    acts[0].assign(features.begin(), features.end());
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& w = model.weights[l];
        const auto& b = model.biases[l];
        auto& out = acts[l + 1];
        out.assign(w.rows(), 0.0);
        const auto& in = acts[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const auto row = w.row(r);
            double acc = b[r];
            for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * in[c];
            out[r] = (l + 1 < layers && acc < 0.0) ? 0.0 : acc; // relu on hidden
        }
    }
}

std::array<double, 2> softmax2(const std::vector<double>& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

double loss_from_logits(const std::vector<double>& logits, int target) {
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    return lse - logits[target];
}

} // namespace

DetectorModel init_model(int input_dim, std::span<const int> hidden_dims, std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("init_model: input_dim must be >= 1");
    for (int h : hidden_dims)
        if (h < 1) throw ConfigError("init_model: hidden dims must be >= 1");

    DetectorModel model;
    model.layer_dims.push_back(input_dim);
    for (int h : hidden_dims) model.layer_dims.push_back(h);
    model.layer_dims.push_back(2);

    Rng rng(derive_seed(seed, 10));
    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(model.layer_dims[l]);
        const auto fan_out = static_cast<std::size_t>(model.layer_dims[l + 1]);
        Matrix w(fan_out, fan_in);
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : w.data()) v = rng.normal(0.0, scale);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

std::array<double, 2> forward(const DetectorModel& model, std::span<const double> features,
                              std::vector<double>* last_hidden) {
    check_input(model, features);
    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);
    if (last_hidden) *last_hidden = acts[acts.size() - 2];
    return softmax2(acts.back());
}

int classify(const DetectorModel& model, std::span<const double> features) {
    const auto p = forward(model, features);
    return p[1] > p[0] ? 1 : 0;
}

double cross_entropy_loss(const DetectorModel& model, std::span<const double> features,
                          int target_label) {
    check_input(model, features);
    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);
    return loss_from_logits(acts.back(), target_label);
}

namespace {

// shared logit-level backward pass down to the input
std::vector<double> backward_to_input(const DetectorModel& model,
                                      const std::vector<std::vector<double>>& acts,
                                      std::vector<double> delta) {
    for (std::size_t l = model.layer_count(); l-- > 0;) {
        const Matrix& w = model.weights[l];
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double dr = delta[r];
            if (dr == 0.0) continue;
            const auto row = w.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) prev[c] += dr * row[c];
        }
        if (l > 0) {
            const auto& act = acts[l];
            for (std::size_t c = 0; c < prev.size(); ++c)
                if (act[c] <= 0.0) prev[c] = 0.0;
        }
        delta = std::move(prev);
    }
    return delta;
}

} // namespace

std::vector<double> input_gradient(const DetectorModel& model, std::span<const double> features,
                                   int target_label) {
    check_input(model, features);
    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);

    // softmax + cross-entropy: d loss / d logits = p - onehot(target)
    const auto p = softmax2(acts.back());
    std::vector<double> delta{p[0], p[1]};
    delta[target_label] -= 1.0;
    return backward_to_input(model, acts, std::move(delta));
}

double logit_margin(const DetectorModel& model, std::span<const double> features) {
    check_input(model, features);
    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);
    return acts.back()[1] - acts.back()[0];
}

std::vector<double> margin_input_gradient(const DetectorModel& model,
                                          std::span<const double> features) {
    check_input(model, features);
    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);
    return backward_to_input(model, acts, {-1.0, 1.0});
}

double backprop(const DetectorModel& model, std::span<const double> features, int target_label,
                Gradients& accum) {
    check_input(model, features);
    if (accum.w.empty()) {
        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            accum.w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
            accum.b.emplace_back(model.biases[l].size(), 0.0);
        }
    }

    std::vector<std::vector<double>> acts;
    forward_layers(model, features, acts);
    const double loss = loss_from_logits(acts.back(), target_label);

    const auto p = softmax2(acts.back());
    std::vector<double> delta{p[0], p[1]};
    delta[target_label] -= 1.0;

    for (std::size_t l = model.layer_count(); l-- > 0;) {
        const Matrix& w = model.weights[l];
        const auto& in = acts[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double dr = delta[r];
            if (dr == 0.0) continue;
            accum.b[l][r] += dr;
            auto grow = accum.w[l].row(r);
            for (std::size_t c = 0; c < grow.size(); ++c) grow[c] += dr * in[c];
        }
        if (l == 0) break;
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double dr = delta[r];
            if (dr == 0.0) continue;
            const auto row = w.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) prev[c] += dr * row[c];
        }
        const auto& act = acts[l];
        for (std::size_t c = 0; c < prev.size(); ++c)
            if (act[c] <= 0.0) prev[c] = 0.0;
        delta = std::move(prev);
    }
    return loss;
}

namespace {

double mean_loss(const DetectorModel& model, const Dataset& d) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        total += cross_entropy_loss(model, d.row(i), d.label(i));
    return total / static_cast<double>(d.size());
}

} // namespace

LossCurve train(DetectorModel& model, const Dataset& train_set, const Dataset& val_set,
                const TrainConfig& cfg) {
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        throw ConfigError("train: epochs and batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ConfigError("train: momentum must be in [0,1)");
    if (train_set.size() == 0 || val_set.size() == 0)
        throw ConfigError("train: empty train or validation split");
    if (static_cast<std::size_t>(cfg.batch_size) > train_set.size())
        throw ConfigError("train: batch_size exceeds training set size");
    if (static_cast<int>(train_set.feature_dim()) != model.input_dim())
        throw DimensionError("train: dataset dimension does not match model input");

    Gradients velocity;
    Gradients grads;
    // shape both accumulators once
    backprop(model, train_set.row(0), train_set.label(0), velocity);
    for (auto& wmat : velocity.w) std::fill(wmat.data().begin(), wmat.data().end(), 0.0);
    for (auto& bvec : velocity.b) std::fill(bvec.begin(), bvec.end(), 0.0);

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    LossCurve curve;
    curve.reserve(static_cast<std::size_t>(cfg.epochs));
    DetectorModel best = model;
    double best_val_accuracy = -1.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, 11, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        std::size_t done = 0;
        while (done < order.size()) {
            const std::size_t batch_n =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      order.size() - done);
            grads.w = velocity.w; // reuse shapes
            grads.b = velocity.b;
            for (auto& wmat : grads.w) std::fill(wmat.data().begin(), wmat.data().end(), 0.0);
            for (auto& bvec : grads.b) std::fill(bvec.begin(), bvec.end(), 0.0);

            for (std::size_t j = 0; j < batch_n; ++j) {
                const std::size_t idx = order[done + j];
                epoch_loss += backprop(model, train_set.row(idx), train_set.label(idx), grads);
            }
            done += batch_n;

            const double inv = 1.0 / static_cast<double>(batch_n);
            for (std::size_t l = 0; l < model.layer_count(); ++l) {
                auto& w = model.weights[l].data();
                auto& v = velocity.w[l].data();
                const auto& g = grads.w[l].data();
                for (std::size_t t = 0; t < w.size(); ++t) {
                    v[t] = cfg.momentum * v[t]
                           - cfg.learning_rate * (g[t] * inv + cfg.weight_decay * w[t]);
                    w[t] += v[t];
                }
                auto& b = model.biases[l];
                auto& vb = velocity.b[l];
                const auto& gb = grads.b[l];
                for (std::size_t t = 0; t < b.size(); ++t) {
                    vb[t] = cfg.momentum * vb[t] - cfg.learning_rate * gb[t] * inv;
                    b[t] += vb[t];
                }
            }
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss))
            throw SemanticError("training diverged at epoch " + std::to_string(epoch)
                                + " (non-finite loss)");

        const double val_loss = mean_loss(model, val_set);
        const Metrics val_metrics = evaluate(model, val_set);
        curve.push_back({epoch_loss, val_loss, val_metrics.accuracy});
        if (val_metrics.accuracy > best_val_accuracy) {
            best_val_accuracy = val_metrics.accuracy;
            best.weights = model.weights;
            best.biases = model.biases;
        }
    }

    model.weights = best.weights;
    model.biases = best.biases;

    std::ostringstream cfgstr;
    cfgstr << "epochs=" << cfg.epochs << ";batch=" << cfg.batch_size << ";lr="
           << format_double(cfg.learning_rate) << ";momentum=" << format_double(cfg.momentum)
           << ";wd=" << format_double(cfg.weight_decay) << ";seed=" << cfg.seed
           << ";data=" << train_set.provenance();
    model.train_digest = digest_hex(cfgstr.str());
    return curve;
}

Metrics evaluate(const DetectorModel& model, const Dataset& d) {
    if (d.size() == 0) throw ConfigError("evaluate: empty dataset");
    Metrics m;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const int predicted = classify(model, d.row(i));
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

void save_model(const DetectorModel& model, const std::string& path) {
    nlohmann::json j;
    j["layer_dims"] = model.layer_dims;
    j["activation"] = "relu";
    j["weights"] = nlohmann::json::array();
    for (const auto& w : model.weights) j["weights"].push_back(w.data());
    j["biases"] = model.biases;
    j["normalization"] = {{"mean", model.normalization.mean},
                          {"stddev", model.normalization.stddev}};
    j["train_config_digest"] = model.train_digest;
    if (!model.config_digest.empty()) j["config_digest"] = model.config_digest;
    if (model.padding) {
        j["padding"] = {{"m", model.padding->m},
                        {"p", model.padding->p},
                        {"train_expansion", model.padding->train_expansion},
                        {"value_lo", model.padding->value_lo},
                        {"value_hi", model.padding->value_hi}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(1) << '\n';
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

DetectorModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        DetectorModel model;
        model.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        if (j.at("activation").get<std::string>() != "relu")
            throw ConfigError("model '" + path + "': unsupported activation");
        if (model.layer_dims.size() < 2 || model.layer_dims.back() != 2)
            throw ConfigError("model '" + path + "': bad layer_dims");
        const auto& jw = j.at("weights");
        const auto& jb = j.at("biases");
        for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
            const auto rows = static_cast<std::size_t>(model.layer_dims[l + 1]);
            const auto cols = static_cast<std::size_t>(model.layer_dims[l]);
            Matrix w(rows, cols);
            w.data() = jw.at(l).get<std::vector<double>>();
            if (w.data().size() != rows * cols)
                throw ConfigError("model '" + path + "': weight shape mismatch at layer "
                                  + std::to_string(l));
            model.weights.push_back(std::move(w));
            auto b = jb.at(l).get<std::vector<double>>();
            if (b.size() != rows)
                throw ConfigError("model '" + path + "': bias shape mismatch at layer "
                                  + std::to_string(l));
            model.biases.push_back(std::move(b));
        }
        model.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
        model.normalization.stddev =
            j.at("normalization").at("stddev").get<std::vector<double>>();
        model.train_digest = j.value("train_config_digest", "");
        model.config_digest = j.value("config_digest", "");
        if (j.contains("padding")) {
            PaddingDescriptor pad;
            pad.m = j["padding"].at("m").get<int>();
            pad.p = j["padding"].at("p").get<int>();
            pad.train_expansion = j["padding"].at("train_expansion").get<int>();
            pad.value_lo = j["padding"].at("value_lo").get<double>();
            pad.value_hi = j["padding"].at("value_hi").get<double>();
            model.padding = pad;
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad model file '" + path + "': " + e.what());
    }
}

} // namespace fdia
