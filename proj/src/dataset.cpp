#include "fdia/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fdia/csv.hpp"
#include "fdia/digest.hpp"
#include "fdia/error.hpp"
#include "fdia/rng.hpp"
#include "fdia/stats.hpp"

namespace fdia {

void Dataset::append(std::span<const double> features, int label) {
    if (features.size() != feature_dim_)
        throw DimensionError("dataset append: expected " + std::to_string(feature_dim_)
                             + " features, got " + std::to_string(features.size()));
    if (label != 0 && label != 1) throw ConfigError("dataset append: label must be 0 or 1");
    features_.insert(features_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

void Dataset::reserve(std::size_t rows) {
    features_.reserve(rows * feature_dim_);
    labels_.reserve(rows);
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<TrainAttack> default_attack_mix(const std::string& case_name, double epsilon) {
    const std::vector<int> ks = default_k_grid(case_name);
    return {
        {AttackStrategy::random_perturbation, epsilon, ks, 1.0},
        {AttackStrategy::universal_noise, epsilon, ks, 1.0},
        {AttackStrategy::iterative_gaussian, epsilon, ks, 1.0},
    };
}

namespace {

// Model-free generation forms of the attack strategies, used to poison the
// training pool before any detector exists. Perturbations are expressed in
// per-meter standard deviations of the generated normal data, matching the
// normalized-space budget the evaluation attacks use.
struct UniversalDraw {
    std::vector<int> support;
    std::vector<double> delta; // normalized units, one per support entry
};

void add_scaled(std::span<double> z, const std::vector<int>& support,
                std::span<const double> delta_normalized,
                std::span<const double> meter_scale) {
    for (std::size_t j = 0; j < support.size(); ++j) {
        const auto idx = static_cast<std::size_t>(support[j]);
        z[idx] += delta_normalized[j] * meter_scale[idx];
    }
}

std::string mix_to_string(const std::vector<TrainAttack>& mix) {
    std::ostringstream out;
    for (const auto& entry : mix) {
        out << to_string(entry.strategy) << ':' << format_double(entry.epsilon) << ':'
            << format_double(entry.weight) << ":[";
        for (int k : entry.k_choices) out << k << ',';
        out << "];";
    }
    return out.str();
}

} // namespace

Dataset generate_dataset(const MeasurementModel& model, const GenerationConfig& cfg) {
    if (cfg.count < 1) throw ConfigError("generate_dataset: count must be >= 1");
    if (cfg.false_ratio < 0.0 || cfg.false_ratio > 1.0)
        throw ConfigError("generate_dataset: false_ratio must be in [0,1]");
    const auto n_false = static_cast<std::size_t>(
        std::llround(cfg.false_ratio * static_cast<double>(cfg.count)));
    if (n_false > 0 && cfg.attack_mix.empty())
        throw ConfigError("generate_dataset: false_ratio > 0 requires a non-empty attack mix");
    for (const auto& entry : cfg.attack_mix) {
        if (!(entry.weight > 0.0))
            throw ConfigError("generate_dataset: attack mix weights must be positive");
        if (entry.k_choices.empty())
            throw ConfigError("generate_dataset: attack mix entry needs k_choices");
        for (int k : entry.k_choices)
            if (k < 1 || static_cast<std::size_t>(k) > model.meter_count())
                throw ConfigError("generate_dataset: k = " + std::to_string(k)
                                  + " out of range for m = " + std::to_string(model.meter_count()));
    }

    const std::size_t m = model.meter_count();

    // fresh normal measurements for every slot
    const auto states =
        sample_states(model, cfg.count, cfg.load_scale_lo, cfg.load_scale_hi, cfg.seed);
    std::vector<std::vector<double>> rows;
    rows.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i)
        rows.push_back(measure(model, states[i], derive_seed(cfg.seed, 3, i)).z);

    // per-meter spread of the normal pool; attack budgets are stated in
    // these units so they track each meter's natural variation
    std::vector<double> meter_scale(m, 1.0);
    {
        std::vector<double> column(cfg.count);
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t i = 0; i < cfg.count; ++i) column[i] = rows[i][c];
            meter_scale[c] = std::max(sample_stats(column).stddev, 1e-8);
        }
    }

    // which slots carry false data
    std::vector<int> is_false(cfg.count, 0);
    {
        Rng pick(derive_seed(cfg.seed, 4));
        const auto chosen = sample_index_subset(cfg.count, n_false, pick);
        for (int idx : chosen) is_false[static_cast<std::size_t>(idx)] = 1;
    }

    // cumulative mix weights
    std::vector<double> cumulative;
    double total_weight = 0.0;
    for (const auto& entry : cfg.attack_mix) {
        total_weight += entry.weight;
        cumulative.push_back(total_weight);
    }

    // universal noise is one shared draw per mix entry and generation run
    std::vector<UniversalDraw> universal(cfg.attack_mix.size());
    for (std::size_t e = 0; e < cfg.attack_mix.size(); ++e) {
        const auto& entry = cfg.attack_mix[e];
        if (entry.strategy != AttackStrategy::universal_noise) continue;
        Rng rng(derive_seed(cfg.seed, 5, e));
        const int k = entry.k_choices[rng.uniform_index(entry.k_choices.size())];
        universal[e].support = sample_index_subset(m, static_cast<std::size_t>(k), rng);
        universal[e].delta.resize(static_cast<std::size_t>(k));
        for (auto& d : universal[e].delta) d = rng.uniform(-entry.epsilon, entry.epsilon);
    }

    for (std::size_t i = 0; i < cfg.count; ++i) {
        if (!is_false[i]) continue;
        Rng rng(derive_seed(cfg.seed, 6, i));
        const double pick = rng.uniform(0.0, total_weight);
        std::size_t e = 0;
        while (e + 1 < cumulative.size() && pick >= cumulative[e]) ++e;
        const auto& entry = cfg.attack_mix[e];

        switch (entry.strategy) {
            case AttackStrategy::random_perturbation: {
                const int k = entry.k_choices[rng.uniform_index(entry.k_choices.size())];
                const auto support = sample_index_subset(m, static_cast<std::size_t>(k), rng);
                const double intensity = rng.uniform01();
                std::vector<double> delta(support.size());
                for (auto& d : delta) d = intensity * rng.uniform(-1.0, 1.0) * entry.epsilon;
                add_scaled(rows[i], support, delta, meter_scale);
                break;
            }
            case AttackStrategy::universal_noise:
                add_scaled(rows[i], universal[e].support, universal[e].delta, meter_scale);
                break;
            case AttackStrategy::iterative_gaussian: {
                // Gaussian magnitudes, clipped to the budget. The query loop
                // only exists once a detector does; generation keeps the
                // magnitude distribution.
                const int k = entry.k_choices[rng.uniform_index(entry.k_choices.size())];
                const auto support = sample_index_subset(m, static_cast<std::size_t>(k), rng);
                std::vector<double> delta(support.size());
                for (auto& d : delta)
                    d = std::clamp(rng.normal(0.0, entry.epsilon / 3.0), -entry.epsilon,
                                   entry.epsilon);
                add_scaled(rows[i], support, delta, meter_scale);
                break;
            }
            case AttackStrategy::iterative_gradient:
                throw ConfigError("generate_dataset: iterative_gradient needs a trained detector "
                                  "and cannot poison a fresh dataset");
        }
    }

    Dataset out(m, m);
    out.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) out.append(rows[i], is_false[i]);

    std::ostringstream prov;
    prov << "case=" << model.case_name() << ";m=" << m << ";count=" << cfg.count
         << ";false_ratio=" << format_double(cfg.false_ratio) << ";sigma="
         << format_double(model.sigma()) << ";load=[" << format_double(cfg.load_scale_lo) << ','
         << format_double(cfg.load_scale_hi) << "];mix=" << mix_to_string(cfg.attack_mix)
         << ";seed=" << cfg.seed;
    out.set_provenance(digest_hex(prov.str()));
    return out;
}

DatasetSplits split(const Dataset& d, const SplitFractions& fractions, std::uint64_t seed) {
    const double sum = fractions.train + fractions.val + fractions.test;
    if (!(fractions.train > 0.0 && fractions.val > 0.0 && fractions.test > 0.0))
        throw ConfigError("split: fractions must be positive");
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");

    DatasetSplits out{Dataset(d.feature_dim(), d.meter_count()),
                      Dataset(d.feature_dim(), d.meter_count()),
                      Dataset(d.feature_dim(), d.meter_count())};

    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.label(i) == label) idx.push_back(i);
        if (idx.empty()) continue;

        Rng rng(derive_seed(seed, 7, static_cast<std::uint64_t>(label)));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_index(i)]);

        const auto n = idx.size();
        const auto n_train = static_cast<std::size_t>(
            std::llround(fractions.train * static_cast<double>(n)));
        const auto n_val = static_cast<std::size_t>(
            std::llround(fractions.val * static_cast<double>(n)));
        if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
            throw ConfigError("split: class " + std::to_string(label)
                              + " would leave a split empty");
        for (std::size_t i = 0; i < n; ++i) {
            Dataset& target = i < n_train         ? out.train
                              : i < n_train + n_val ? out.val
                                                    : out.test;
            target.append(d.row(idx[i]), label);
        }
    }
    out.train.set_provenance(d.provenance());
    out.val.set_provenance(d.provenance());
    out.test.set_provenance(d.provenance());
    return out;
}

Normalization fit_normalization(Dataset& d) {
    if (d.size() == 0) throw ConfigError("fit_normalization: empty dataset");
    const std::size_t dim = d.feature_dim();
    Normalization norm;
    norm.mean.assign(dim, 0.0);
    norm.stddev.assign(dim, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (std::size_t c = 0; c < dim; ++c) norm.mean[c] += r[c];
    }
    for (double& v : norm.mean) v /= static_cast<double>(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (std::size_t c = 0; c < dim; ++c) {
            const double delta = r[c] - norm.mean[c];
            norm.stddev[c] += delta * delta;
        }
    }
    for (double& v : norm.stddev)
        v = std::max(std::sqrt(v / static_cast<double>(d.size())), 1e-8);
    apply_normalization(d, norm);
    return norm;
}

void apply_normalization(Dataset& d, const Normalization& n) {
    if (n.dim() != d.feature_dim())
        throw DimensionError("apply_normalization: table dimension mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto r = d.row(i);
        for (std::size_t c = 0; c < r.size(); ++c) r[c] = (r[c] - n.mean[c]) / n.stddev[c];
    }
    d.set_normalization(n);
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < d.feature_dim(); ++c) out << "meter_" << c << ',';
    out << "label\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        for (double v : r) out << format_double(v) << ',';
        out << d.label(i) << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

Dataset read_dataset_csv(const std::string& path, std::size_t meter_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset '" + path + "' is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "label")
        throw ParseError("dataset '" + path + "': header must end with 'label'");
    const std::size_t dim = header.size() - 1;
    Dataset d(dim, meter_count == 0 ? dim : meter_count);
    std::vector<double> row(dim);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != dim + 1)
            throw ParseError("wrong field count", line_no, 1);
        for (std::size_t c = 0; c < dim; ++c) row[c] = parse_double(fields[c], "feature");
        const int label = static_cast<int>(parse_double(fields[dim], "label"));
        d.append(row, label);
    }
    return d;
}

} // namespace fdia
