#include "fdia/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fdia/csv.hpp"
#include "fdia/digest.hpp"
#include "fdia/error.hpp"
#include "fdia/estimator.hpp"
#include "fdia/rng.hpp"
#include "fdia/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fdia {

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) throw ConfigError("config: " + path + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + path + "." + key + "'");
}

TrainAttack parse_train_attack(const json& j, const std::string& path) {
    check_keys(j, {"strategy", "epsilon", "k_choices", "weight"}, path);
    TrainAttack a;
    a.strategy = attack_strategy_from_string(j.at("strategy").get<std::string>());
    a.epsilon = j.value("epsilon", kDefaultEpsilon);
    a.k_choices = j.at("k_choices").get<std::vector<int>>();
    a.weight = j.value("weight", 1.0);
    return a;
}

AttackGrid parse_attack_grid(const json& j, const std::string& path) {
    check_keys(j, {"strategy", "k", "epsilon", "iterations", "step", "population"}, path);
    AttackGrid g;
    g.strategy = attack_strategy_from_string(j.at("strategy").get<std::string>());
    g.k_values = j.at("k").get<std::vector<int>>();
    if (j.contains("epsilon")) g.epsilons = j.at("epsilon").get<std::vector<double>>();
    g.iterations = j.value("iterations", 0);
    g.step = j.value("step", 0.0);
    g.population = j.value("population", 32);
    if (g.k_values.empty() || g.epsilons.empty())
        throw ConfigError("config: " + path + " needs non-empty k and epsilon lists");
    return g;
}

bool is_builtin(const std::string& name) {
    const auto& names = builtin_case_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<int> padding_sweep(const ExperimentConfig& cfg) {
    std::vector<int> ps{0};
    for (int p : cfg.defense.p_values)
        if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
    return ps;
}

std::string model_path(const ExperimentConfig& cfg, int p) {
    return cfg.base_dir() + "/models/model_p" + std::to_string(p) + ".json";
}

std::string curve_path(const ExperimentConfig& cfg, int p) {
    return cfg.base_dir() + "/curves/loss_p" + std::to_string(p) + ".csv";
}

PaddingScheme scheme_from_model(const DetectorModel& model, int infer_votes) {
    if (!model.padding) throw ConfigError("model carries no padding descriptor");
    PaddingScheme s;
    s.m = model.padding->m;
    s.p = model.padding->p;
    s.value_lo = model.padding->value_lo;
    s.value_hi = model.padding->value_hi;
    s.train_expansion = model.padding->train_expansion;
    s.infer_votes = infer_votes;
    return s;
}

Dataset filter_by_label(const Dataset& d, int label) {
    Dataset out(d.feature_dim(), d.meter_count());
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.label(i) == label) out.append(d.row(i), label);
    if (d.normalization()) out.set_normalization(*d.normalization());
    out.set_provenance(d.provenance());
    return out;
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    check_keys(j, {"case", "case_file", "sigma", "seed", "out", "dataset", "detector",
                   "attacks", "defense"},
               "$");
    ExperimentConfig cfg;
    try {
        cfg.case_name = j.at("case").get<std::string>();
        if (!j.contains("seed")) throw ConfigError("config: 'seed' is required");
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.case_file = j.value("case_file", std::string{});
        cfg.sigma = j.value("sigma", kDefaultSigma);
        cfg.out_dir = j.value("out", std::string{"runs"});

        if (j.contains("dataset")) {
            const json& d = j["dataset"];
            check_keys(d, {"count", "false_ratio", "load_scale", "split", "attack_mix"},
                       "$.dataset");
            cfg.count = d.value("count", static_cast<std::size_t>(40000));
            cfg.false_ratio = d.value("false_ratio", 0.5);
            if (d.contains("load_scale")) {
                const auto ls = d["load_scale"].get<std::vector<double>>();
                if (ls.size() != 2) throw ConfigError("config: load_scale must be [lo, hi]");
                cfg.load_scale_lo = ls[0];
                cfg.load_scale_hi = ls[1];
            }
            if (d.contains("split")) {
                const auto sp = d["split"].get<std::vector<double>>();
                if (sp.size() != 3)
                    throw ConfigError("config: split must be [train, val, test]");
                cfg.split_fractions = {sp[0], sp[1], sp[2]};
            }
            if (d.contains("attack_mix")) {
                int i = 0;
                for (const auto& entry : d["attack_mix"])
                    cfg.attack_mix.push_back(
                        parse_train_attack(entry, "$.dataset.attack_mix[" + std::to_string(i++)
                                                      + "]"));
            }
        }

        if (j.contains("detector")) {
            const json& d = j["detector"];
            check_keys(d, {"hidden_dims", "epochs", "batch_size", "learning_rate", "momentum",
                        "weight_decay"},
                       "$.detector");
            if (d.contains("hidden_dims"))
                cfg.hidden_dims = d["hidden_dims"].get<std::vector<int>>();
            cfg.train_cfg.epochs = d.value("epochs", 30);
            cfg.train_cfg.batch_size = d.value("batch_size", 64);
            cfg.train_cfg.learning_rate = d.value("learning_rate", 0.01);
            cfg.train_cfg.momentum = d.value("momentum", 0.9);
            cfg.train_cfg.weight_decay = d.value("weight_decay", 1e-4);
        }
        cfg.train_cfg.seed = derive_seed(cfg.seed, 50);

        if (j.contains("attacks")) {
            int i = 0;
            for (const auto& entry : j["attacks"])
                cfg.attacks.push_back(
                    parse_attack_grid(entry, "$.attacks[" + std::to_string(i++) + "]"));
        }

        if (j.contains("defense")) {
            const json& d = j["defense"];
            check_keys(d, {"p_values", "train_expansion", "infer_votes"}, "$.defense");
            if (d.contains("p_values")) cfg.defense.p_values = d["p_values"].get<std::vector<int>>();
            cfg.defense.train_expansion = d.value("train_expansion", kDefaultTrainExpansion);
            cfg.defense.infer_votes = d.value("infer_votes", kDefaultInferVotes);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }

    // defaults that depend on the case
    if (cfg.attack_mix.empty() && cfg.false_ratio > 0.0) {
        if (!is_builtin(cfg.case_name))
            throw ConfigError("config: dataset.attack_mix is required for custom cases");
        cfg.attack_mix = default_attack_mix(cfg.case_name);
    }
    if (cfg.attacks.empty()) {
        if (!is_builtin(cfg.case_name))
            throw ConfigError("config: attacks grid is required for custom cases");
        const auto ks = default_k_grid(cfg.case_name);
        for (auto strategy :
             {AttackStrategy::random_perturbation, AttackStrategy::universal_noise,
              AttackStrategy::iterative_gaussian, AttackStrategy::iterative_gradient}) {
            AttackGrid g;
            g.strategy = strategy;
            g.k_values = ks;
            cfg.attacks.push_back(g);
        }
    }
    if (cfg.defense.p_values.empty() && !j.contains("defense") && is_builtin(cfg.case_name)) {
        // default padding sweep: small sizes plus a quarter and half of m
        const int m = static_cast<int>(builtin_case(cfg.case_name).branches.size());
        for (int p : {2, 4, m / 4, m / 2})
            if (std::find(cfg.defense.p_values.begin(), cfg.defense.p_values.end(), p)
                == cfg.defense.p_values.end())
                cfg.defense.p_values.push_back(p);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_json(read_text_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    // canonical form; the output directory is where results land, not part
    // of the experiment's identity, so it stays out of the digest
    json j;
    j["case"] = cfg.case_name;
    if (!cfg.case_file.empty()) j["case_file"] = cfg.case_file;
    j["sigma"] = cfg.sigma;
    j["seed"] = cfg.seed;

    json mix = json::array();
    for (const auto& a : cfg.attack_mix)
        mix.push_back({{"strategy", to_string(a.strategy)},
                       {"epsilon", a.epsilon},
                       {"k_choices", a.k_choices},
                       {"weight", a.weight}});
    j["dataset"] = {{"count", cfg.count},
                    {"false_ratio", cfg.false_ratio},
                    {"load_scale", {cfg.load_scale_lo, cfg.load_scale_hi}},
                    {"split",
                     {cfg.split_fractions.train, cfg.split_fractions.val,
                      cfg.split_fractions.test}},
                    {"attack_mix", mix}};
    j["detector"] = {{"hidden_dims", cfg.hidden_dims},
                     {"epochs", cfg.train_cfg.epochs},
                     {"batch_size", cfg.train_cfg.batch_size},
                     {"learning_rate", cfg.train_cfg.learning_rate},
                     {"momentum", cfg.train_cfg.momentum},
                     {"weight_decay", cfg.train_cfg.weight_decay}};
    json grids = json::array();
    for (const auto& g : cfg.attacks)
        grids.push_back({{"strategy", to_string(g.strategy)},
                         {"k", g.k_values},
                         {"epsilon", g.epsilons},
                         {"iterations", g.iterations},
                         {"step", g.step},
                         {"population", g.population}});
    j["attacks"] = grids;
    j["defense"] = {{"p_values", cfg.defense.p_values},
                    {"train_expansion", cfg.defense.train_expansion},
                    {"infer_votes", cfg.defense.infer_votes}};
    return j.dump(1);
}

std::string config_digest(const ExperimentConfig& cfg) { return digest_hex(config_to_json(cfg)); }

CaseSystem resolve_case(const ExperimentConfig& cfg) {
    if (cfg.case_file.empty()) return builtin_case(cfg.case_name);
    const std::string text = read_text_file(cfg.case_file);
    const bool is_json = cfg.case_file.size() > 5
                         && cfg.case_file.substr(cfg.case_file.size() - 5) == ".json";
    CaseSystem sys =
        parse_case(text, is_json ? CaseFormat::native_json : CaseFormat::matpower_subset);
    if (sys.name.empty()) sys.name = cfg.case_name;
    return sys;
}

void cmd_gen(const ExperimentConfig& cfg) {
    const CaseSystem sys = resolve_case(cfg);
    const MeasurementModel model = build_h(sys, cfg.sigma);

    GenerationConfig gen;
    gen.count = cfg.count;
    gen.false_ratio = cfg.false_ratio;
    gen.attack_mix = cfg.attack_mix;
    gen.load_scale_lo = cfg.load_scale_lo;
    gen.load_scale_hi = cfg.load_scale_hi;
    gen.seed = cfg.seed;

    Dataset full = generate_dataset(model, gen);
    DatasetSplits splits = split(full, cfg.split_fractions, derive_seed(cfg.seed, 51));
    const Normalization norm = fit_normalization(splits.train);
    apply_normalization(splits.val, norm);
    apply_normalization(splits.test, norm);

    const std::string base = cfg.base_dir();
    ensure_dir(base + "/dataset");
    write_dataset_csv(splits.train, base + "/dataset/train.csv");
    write_dataset_csv(splits.val, base + "/dataset/val.csv");
    write_dataset_csv(splits.test, base + "/dataset/test.csv");
    write_text_file(base + "/config.json", config_to_json(cfg));

    json manifest;
    manifest["case"] = sys.name;
    manifest["m"] = model.meter_count();
    manifest["state_dim"] = model.state_dim();
    manifest["sigma"] = cfg.sigma;
    manifest["seed"] = cfg.seed;
    manifest["tool_version"] = kToolVersion;
    manifest["config_digest"] = config_digest(cfg);
    manifest["provenance"] = full.provenance();
    manifest["counts"] = {
        {"train", {{"total", splits.train.size()}, {"false", splits.train.count_label(1)}}},
        {"val", {{"total", splits.val.size()}, {"false", splits.val.count_label(1)}}},
        {"test", {{"total", splits.test.size()}, {"false", splits.test.count_label(1)}}}};
    manifest["normalization"] = {{"mean", norm.mean}, {"stddev", norm.stddev}};
    write_text_file(base + "/manifest.json", manifest.dump(1) + "\n");
}

namespace {

struct LoadedDatasets {
    Dataset train;
    Dataset val;
    Dataset test;
    Normalization norm;
    json manifest;
};

LoadedDatasets load_datasets(const ExperimentConfig& cfg, bool need_train) {
    const std::string base = cfg.base_dir();
    LoadedDatasets out;
    const std::string manifest_path = base + "/manifest.json";
    try {
        out.manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw SemanticError("bad manifest '" + manifest_path + "': " + e.what());
    }
    if (out.manifest.value("config_digest", "") != config_digest(cfg))
        throw SemanticError("run directory '" + base
                            + "' was generated with a different config (digest mismatch)");
    out.norm.mean = out.manifest.at("normalization").at("mean").get<std::vector<double>>();
    out.norm.stddev = out.manifest.at("normalization").at("stddev").get<std::vector<double>>();
    const auto m = out.manifest.at("m").get<std::size_t>();
    if (need_train) {
        out.train = read_dataset_csv(base + "/dataset/train.csv", m);
        out.val = read_dataset_csv(base + "/dataset/val.csv", m);
        out.train.set_normalization(out.norm);
        out.val.set_normalization(out.norm);
        out.train.set_provenance(out.manifest.value("provenance", ""));
        out.val.set_provenance(out.manifest.value("provenance", ""));
    }
    out.test = read_dataset_csv(base + "/dataset/test.csv", m);
    out.test.set_normalization(out.norm);
    out.test.set_provenance(out.manifest.value("provenance", ""));
    return out;
}

void write_curve_csv(const LossCurve& curve, const std::string& path) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < curve.size(); ++e)
        out << e << ',' << format_double(curve[e].train_loss) << ','
            << format_double(curve[e].val_loss) << ',' << format_double(curve[e].val_accuracy)
            << '\n';
    write_text_file(path, out.str());
}

} // namespace

void cmd_train(const ExperimentConfig& cfg, std::optional<int> padding) {
    const LoadedDatasets data = load_datasets(cfg, /*need_train=*/true);
    const std::string base = cfg.base_dir();
    ensure_dir(base + "/models");
    ensure_dir(base + "/curves");

    std::vector<int> ps = padding ? std::vector<int>{*padding} : padding_sweep(cfg);
    for (int p : ps) {
        if (p < 0) throw ConfigError("padding size must be >= 0");
        TrainConfig tc = cfg.train_cfg;
        tc.seed = derive_seed(cfg.train_cfg.seed, 52, static_cast<std::uint64_t>(p));

        DetectorModel model;
        LossCurve curve;
        if (p == 0) {
            model = init_model(static_cast<int>(data.train.feature_dim()), cfg.hidden_dims,
                               tc.seed);
            curve = train(model, data.train, data.val, tc);
        } else {
            const PaddingScheme scheme = make_scheme(p, data.train, cfg.defense.train_expansion,
                                                     cfg.defense.infer_votes);
            auto trained = train_defended(data.train, data.val, scheme, cfg.hidden_dims, tc);
            model = std::move(trained.first);
            curve = std::move(trained.second);
        }
        model.normalization = data.norm;
        model.config_digest = config_digest(cfg);
        save_model(model, model_path(cfg, p));
        write_curve_csv(curve, curve_path(cfg, p));
    }
}

void cmd_attack(const ExperimentConfig& cfg) {
    const LoadedDatasets data = load_datasets(cfg, /*need_train=*/false);
    const std::string base = cfg.base_dir();
    ensure_dir(base + "/eval");

    // attack cells craft false data from the clean normal measurements, the
    // way the ordinary false class was generated; the attacked test set is
    // {clean normals, crafted samples}
    const Dataset normals = filter_by_label(data.test, 0);
    const Dataset falses = filter_by_label(data.test, 1);
    if (normals.size() == 0 || falses.size() == 0)
        throw SemanticError("cmd_attack: test split must carry both classes");
    const std::size_t m = data.test.feature_dim();

    DetectorModel undefended = load_model(model_path(cfg, 0));
    if (static_cast<std::size_t>(undefended.input_dim()) != m)
        throw DimensionError("cmd_attack: undefended model does not match the dataset");

    struct Setting {
        int p;
        DetectorModel model;
        EvalPipeline pipeline;
        double clean_accuracy;
        double clean_recall;
    };
    std::vector<Setting> settings;
    for (int p : padding_sweep(cfg)) {
        Setting s;
        s.p = p;
        s.model = (p == 0) ? undefended : load_model(model_path(cfg, p));
        settings.push_back(std::move(s));
    }
    for (auto& s : settings) {
        s.pipeline.model = &s.model;
        s.pipeline.seed = derive_seed(cfg.seed, 45, static_cast<std::uint64_t>(s.p));
        if (s.p > 0) s.pipeline.scheme = scheme_from_model(s.model, cfg.defense.infer_votes);
        std::size_t correct = 0, tp = 0;
        for (std::size_t i = 0; i < data.test.size(); ++i) {
            const int predicted = pipeline_classify(s.pipeline, data.test.row(i), i);
            if (predicted == data.test.label(i)) ++correct;
            if (predicted == 1 && data.test.label(i) == 1) ++tp;
        }
        s.clean_accuracy = static_cast<double>(correct) / static_cast<double>(data.test.size());
        s.clean_recall = static_cast<double>(tp) / static_cast<double>(falses.size());
    }

    std::ostringstream csv;
    csv << "case,strategy,k,epsilon,p,R,clean_accuracy,attacked_accuracy,recall_on_false,"
           "mean_l2,seed\n";
    json meta_rows = json::array();

    std::uint64_t cell = 0;
    for (const auto& grid : cfg.attacks) {
        for (int k : grid.k_values) {
            if (k < 1 || static_cast<std::size_t>(k) > m)
                throw ConfigError("cmd_attack: k = " + std::to_string(k) + " out of range");
            for (double eps : grid.epsilons) {
                AttackSpec spec;
                spec.strategy = grid.strategy;
                Rng support_rng(derive_seed(cfg.seed, 42, static_cast<std::uint64_t>(k)));
                spec.compromised = sample_index_subset(m, static_cast<std::size_t>(k),
                                                       support_rng);
                spec.epsilon = eps;
                spec.iterations = grid.iterations;
                spec.step = grid.step;
                spec.population = grid.population;
                spec.seed = derive_seed(cfg.seed, 43, cell++);

                const bool baseline = eps == 0.0; // no-attack row
                AttackResult crafted;
                if (!baseline) {
                    MeterSurface target(undefended);
                    crafted = run_attack(target, normals, spec);
                }

                for (const auto& s : settings) {
                    double recall = s.clean_recall;
                    double attacked_accuracy = s.clean_accuracy;
                    if (!baseline) {
                        std::size_t flagged = 0;
                        for (std::size_t i = 0; i < crafted.adversarial.size(); ++i)
                            if (pipeline_classify(s.pipeline, crafted.adversarial.row(i), i)
                                == 1)
                                ++flagged;
                        recall = static_cast<double>(flagged)
                                 / static_cast<double>(crafted.adversarial.size());
                        std::size_t correct_normals = 0;
                        for (std::size_t i = 0; i < normals.size(); ++i)
                            if (pipeline_classify(s.pipeline, normals.row(i),
                                                  crafted.adversarial.size() + i)
                                == 0)
                                ++correct_normals;
                        attacked_accuracy =
                            static_cast<double>(flagged + correct_normals)
                            / static_cast<double>(crafted.adversarial.size() + normals.size());
                    }

                    const int votes = s.p == 0 ? 1 : cfg.defense.infer_votes;
                    csv << cfg.case_name << ',' << to_string(spec.strategy) << ',' << k << ','
                        << format_double(eps) << ',' << s.p << ',' << votes << ','
                        << format_double(s.clean_accuracy) << ','
                        << format_double(attacked_accuracy) << ',' << format_double(recall)
                        << ',' << format_double(baseline ? 0.0 : crafted.mean_l2) << ','
                        << cfg.seed << '\n';
                    meta_rows.push_back({{"strategy", to_string(spec.strategy)},
                                         {"k", k},
                                         {"epsilon", eps},
                                         {"p", s.p},
                                         {"R", votes},
                                         {"spec", attack_spec_to_json(spec)}});
                }
            }
        }
    }

    write_text_file(base + "/eval/attack_eval.csv", csv.str());
    json meta;
    meta["config_digest"] = config_digest(cfg);
    meta["tool_version"] = kToolVersion;
    meta["rows"] = meta_rows;
    write_text_file(base + "/eval/attack_eval.meta.json", meta.dump(1) + "\n");
}

void embed_to_csv(const DetectorModel& model, const Dataset& data, const std::string& out_path) {
    if (data.size() == 0) throw ConfigError("embed: empty dataset");
    const std::size_t hidden_dim =
        static_cast<std::size_t>(model.layer_dims[model.layer_dims.size() - 2]);
    if (hidden_dim < 2)
        throw SemanticError("embed: last hidden layer has fewer than 2 dimensions");

    Matrix acts(data.size(), hidden_dim);
    std::vector<double> hidden;
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward(model, data.row(i), &hidden);
        std::copy(hidden.begin(), hidden.end(), acts.row(i).begin());
    }

    std::vector<double> mean(hidden_dim, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = acts.row(i);
        for (std::size_t c = 0; c < hidden_dim; ++c) mean[c] += r[c];
    }
    for (double& v : mean) v /= static_cast<double>(data.size());

    Matrix cov(hidden_dim, hidden_dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = acts.row(i);
        for (std::size_t a = 0; a < hidden_dim; ++a) {
            const double da = r[a] - mean[a];
            for (std::size_t b = a; b < hidden_dim; ++b)
                cov(a, b) += da * (r[b] - mean[b]);
        }
    }
    for (std::size_t a = 0; a < hidden_dim; ++a)
        for (std::size_t b = a; b < hidden_dim; ++b) {
            cov(a, b) /= static_cast<double>(data.size());
            cov(b, a) = cov(a, b);
        }

    const SymmetricEigen eig = symmetric_eigen(cov);
    if (eig.values.size() < 2 || eig.values[1] <= 1e-12)
        throw SemanticError("embed: fewer than 2 non-degenerate activation dimensions");

    std::ostringstream out;
    out << "x,y,label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = acts.row(i);
        double x = 0.0, y = 0.0;
        for (std::size_t c = 0; c < hidden_dim; ++c) {
            const double centered = r[c] - mean[c];
            x += centered * eig.vectors(c, 0);
            y += centered * eig.vectors(c, 1);
        }
        out << format_double(x) << ',' << format_double(y) << ',' << data.label(i) << '\n';
    }
    write_text_file(out_path, out.str());
}

void cmd_embed(const ExperimentConfig& cfg) {
    const LoadedDatasets data = load_datasets(cfg, /*need_train=*/false);
    const DetectorModel model = load_model(model_path(cfg, 0));
    ensure_dir(cfg.base_dir() + "/embed");
    embed_to_csv(model, data.test, cfg.base_dir() + "/embed/embedding.csv");
}

void cmd_report(const ExperimentConfig& cfg) {
    const std::string base = cfg.base_dir();
    const std::string digest = config_digest(cfg);

    const std::string stored = read_text_file(base + "/config.json");
    if (digest_hex(stored) != digest)
        throw SemanticError("report: stored config.json does not match the supplied config");

    json manifest = json::parse(read_text_file(base + "/manifest.json"));
    if (manifest.value("config_digest", "") != digest)
        throw SemanticError("report: manifest digest mismatch");

    // curves for the whole padding sweep
    json curves = json::object();
    for (int p : padding_sweep(cfg)) {
        const std::string path = curve_path(cfg, p);
        if (!fs::exists(path))
            throw SemanticError("report: missing curve file '" + path + "'");
        const std::string text = read_text_file(path);
        std::istringstream in(text);
        std::string line;
        std::getline(in, line); // header
        json rows = json::array();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_csv_line(line);
            rows.push_back({{"epoch", static_cast<int>(parse_double(fields[0], "epoch"))},
                            {"train_loss", parse_double(fields[1], "train_loss")},
                            {"val_loss", parse_double(fields[2], "val_loss")},
                            {"val_accuracy", parse_double(fields[3], "val_accuracy")}});
        }
        curves["p" + std::to_string(p)] = rows;

        const DetectorModel model = load_model(model_path(cfg, p));
        if (model.config_digest != digest)
            throw SemanticError("report: model '" + model_path(cfg, p) + "' digest mismatch");
    }

    // attack cells
    const std::string eval_path = base + "/eval/attack_eval.csv";
    if (!fs::exists(eval_path)) throw SemanticError("report: missing '" + eval_path + "'");
    json meta = json::parse(read_text_file(base + "/eval/attack_eval.meta.json"));
    if (meta.value("config_digest", "") != digest)
        throw SemanticError("report: attack_eval meta digest mismatch");

    std::istringstream in(read_text_file(eval_path));
    std::string line;
    std::getline(in, line);
    if (line != "case,strategy,k,epsilon,p,R,clean_accuracy,attacked_accuracy,recall_on_false,"
                "mean_l2,seed")
        throw SemanticError("report: unexpected attack_eval.csv header");
    json cells = json::array();
    std::set<std::string> present;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11) throw SemanticError("report: malformed attack_eval row");
        json cell{{"case", std::string(f[0])},
                  {"strategy", std::string(f[1])},
                  {"k", static_cast<int>(parse_double(f[2], "k"))},
                  {"epsilon", parse_double(f[3], "epsilon")},
                  {"p", static_cast<int>(parse_double(f[4], "p"))},
                  {"R", static_cast<int>(parse_double(f[5], "R"))},
                  {"clean_accuracy", parse_double(f[6], "clean_accuracy")},
                  {"attacked_accuracy", parse_double(f[7], "attacked_accuracy")},
                  {"recall_on_false", parse_double(f[8], "recall_on_false")},
                  {"mean_l2", parse_double(f[9], "mean_l2")},
                  {"seed", static_cast<std::uint64_t>(parse_double(f[10], "seed"))}};
        cells.push_back(cell);
        present.insert(std::string(f[1]) + "|k=" + std::string(f[2]) + "|eps="
                       + std::string(f[3]) + "|p=" + std::string(f[4]));
    }

    std::vector<std::string> missing;
    for (const auto& grid : cfg.attacks)
        for (int k : grid.k_values)
            for (double eps : grid.epsilons)
                for (int p : padding_sweep(cfg)) {
                    const std::string key = to_string(grid.strategy) + "|k=" + std::to_string(k)
                                            + "|eps=" + format_double(eps)
                                            + "|p=" + std::to_string(p);
                    if (!present.count(key)) missing.push_back(key);
                }
    if (!missing.empty()) {
        std::string msg = "report: missing grid cells:";
        for (const auto& cellname : missing) msg += " [" + cellname + "]";
        throw SemanticError(msg);
    }

    json security = json::array();
    const auto m = manifest.at("m").get<int>();
    for (int p : padding_sweep(cfg)) {
        PaddingScheme s;
        s.m = m;
        s.p = p;
        security.push_back({{"p", p}, {"guess_space_log10", guess_space_log10(s)}});
    }

    json report;
    report["tool_version"] = kToolVersion;
    report["config_digest"] = digest;
    report["case"] = cfg.case_name;
    report["dataset"] = manifest["counts"];
    report["m"] = m;
    report["cells"] = cells;
    report["curves"] = curves;
    report["security"] = security;
    write_text_file(base + "/report.json", report.dump(1) + "\n");

    std::ostringstream summary;
    summary << "case,strategy,k,epsilon,p,R,clean_accuracy,attacked_accuracy,recall_on_false,"
               "mean_l2,seed\n";
    for (const auto& cell : cells) {
        summary << cell["case"].get<std::string>() << ','
                << cell["strategy"].get<std::string>() << ',' << cell["k"].get<int>() << ','
                << format_double(cell["epsilon"].get<double>()) << ',' << cell["p"].get<int>()
                << ',' << cell["R"].get<int>() << ','
                << format_double(cell["clean_accuracy"].get<double>()) << ','
                << format_double(cell["attacked_accuracy"].get<double>()) << ','
                << format_double(cell["recall_on_false"].get<double>()) << ','
                << format_double(cell["mean_l2"].get<double>()) << ','
                << cell["seed"].get<std::uint64_t>() << '\n';
    }
    write_text_file(base + "/summary.csv", summary.str());
}

} // namespace fdia
