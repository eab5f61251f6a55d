#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdia/error.hpp"
#include "fdia/harness.hpp"

using namespace fdia;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// tiny but complete experiment, fast enough for unit tests
std::string tiny_config_json(const std::string& out_dir, std::uint64_t seed = 77) {
    std::ostringstream cfg;
    cfg << R"({
  "case": "case14",
  "seed": )" << seed << R"(,
  "out": ")" << out_dir << R"(",
  "dataset": {"count": 400, "false_ratio": 0.5},
  "detector": {"hidden_dims": [16, 8], "epochs": 3},
  "attacks": [
    {"strategy": "iterative_gradient", "k": [3], "epsilon": [1.0], "iterations": 5},
    {"strategy": "random_perturbation", "k": [3], "epsilon": [1.0]}
  ],
  "defense": {"p_values": [2], "train_expansion": 2, "infer_votes": 3}
})";
    return cfg.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("fdia_harness_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("minimal config resolves the documented defaults") {
    const ExperimentConfig cfg = parse_config_json(R"({"case": "case14", "seed": 3})");
    CHECK(cfg.case_name == "case14");
    CHECK(cfg.seed == 3);
    CHECK(cfg.count == 40000);
    CHECK(cfg.false_ratio == 0.5);
    CHECK(cfg.sigma == kDefaultSigma);
    CHECK(cfg.hidden_dims == std::vector<int>{128, 64});
    CHECK(cfg.train_cfg.epochs == 30);
    CHECK(cfg.train_cfg.batch_size == 64);
    REQUIRE(cfg.attack_mix.size() == 3);
    REQUIRE(cfg.attacks.size() == 4);
    for (const auto& grid : cfg.attacks) CHECK(grid.k_values == std::vector<int>{3, 5, 8});
    CHECK(cfg.defense.p_values == std::vector<int>{2, 4, 5, 10});
    CHECK(cfg.split_fractions.train == 0.8);
}

TEST_CASE("per-case default grids follow the experiment table") {
    CHECK(parse_config_json(R"({"case": "case30", "seed": 1})").attacks[0].k_values
          == std::vector<int>{6, 11, 15});
    CHECK(parse_config_json(R"({"case": "case118", "seed": 1})").attacks[0].k_values
          == std::vector<int>{12, 26, 35});
    CHECK(parse_config_json(R"({"case": "case300", "seed": 1})").attacks[0].k_values
          == std::vector<int>{18, 25, 40});
}

TEST_CASE("unknown keys are rejected with their path") {
    try {
        parse_config_json(R"({"case": "case14", "seed": 1, "dataset": {"countt": 10}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("$.dataset.countt") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_json(R"({"case": "case14", "seed": 1, "bogus": 2})"),
                    ConfigError);
}

TEST_CASE("seed is mandatory") {
    CHECK_THROWS_AS(parse_config_json(R"({"case": "case14"})"), ConfigError);
}

TEST_CASE("config round-trips through its canonical form") {
    const ExperimentConfig cfg = parse_config_json(tiny_config_json("/tmp/x"));
    const ExperimentConfig back = parse_config_json(config_to_json(cfg));
    CHECK(config_digest(cfg) == config_digest(back));
}

TEST_CASE("gen, train, attack, embed and report produce the full tree") {
    TempDir dir("full");
    const ExperimentConfig cfg = parse_config_json(tiny_config_json(dir.path.string()));
    cmd_gen(cfg);
    const std::string base = cfg.base_dir();
    CHECK(fs::exists(base + "/dataset/train.csv"));
    CHECK(fs::exists(base + "/dataset/val.csv"));
    CHECK(fs::exists(base + "/dataset/test.csv"));
    CHECK(fs::exists(base + "/manifest.json"));
    CHECK(fs::exists(base + "/config.json"));

    const Dataset train_set = read_dataset_csv(base + "/dataset/train.csv");
    CHECK(train_set.size() == 320);
    CHECK(train_set.count_label(1) == 160);

    cmd_train(cfg);
    CHECK(fs::exists(base + "/models/model_p0.json"));
    CHECK(fs::exists(base + "/models/model_p2.json"));
    CHECK(fs::exists(base + "/curves/loss_p0.csv"));
    CHECK(fs::exists(base + "/curves/loss_p2.csv"));
    const DetectorModel defended = load_model(base + "/models/model_p2.json");
    CHECK(defended.input_dim() == 22);
    REQUIRE(defended.padding.has_value());
    CHECK(defended.padding->p == 2);

    cmd_attack(cfg);
    CHECK(fs::exists(base + "/eval/attack_eval.csv"));
    std::istringstream eval(slurp(base + "/eval/attack_eval.csv"));
    std::string line;
    std::getline(eval, line);
    CHECK(line
          == "case,strategy,k,epsilon,p,R,clean_accuracy,attacked_accuracy,recall_on_false,"
             "mean_l2,seed");
    std::size_t rows = 0;
    while (std::getline(eval, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4); // 2 strategies x 1 k x 1 epsilon x {p=0, p=2}

    cmd_embed(cfg);
    CHECK(fs::exists(base + "/embed/embedding.csv"));
    std::istringstream embed(slurp(base + "/embed/embedding.csv"));
    std::getline(embed, line);
    CHECK(line == "x,y,label");
    rows = 0;
    while (std::getline(embed, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 40); // test split size

    cmd_report(cfg);
    CHECK(fs::exists(base + "/report.json"));
    CHECK(fs::exists(base + "/summary.csv"));
    const std::string report = slurp(base + "/report.json");
    CHECK(report.find("\"cells\"") != std::string::npos);
    CHECK(report.find("guess_space_log10") != std::string::npos);
}

TEST_CASE("the whole pipeline is byte-identical under the same seed") {
    TempDir dir_a("det_a");
    TempDir dir_b("det_b");
    const ExperimentConfig cfg_a = parse_config_json(tiny_config_json(dir_a.path.string()));
    const ExperimentConfig cfg_b = parse_config_json(tiny_config_json(dir_b.path.string()));
    for (const auto* cfg : {&cfg_a, &cfg_b}) {
        cmd_gen(*cfg);
        cmd_train(*cfg);
        cmd_attack(*cfg);
    }
    for (const char* rel :
         {"/dataset/train.csv", "/dataset/val.csv", "/dataset/test.csv",
          "/models/model_p0.json", "/models/model_p2.json", "/curves/loss_p0.csv",
          "/eval/attack_eval.csv"}) {
        CHECK(slurp(cfg_a.base_dir() + rel) == slurp(cfg_b.base_dir() + rel));
    }
    // different seed must change the data
    ExperimentConfig other = parse_config_json(tiny_config_json(dir_b.path.string(), 78));
    cmd_gen(other);
    CHECK(slurp(cfg_a.base_dir() + "/dataset/train.csv")
          != slurp(other.base_dir() + "/dataset/train.csv"));
}

TEST_CASE("attack refuses a run directory from a different config") {
    TempDir dir("digest");
    const ExperimentConfig cfg = parse_config_json(tiny_config_json(dir.path.string()));
    cmd_gen(cfg);
    ExperimentConfig tampered = cfg;
    tampered.sigma *= 2.0;
    CHECK_THROWS_AS(cmd_train(tampered), SemanticError);
}

TEST_CASE("report names missing pieces") {
    TempDir dir("missing");
    const ExperimentConfig cfg = parse_config_json(tiny_config_json(dir.path.string()));
    cmd_gen(cfg);
    cmd_train(cfg);
    cmd_attack(cfg);

    SUBCASE("deleted curve file") {
        fs::remove(cfg.base_dir() + "/curves/loss_p2.csv");
        try {
            cmd_report(cfg);
            FAIL("expected SemanticError");
        } catch (const SemanticError& e) {
            CHECK(std::string(e.what()).find("loss_p2.csv") != std::string::npos);
        }
    }
    SUBCASE("deleted eval row") {
        const std::string path = cfg.base_dir() + "/eval/attack_eval.csv";
        std::istringstream in(slurp(path));
        std::ostringstream out;
        std::string line;
        int n = 0;
        while (std::getline(in, line))
            if (n++ != 2) out << line << '\n'; // drop the second data row
        std::ofstream(path, std::ios::binary) << out.str();
        try {
            cmd_report(cfg);
            FAIL("expected SemanticError");
        } catch (const SemanticError& e) {
            CHECK(std::string(e.what()).find("missing grid cells") != std::string::npos);
            CHECK(std::string(e.what()).find("iterative_gradient") != std::string::npos);
        }
    }
    SUBCASE("untouched directory reports identically twice") {
        cmd_report(cfg);
        const std::string first = slurp(cfg.base_dir() + "/report.json");
        cmd_report(cfg);
        CHECK(first == slurp(cfg.base_dir() + "/report.json"));
    }
}

TEST_CASE("embedding rejects degenerate activations and keeps duplicates together") {
    TempDir dir("embed");
    const ExperimentConfig cfg = parse_config_json(tiny_config_json(dir.path.string()));
    cmd_gen(cfg);
    cmd_train(cfg);
    const DetectorModel model = load_model(cfg.base_dir() + "/models/model_p0.json");

    Dataset data = read_dataset_csv(cfg.base_dir() + "/dataset/test.csv");
    // duplicate the first row at the end
    Dataset with_dup(data.feature_dim(), data.meter_count());
    for (std::size_t i = 0; i < data.size(); ++i) with_dup.append(data.row(i), data.label(i));
    with_dup.append(data.row(0), data.label(0));

    const std::string out_path = (dir.path / "emb.csv").string();
    embed_to_csv(model, with_dup, out_path);
    std::istringstream in(slurp(out_path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    CHECK(lines[1] == lines.back()); // duplicate rows share coordinates

    DetectorModel flat = model;
    for (auto& w : flat.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    CHECK_THROWS_AS(embed_to_csv(flat, data, out_path), SemanticError);
}

TEST_CASE("the cli wires the pipeline with the documented exit codes") {
    const char* cli = std::getenv("FDIA_CLI");
    if (!cli) return; // only meaningful under ctest
    TempDir dir("cli");
    const std::string cfg_path = (dir.path / "cfg.json").string();
    std::ofstream(cfg_path) << tiny_config_json(dir.path.string());

    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("gen --config " + cfg_path) == 0);
    CHECK(run("train --config " + cfg_path + " --padding 0") == 0);
    CHECK(run("gen --config /nonexistent.json") == 1);
    CHECK(run("report --config " + cfg_path) == 2); // attack stage missing
    CHECK(run("bogus-subcommand") != 0);
}
