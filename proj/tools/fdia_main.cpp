#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fdia/error.hpp"
#include "fdia/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string case_name;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config JSON");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed, "override the config's master seed");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
    cmd->add_option("--case", opts.case_name, "override the case name");
}

fdia::ExperimentConfig resolve(const CommonOpts& opts) {
    fdia::ExperimentConfig cfg = fdia::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.case_name.empty()) cfg.case_name = opts.case_name;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FDIA detection lab: DC power-flow data synthesis, detector training, "
                 "attack evaluation and the randomized-padding defense"};
    app.require_subcommand(1);

    CommonOpts gen_opts, train_opts, attack_opts, report_opts;
    std::optional<int> padding;

    auto* gen = app.add_subcommand("gen", "synthesize train/val/test datasets");
    add_common(gen, gen_opts);

    auto* train = app.add_subcommand("train", "train detectors (vanilla and padded)");
    add_common(train, train_opts);
    train->add_option("--padding", padding, "train only this padding size");

    auto* attack = app.add_subcommand("attack", "evaluate the attack grid");
    add_common(attack, attack_opts);

    std::string embed_model, embed_data, embed_out, embed_config;
    auto* embed = app.add_subcommand("embed", "export a 2-D hidden-layer embedding");
    embed->add_option("--config", embed_config, "experiment config JSON (uses the run layout)");
    embed->add_option("--model", embed_model, "model JSON path");
    embed->add_option("--data", embed_data, "dataset CSV path");
    embed->add_option("--out-csv", embed_out, "output CSV path");

    auto* report = app.add_subcommand("report", "consolidate a run into report.json");
    add_common(report, report_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        try {
            if (gen->parsed()) {
                fdia::cmd_gen(resolve(gen_opts));
            } else if (train->parsed()) {
                fdia::cmd_train(resolve(train_opts), padding);
            } else if (attack->parsed()) {
                fdia::cmd_attack(resolve(attack_opts));
            } else if (embed->parsed()) {
                if (!embed_config.empty()) {
                    CommonOpts opts;
                    opts.config_path = embed_config;
                    fdia::cmd_embed(resolve(opts));
                } else if (!embed_model.empty() && !embed_data.empty() && !embed_out.empty()) {
                    const auto model = fdia::load_model(embed_model);
                    const auto data = fdia::read_dataset_csv(embed_data);
                    fdia::embed_to_csv(model, data, embed_out);
                } else {
                    throw fdia::ConfigError(
                        "embed needs --config or all of --model/--data/--out-csv");
                }
            } else if (report->parsed()) {
                fdia::cmd_report(resolve(report_opts));
            }
        } catch (const fdia::ConfigError&) {
            throw;
        } catch (const fdia::ParseError&) {
            throw;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
