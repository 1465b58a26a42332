// evcsec command-line front end. Talks to the core exclusively through the
// C API in evcsec.h; exit codes: 0 success, 1 domain/validation error,
// 2 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evcsec.h"

namespace {

char g_err[1024];

int finish(evcsec_status status) {
    if (status != EVCSEC_OK) std::cerr << "error: " << g_err << "\n";
    return static_cast<int>(status);
}

int emit(const char* report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 2;
    }
    f << report;
    return 0;
}

struct OptionFlags {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, std::string>> values; // key -> raw value
    std::string config;

    void attach(CLI::App* cmd) {
        app = cmd;
        cmd->add_option("--config", config, "config file with key = value lines");
        for (const char* key :
             {"seed", "kappa", "lambda", "gamma", "c_ucb", "particles", "budget",
              "p_pred", "fn_rate", "confusion_rate", "d_max", "corpus_episodes",
              "sim_episodes", "max_ticks", "reward_catch", "reward_goal",
              "decoy_cost", "hint_weight", "ods_mode", "ods_budget"}) {
            auto holder = std::make_shared<std::string>();
            std::string k = key;
            cmd->add_option_function<std::string>(
                "--" + k,
                [this, k](const std::string& v) { values.emplace_back(k, v); },
                "override config key '" + k + "'");
        }
    }

    // Config first, then flag overrides (flags win).
    evcsec_status resolve(evcsec_options* options) {
        evcsec_options_init(options);
        if (!config.empty()) {
            auto st = evcsec_options_load(options, config.c_str(), g_err,
                                          sizeof(g_err));
            if (st != EVCSEC_OK) return st;
        }
        for (const auto& [key, value] : values) {
            auto st = evcsec_options_set(options, key.c_str(), value.c_str(),
                                         g_err, sizeof(g_err));
            if (st != EVCSEC_OK) return st;
        }
        return EVCSEC_OK;
    }

    // Path key from the config file, unless the explicit value is set.
    std::string path_from_config(const std::string& key,
                                 const std::string& explicit_value) {
        if (!explicit_value.empty() || config.empty()) return explicit_value;
        char* value = nullptr;
        if (evcsec_config_get_path(config.c_str(), key.c_str(), &value, g_err,
                                   sizeof(g_err)) != EVCSEC_OK)
            return explicit_value;
        std::string out = value ? value : "";
        evcsec_string_free(value);
        return out;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evcsec: attack-tree driven attack prediction and decoy planning"};
    app.require_subcommand(1);

    std::string tree_path, dfd_path, model_path, alerts_path, corpus_path;
    std::string out_path;

    auto* validate = app.add_subcommand("validate", "parse and validate a tree");
    validate->add_option("tree", tree_path, "attack-defense tree file")->required();

    auto* threats = app.add_subcommand("threats", "enumerate STRIDE threats");
    threats->add_option("dfd", dfd_path, "DFD file")->required();
    threats->add_option("--out", out_path, "write report here");

    auto* scenarios = app.add_subcommand("scenarios", "enumerate minimal attack scenarios");
    scenarios->add_option("tree", tree_path)->required();
    scenarios->add_option("--out", out_path);

    auto* ods = app.add_subcommand("ods", "compute the optimal defensive strategy");
    ods->add_option("tree", tree_path)->required();
    ods->add_option("--out", out_path);
    OptionFlags ods_flags;
    ods_flags.attach(ods);

    auto* gen = app.add_subcommand("gen-corpus", "generate a labeled training corpus");
    gen->add_option("tree", tree_path)->required();
    gen->add_option("--out", out_path, "corpus output path")->required();
    OptionFlags gen_flags;
    gen_flags.attach(gen);

    auto* train = app.add_subcommand("train", "train an HMM from a corpus");
    train->add_option("corpus", corpus_path)->required();
    train->add_option("--out", out_path, "model output path")->required();
    OptionFlags train_flags;
    train_flags.attach(train);

    auto* decode = app.add_subcommand("decode", "Viterbi-decode an alert log");
    decode->add_option("model", model_path)->required();
    decode->add_option("alerts", alerts_path)->required();
    decode->add_option("--out", out_path);

    auto* plan = app.add_subcommand("plan", "plan decoy placements with POMCP");
    plan->add_option("tree", tree_path)->required();
    plan->add_option("model", model_path)->required();
    plan->add_option("alerts", alerts_path)->required();
    plan->add_option("--out", out_path);
    OptionFlags plan_flags;
    plan_flags.attach(plan);

    auto* simulate = app.add_subcommand("simulate", "run closed-loop episodes");
    simulate->add_option("tree", tree_path)->required();
    simulate->add_option("--model", model_path, "trained HMM (optional)");
    simulate->add_option("--out", out_path);
    OptionFlags sim_flags;
    sim_flags.attach(simulate);

    auto* pipeline = app.add_subcommand("pipeline", "run the full Step 1-4 flow");
    pipeline->add_option("--dfd", dfd_path);
    pipeline->add_option("--tree", tree_path);
    pipeline->add_option("--alerts", alerts_path);
    pipeline->add_option("--out", out_path, "output directory");
    OptionFlags pipe_flags;
    pipe_flags.attach(pipeline);

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        auto st = evcsec_validate_tree(tree_path.c_str(), g_err, sizeof(g_err));
        if (st == EVCSEC_OK) std::cout << "ok\n";
        return finish(st);
    }
    if (threats->parsed()) {
        char* report = nullptr;
        auto st = evcsec_threats(dfd_path.c_str(), &report, g_err, sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (scenarios->parsed()) {
        char* report = nullptr;
        auto st = evcsec_scenarios(tree_path.c_str(), &report, g_err, sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (ods->parsed()) {
        evcsec_options options;
        auto st = ods_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        char* report = nullptr;
        st = evcsec_ods(tree_path.c_str(), &options, &report, g_err, sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (gen->parsed()) {
        evcsec_options options;
        auto st = gen_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        st = evcsec_gen_corpus(tree_path.c_str(), &options, out_path.c_str(),
                               g_err, sizeof(g_err));
        return finish(st);
    }
    if (train->parsed()) {
        evcsec_options options;
        auto st = train_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        st = evcsec_train(corpus_path.c_str(), &options, out_path.c_str(), g_err,
                          sizeof(g_err));
        return finish(st);
    }
    if (decode->parsed()) {
        char* report = nullptr;
        auto st = evcsec_decode(model_path.c_str(), alerts_path.c_str(), &report,
                                g_err, sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (plan->parsed()) {
        evcsec_options options;
        auto st = plan_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        char* report = nullptr;
        st = evcsec_plan(tree_path.c_str(), model_path.c_str(),
                         alerts_path.c_str(), &options, &report, g_err,
                         sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (simulate->parsed()) {
        evcsec_options options;
        auto st = sim_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        char* report = nullptr;
        st = evcsec_simulate(tree_path.c_str(),
                             model_path.empty() ? nullptr : model_path.c_str(),
                             &options, &report, g_err, sizeof(g_err));
        if (st != EVCSEC_OK) return finish(st);
        int rc = emit(report, out_path);
        evcsec_string_free(report);
        return rc;
    }
    if (pipeline->parsed()) {
        evcsec_options options;
        auto st = pipe_flags.resolve(&options);
        if (st != EVCSEC_OK) return finish(st);
        std::string out_dir = out_path;
        if (out_dir.empty()) out_dir = pipe_flags.path_from_config("out", "");
        st = evcsec_pipeline(pipe_flags.config.empty() ? nullptr
                                                       : pipe_flags.config.c_str(),
                             dfd_path.empty() ? nullptr : dfd_path.c_str(),
                             tree_path.empty() ? nullptr : tree_path.c_str(),
                             alerts_path.empty() ? nullptr : alerts_path.c_str(),
                             &options, out_dir.empty() ? nullptr : out_dir.c_str(),
                             g_err, sizeof(g_err));
        return finish(st);
    }
    return 1;
}
