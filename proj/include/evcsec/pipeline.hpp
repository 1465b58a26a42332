#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evcsec {

// Run configuration shared by the CLI subcommands and the pipeline. A config
// file provides `key = value` lines; flags override file values.
struct Options {
    std::uint64_t seed = 1;
    double kappa = 0.0;          // training smoothing
    double lambda = 1.0;         // ODS tradeoff
    bool ods_budget_mode = false;
    double ods_budget = 0.0;
    double gamma = 0.95;
    double c_ucb = 100.0;
    int particles = 400;
    int budget = 1000;           // POMCP simulations per search
    double p_pred = 0.7;
    double fn_rate = 0.0;
    double confusion_rate = 0.0;
    int d_max = 2;
    int corpus_episodes = 2000;
    int sim_episodes = 100;
    int max_ticks = 50;
    double reward_catch = 10.0;
    double reward_goal = -100.0;
    double decoy_cost = 0.1;
    double hint_weight = 0.8;

    std::string dfd_path;
    std::string tree_path;
    std::string alerts_path;
    std::string out_dir;
};

// Throws DomainError on unknown keys or malformed values.
void apply_option(Options& options, const std::string& key,
                  const std::string& value);
Options load_options_file(const std::string& path, Options base = Options{});

std::vector<std::string> load_alerts_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Subcommand bodies. Each returns the report text it would print; file
// outputs are written where an out path is given.
std::string run_threats(const std::string& dfd_path);
std::string run_scenarios(const std::string& tree_path);
std::string run_ods(const std::string& tree_path, const Options& options);
void run_gen_corpus(const std::string& tree_path, const Options& options,
                    const std::string& out_path);
void run_train(const std::string& corpus_path, const Options& options,
               const std::string& model_out_path);
std::string run_decode(const std::string& model_path,
                       const std::string& alerts_path);
std::string run_plan(const std::string& tree_path, const std::string& model_path,
                     const std::string& alerts_path, const Options& options);
std::string run_simulate(const std::string& tree_path,
                         const std::string& model_path, const Options& options);

// Full Step 1-4 run; persists threats.txt, scenarios.txt, ods.txt, model.hmm,
// decode.txt, plan.txt, episodes.txt under out_dir. A stage failure is
// rethrown with the stage name prefixed.
void run_pipeline(const Options& options, const std::string& out_dir);

} // namespace evcsec
