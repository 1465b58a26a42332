#include "evcsec.h"

#include <cstring>
#include <fstream>
#include <string>

#include "evcsec/attack_tree.hpp"
#include "evcsec/errors.hpp"
#include "evcsec/hmm.hpp"
#include "evcsec/pipeline.hpp"

using evcsec::AttackDefenseTree;
using evcsec::DomainError;
using evcsec::HmmModel;
using evcsec::IoError;
using evcsec::Options;

struct evcsec_tree {
    AttackDefenseTree tree;
};

struct evcsec_hmm {
    HmmModel model;
};

namespace {

void set_error(char* err, size_t err_len, const char* msg) {
    if (!err || err_len == 0) return;
    std::strncpy(err, msg, err_len - 1);
    err[err_len - 1] = '\0';
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
evcsec_status guarded(char* err, size_t err_len, Fn&& fn) {
    try {
        fn();
        return EVCSEC_OK;
    } catch (const IoError& e) {
        set_error(err, err_len, e.what());
        return EVCSEC_ERR_IO;
    } catch (const DomainError& e) {
        set_error(err, err_len, e.what());
        return EVCSEC_ERR_DOMAIN;
    } catch (const std::exception& e) {
        set_error(err, err_len, e.what());
        return EVCSEC_ERR_DOMAIN;
    }
}

Options to_options(const evcsec_options* c) {
    Options o;
    if (!c) return o;
    o.seed = c->seed;
    o.kappa = c->kappa;
    o.lambda = c->lambda_tradeoff;
    o.ods_budget_mode = c->ods_budget_mode != 0;
    o.ods_budget = c->ods_budget;
    o.gamma = c->gamma;
    o.c_ucb = c->c_ucb;
    o.particles = c->particles;
    o.budget = c->budget;
    o.p_pred = c->p_pred;
    o.fn_rate = c->fn_rate;
    o.confusion_rate = c->confusion_rate;
    o.d_max = c->d_max;
    o.corpus_episodes = c->corpus_episodes;
    o.sim_episodes = c->sim_episodes;
    o.max_ticks = c->max_ticks;
    o.reward_catch = c->reward_catch;
    o.reward_goal = c->reward_goal;
    o.decoy_cost = c->decoy_cost;
    o.hint_weight = c->hint_weight;
    return o;
}

void from_options(const Options& o, evcsec_options* c) {
    c->seed = o.seed;
    c->kappa = o.kappa;
    c->lambda_tradeoff = o.lambda;
    c->ods_budget_mode = o.ods_budget_mode ? 1 : 0;
    c->ods_budget = o.ods_budget;
    c->gamma = o.gamma;
    c->c_ucb = o.c_ucb;
    c->particles = o.particles;
    c->budget = o.budget;
    c->p_pred = o.p_pred;
    c->fn_rate = o.fn_rate;
    c->confusion_rate = o.confusion_rate;
    c->d_max = o.d_max;
    c->corpus_episodes = o.corpus_episodes;
    c->sim_episodes = o.sim_episodes;
    c->max_ticks = o.max_ticks;
    c->reward_catch = o.reward_catch;
    c->reward_goal = o.reward_goal;
    c->decoy_cost = o.decoy_cost;
    c->hint_weight = o.hint_weight;
}

} // namespace

extern "C" {

const char* evcsec_version(void) { return "0.1.0"; }

void evcsec_string_free(char* s) { delete[] s; }

void evcsec_options_init(evcsec_options* options) {
    if (options) from_options(Options{}, options);
}

evcsec_status evcsec_options_load(evcsec_options* options,
                                  const char* config_path, char* err,
                                  size_t err_len) {
    return guarded(err, err_len, [&] {
        Options o = evcsec::load_options_file(config_path, to_options(options));
        from_options(o, options);
    });
}

evcsec_status evcsec_options_set(evcsec_options* options, const char* key,
                                 const char* value, char* err, size_t err_len) {
    return guarded(err, err_len, [&] {
        Options o = to_options(options);
        evcsec::apply_option(o, key, value);
        from_options(o, options);
    });
}

evcsec_status evcsec_config_get_path(const char* config_path, const char* key,
                                     char** value, char* err, size_t err_len) {
    *value = nullptr;
    return guarded(err, err_len, [&] {
        Options o = evcsec::load_options_file(config_path);
        std::string k = key;
        std::string v;
        if (k == "dfd") v = o.dfd_path;
        else if (k == "tree") v = o.tree_path;
        else if (k == "alerts") v = o.alerts_path;
        else if (k == "out") v = o.out_dir;
        else throw DomainError("unknown path key '" + k + "'");
        if (!v.empty()) *value = dup_string(v);
    });
}

evcsec_status evcsec_tree_load(const char* path, evcsec_tree** out, char* err,
                               size_t err_len) {
    *out = nullptr;
    return guarded(err, err_len, [&] {
        *out = new evcsec_tree{evcsec::parse_tree_file(path)};
    });
}

void evcsec_tree_free(evcsec_tree* tree) { delete tree; }

evcsec_status evcsec_tree_serialize(const evcsec_tree* tree, char** out,
                                    char* err, size_t err_len) {
    *out = nullptr;
    return guarded(err, err_len, [&] {
        *out = dup_string(evcsec::serialize_tree(tree->tree));
    });
}

size_t evcsec_tree_scenario_count(const evcsec_tree* tree) {
    try {
        return evcsec::enumerate_scenarios(tree->tree).size();
    } catch (const std::exception&) {
        return 0;
    }
}

evcsec_status evcsec_hmm_load(const char* path, evcsec_hmm** out, char* err,
                              size_t err_len) {
    *out = nullptr;
    return guarded(err, err_len, [&] {
        *out = new evcsec_hmm{evcsec::load_model_file(path)};
    });
}

void evcsec_hmm_free(evcsec_hmm* model) { delete model; }

evcsec_status evcsec_hmm_save(const evcsec_hmm* model, const char* path,
                              char* err, size_t err_len) {
    return guarded(err, err_len,
                   [&] { evcsec::save_model_file(model->model, path); });
}

evcsec_status evcsec_hmm_decode(const evcsec_hmm* model,
                                const char* const* symbols, size_t count,
                                char** table_out, char* err, size_t err_len) {
    *table_out = nullptr;
    return guarded(err, err_len, [&] {
        std::vector<std::string> alerts(symbols, symbols + count);
        auto path = evcsec::viterbi(model->model, alerts);
        *table_out = dup_string(evcsec::render_decode_table(model->model, path));
    });
}

evcsec_status evcsec_validate_tree(const char* tree_path, char* err,
                                   size_t err_len) {
    return guarded(err, err_len, [&] { (void)evcsec::parse_tree_file(tree_path); });
}

evcsec_status evcsec_threats(const char* dfd_path, char** report, char* err,
                             size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len,
                   [&] { *report = dup_string(evcsec::run_threats(dfd_path)); });
}

evcsec_status evcsec_scenarios(const char* tree_path, char** report, char* err,
                               size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len, [&] {
        *report = dup_string(evcsec::run_scenarios(tree_path));
    });
}

evcsec_status evcsec_ods(const char* tree_path, const evcsec_options* options,
                         char** report, char* err, size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len, [&] {
        *report = dup_string(evcsec::run_ods(tree_path, to_options(options)));
    });
}

evcsec_status evcsec_gen_corpus(const char* tree_path,
                                const evcsec_options* options,
                                const char* out_path, char* err, size_t err_len) {
    return guarded(err, err_len, [&] {
        evcsec::run_gen_corpus(tree_path, to_options(options), out_path);
    });
}

evcsec_status evcsec_train(const char* corpus_path,
                           const evcsec_options* options,
                           const char* model_out_path, char* err,
                           size_t err_len) {
    return guarded(err, err_len, [&] {
        evcsec::run_train(corpus_path, to_options(options), model_out_path);
    });
}

evcsec_status evcsec_decode(const char* model_path, const char* alerts_path,
                            char** report, char* err, size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len, [&] {
        *report = dup_string(evcsec::run_decode(model_path, alerts_path));
    });
}

evcsec_status evcsec_plan(const char* tree_path, const char* model_path,
                          const char* alerts_path,
                          const evcsec_options* options, char** report,
                          char* err, size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len, [&] {
        *report = dup_string(evcsec::run_plan(tree_path, model_path, alerts_path,
                                              to_options(options)));
    });
}

evcsec_status evcsec_simulate(const char* tree_path, const char* model_path,
                              const evcsec_options* options, char** report,
                              char* err, size_t err_len) {
    *report = nullptr;
    return guarded(err, err_len, [&] {
        *report = dup_string(evcsec::run_simulate(
            tree_path, model_path ? model_path : "", to_options(options)));
    });
}

evcsec_status evcsec_pipeline(const char* config_path, const char* dfd_path,
                              const char* tree_path, const char* alerts_path,
                              const evcsec_options* options,
                              const char* out_dir, char* err, size_t err_len) {
    return guarded(err, err_len, [&] {
        Options o = to_options(options);
        if (config_path) {
            Options file = evcsec::load_options_file(config_path);
            o.dfd_path = file.dfd_path;
            o.tree_path = file.tree_path;
            o.alerts_path = file.alerts_path;
            o.out_dir = file.out_dir;
            if (!options) o = evcsec::load_options_file(config_path, o);
        }
        if (dfd_path) o.dfd_path = dfd_path;
        if (tree_path) o.tree_path = tree_path;
        if (alerts_path) o.alerts_path = alerts_path;
        std::string out = out_dir ? out_dir : o.out_dir;
        if (out.empty()) throw DomainError("pipeline requires an output directory");
        evcsec::run_pipeline(o, out);
    });
}

} // extern "C"
