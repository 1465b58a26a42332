/* C API for the evcsec toolkit: attack-defense trees, HMM-based attack-step
 * prediction, and POMCP decoy planning.
 *
 * Conventions: functions return evcsec_status; on failure a message is
 * written to the caller-provided error buffer. Strings returned through
 * char** are heap-allocated and must be released with evcsec_string_free.
 * Opaque handles are released with their matching *_free function.
 */
#ifndef EVCSEC_H
#define EVCSEC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evcsec_status {
    EVCSEC_OK = 0,
    EVCSEC_ERR_DOMAIN = 1, /* validation / domain failure */
    EVCSEC_ERR_IO = 2      /* file system failure */
} evcsec_status;

const char* evcsec_version(void);
void evcsec_string_free(char* s);

/* Numeric knobs shared by the subcommand-level calls. Initialize with
 * evcsec_options_init, then adjust fields or merge a config file. */
typedef struct evcsec_options {
    uint64_t seed;
    double kappa;           /* training smoothing */
    double lambda_tradeoff; /* ODS objective tradeoff */
    int ods_budget_mode;    /* 0 = full coverage, 1 = budgeted */
    double ods_budget;
    double gamma;           /* POMDP discount */
    double c_ucb;           /* POMCP exploration constant */
    int particles;          /* belief particle count K */
    int budget;             /* POMCP simulations per search */
    double p_pred;          /* attacker predicted-path probability */
    double fn_rate;         /* monitoring false-negative rate */
    double confusion_rate;  /* monitoring wrong-category rate */
    int d_max;              /* max decoys per placement */
    int corpus_episodes;
    int sim_episodes;
    int max_ticks;
    double reward_catch;
    double reward_goal;
    double decoy_cost;
    double hint_weight;     /* belief weight toward the decoded leaf */
} evcsec_options;

void evcsec_options_init(evcsec_options* options);
evcsec_status evcsec_options_load(evcsec_options* options,
                                  const char* config_path, char* err,
                                  size_t err_len);
/* Single key=value override (the CLI maps flags through this). */
evcsec_status evcsec_options_set(evcsec_options* options, const char* key,
                                 const char* value, char* err, size_t err_len);
/* Reads a path-valued key (dfd, tree, alerts, out) from a config file.
 * Returns EVCSEC_OK with *value = NULL when the key is absent. */
evcsec_status evcsec_config_get_path(const char* config_path, const char* key,
                                     char** value, char* err, size_t err_len);

/* ---- opaque handles ---- */

typedef struct evcsec_tree evcsec_tree;
evcsec_status evcsec_tree_load(const char* path, evcsec_tree** out, char* err,
                               size_t err_len);
void evcsec_tree_free(evcsec_tree* tree);
evcsec_status evcsec_tree_serialize(const evcsec_tree* tree, char** out,
                                    char* err, size_t err_len);
size_t evcsec_tree_scenario_count(const evcsec_tree* tree);

typedef struct evcsec_hmm evcsec_hmm;
evcsec_status evcsec_hmm_load(const char* path, evcsec_hmm** out, char* err,
                              size_t err_len);
void evcsec_hmm_free(evcsec_hmm* model);
evcsec_status evcsec_hmm_save(const evcsec_hmm* model, const char* path,
                              char* err, size_t err_len);
/* Decodes a symbol sequence; returns the rendered per-step table. */
evcsec_status evcsec_hmm_decode(const evcsec_hmm* model,
                                const char* const* symbols, size_t count,
                                char** table_out, char* err, size_t err_len);

/* ---- subcommand-level operations (reports returned as text) ---- */

evcsec_status evcsec_validate_tree(const char* tree_path, char* err,
                                   size_t err_len);
evcsec_status evcsec_threats(const char* dfd_path, char** report, char* err,
                             size_t err_len);
evcsec_status evcsec_scenarios(const char* tree_path, char** report, char* err,
                               size_t err_len);
evcsec_status evcsec_ods(const char* tree_path, const evcsec_options* options,
                         char** report, char* err, size_t err_len);
evcsec_status evcsec_gen_corpus(const char* tree_path,
                                const evcsec_options* options,
                                const char* out_path, char* err, size_t err_len);
evcsec_status evcsec_train(const char* corpus_path,
                           const evcsec_options* options,
                           const char* model_out_path, char* err,
                           size_t err_len);
evcsec_status evcsec_decode(const char* model_path, const char* alerts_path,
                            char** report, char* err, size_t err_len);
evcsec_status evcsec_plan(const char* tree_path, const char* model_path,
                          const char* alerts_path,
                          const evcsec_options* options, char** report,
                          char* err, size_t err_len);
evcsec_status evcsec_simulate(const char* tree_path, const char* model_path,
                              const evcsec_options* options, char** report,
                              char* err, size_t err_len);
/* Full Step 1-4 run; dfd/tree/alerts paths come from the config file unless
 * overridden by the non-NULL arguments. */
evcsec_status evcsec_pipeline(const char* config_path, const char* dfd_path,
                              const char* tree_path, const char* alerts_path,
                              const evcsec_options* options,
                              const char* out_dir, char* err, size_t err_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EVCSEC_H */
