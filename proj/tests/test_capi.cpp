// Smoke test for the shared-library C API, written the way an external
// consumer would use it: only evcsec.h, status codes, and the error buffer.
#include "evcsec.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

static int failures = 0;

#define EXPECT(cond, what)                                              \
    do {                                                                \
        if (!(cond)) {                                                  \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, what);  \
            ++failures;                                                 \
        }                                                               \
    } while (0)

static const std::string kFixtures = EVCSEC_FIXTURE_DIR;

static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int main() {
    char err[256];

    EXPECT(evcsec_version() != nullptr, "version string");

    evcsec_options options;
    evcsec_options_init(&options);
    EXPECT(options.seed == 1, "default seed");
    EXPECT(options.kappa == 0.0, "default kappa");
    EXPECT(options.gamma == 0.95, "default gamma");

    EXPECT(evcsec_options_set(&options, "kappa", "0.5", err, sizeof(err)) ==
               EVCSEC_OK,
           "set kappa");
    EXPECT(options.kappa == 0.5, "kappa applied");
    err[0] = '\0';
    EXPECT(evcsec_options_set(&options, "bogus_knob", "1", err, sizeof(err)) ==
               EVCSEC_ERR_DOMAIN,
           "unknown key rejected");
    EXPECT(std::strstr(err, "bogus_knob") != nullptr, "error names the key");

    std::string config = kFixtures + "/pipeline.cfg";
    evcsec_options from_file;
    evcsec_options_init(&from_file);
    EXPECT(evcsec_options_load(&from_file, config.c_str(), err, sizeof(err)) ==
               EVCSEC_OK,
           "load config");
    EXPECT(from_file.seed == 7, "seed from config");
    EXPECT(from_file.kappa == 1.0, "kappa from config");
    EXPECT(evcsec_options_load(&from_file, "/nonexistent.cfg", err,
                               sizeof(err)) == EVCSEC_ERR_IO,
           "missing config is an IO error");

    char* path_value = nullptr;
    EXPECT(evcsec_config_get_path(config.c_str(), "tree", &path_value, err,
                                  sizeof(err)) == EVCSEC_OK,
           "config path lookup");
    EXPECT(path_value && std::strstr(path_value, "dos.adt") != nullptr,
           "tree path value");
    evcsec_string_free(path_value);
    path_value = nullptr;
    {
        std::string sparse = "/tmp/evcsec_capi_sparse.cfg";
        std::ofstream(sparse) << "tree = somewhere.adt\n";
        EXPECT(evcsec_config_get_path(sparse.c_str(), "alerts", &path_value,
                                      err, sizeof(err)) == EVCSEC_OK,
               "absent path key is not an error");
        EXPECT(path_value == nullptr, "absent path key yields NULL");
    }
    EXPECT(evcsec_config_get_path(config.c_str(), "no_such_key", &path_value,
                                  err, sizeof(err)) == EVCSEC_ERR_DOMAIN,
           "non-path key is a domain error");

    // Tree handle: load, count, canonical round trip.
    std::string tree_path = kFixtures + "/dos.adt";
    evcsec_tree* tree = nullptr;
    EXPECT(evcsec_tree_load(tree_path.c_str(), &tree, err, sizeof(err)) ==
               EVCSEC_OK,
           "tree load");
    EXPECT(evcsec_tree_scenario_count(tree) == 6, "six DoS scenarios");
    char* serialized = nullptr;
    EXPECT(evcsec_tree_serialize(tree, &serialized, err, sizeof(err)) ==
               EVCSEC_OK,
           "tree serialize");
    EXPECT(serialized && std::strstr(serialized, "goal L1") != nullptr,
           "root in canonical form");
    {
        std::string copy = "/tmp/evcsec_capi_tree.adt";
        std::ofstream(copy) << serialized;
        evcsec_tree* again = nullptr;
        char* serialized2 = nullptr;
        EXPECT(evcsec_tree_load(copy.c_str(), &again, err, sizeof(err)) ==
                   EVCSEC_OK,
               "canonical reload");
        EXPECT(evcsec_tree_serialize(again, &serialized2, err, sizeof(err)) ==
                   EVCSEC_OK,
               "canonical reserialize");
        EXPECT(std::strcmp(serialized, serialized2) == 0, "serialize fixpoint");
        evcsec_string_free(serialized2);
        evcsec_tree_free(again);
    }
    evcsec_string_free(serialized);
    evcsec_tree_free(tree);

    EXPECT(evcsec_tree_load("/nonexistent.adt", &tree, err, sizeof(err)) ==
               EVCSEC_ERR_IO,
           "missing tree is an IO error");
    {
        std::string bad = "/tmp/evcsec_capi_bad.adt";
        std::ofstream(bad) << "goal r XOR \"r\" { leaf a \"a\" }\n";
        err[0] = '\0';
        EXPECT(evcsec_tree_load(bad.c_str(), &tree, err, sizeof(err)) ==
                   EVCSEC_ERR_DOMAIN,
               "bad gate is a domain error");
        EXPECT(err[0] != '\0', "domain error carries a message");
    }

    EXPECT(evcsec_validate_tree(tree_path.c_str(), err, sizeof(err)) ==
               EVCSEC_OK,
           "validate fixture");

    // Threat report straight from the DFD.
    char* report = nullptr;
    std::string dfd_path = kFixtures + "/evcs.dfd";
    EXPECT(evcsec_threats(dfd_path.c_str(), &report, err, sizeof(err)) ==
               EVCSEC_OK,
           "threat report");
    EXPECT(report && std::strlen(report) > 0, "report non-empty");
    evcsec_string_free(report);
    report = nullptr;

    // Corpus -> model -> decode through handles.
    evcsec_options small;
    evcsec_options_init(&small);
    small.corpus_episodes = 300;
    small.kappa = 1.0;
    std::string corpus_path = "/tmp/evcsec_capi_corpus.tsv";
    std::string model_path = "/tmp/evcsec_capi_model.hmm";
    EXPECT(evcsec_gen_corpus(tree_path.c_str(), &small, corpus_path.c_str(),
                             err, sizeof(err)) == EVCSEC_OK,
           "gen corpus");
    EXPECT(evcsec_train(corpus_path.c_str(), &small, model_path.c_str(), err,
                        sizeof(err)) == EVCSEC_OK,
           "train");
    evcsec_hmm* model = nullptr;
    EXPECT(evcsec_hmm_load(model_path.c_str(), &model, err, sizeof(err)) ==
               EVCSEC_OK,
           "model load");
    std::string model_copy = "/tmp/evcsec_capi_model_copy.hmm";
    EXPECT(evcsec_hmm_save(model, model_copy.c_str(), err, sizeof(err)) ==
               EVCSEC_OK,
           "model save");
    EXPECT(slurp(model_path) == slurp(model_copy), "model bytes round-trip");
    const char* alerts[] = {"SR", "SR", "NB"};
    char* table = nullptr;
    EXPECT(evcsec_hmm_decode(model, alerts, 3, &table, err, sizeof(err)) ==
               EVCSEC_OK,
           "decode");
    EXPECT(table && std::strstr(table, "predicted_next") != nullptr,
           "decode table shape");
    evcsec_string_free(table);
    const char* unknown[] = {"XX"};
    err[0] = '\0';
    EXPECT(evcsec_hmm_decode(model, unknown, 1, &table, err, sizeof(err)) ==
               EVCSEC_ERR_DOMAIN,
           "unknown symbol is a domain error");
    EXPECT(std::strstr(err, "XX") != nullptr, "symbol named in diagnostics");
    evcsec_hmm_free(model);

    // Whole pipeline with explicit paths and a small budget.
    evcsec_options fast;
    evcsec_options_init(&fast);
    fast.seed = 7;
    fast.kappa = 1.0;
    fast.corpus_episodes = 300;
    fast.sim_episodes = 5;
    fast.budget = 100;
    fast.particles = 100;
    std::string alerts_path = kFixtures + "/alerts_dos.log";
    std::string out_dir = "/tmp/evcsec_capi_pipeline";
    EXPECT(evcsec_pipeline(nullptr, dfd_path.c_str(), tree_path.c_str(),
                           alerts_path.c_str(), &fast, out_dir.c_str(), err,
                           sizeof(err)) == EVCSEC_OK,
           "pipeline run");
    const char* artifacts[] = {"threats.txt", "scenarios.txt", "ods.txt",
                               "model.hmm",   "decode.txt",    "plan.txt",
                               "episodes.txt"};
    for (const char* name : artifacts) {
        std::string path = out_dir + "/" + name;
        EXPECT(!slurp(path).empty(), name);
    }

    if (failures == 0) std::printf("test_capi: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
