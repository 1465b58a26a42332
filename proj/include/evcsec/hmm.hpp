#pragma once

#include <string>
#include <utility>
#include <vector>

namespace evcsec {

// Discrete first-order HMM: states, observation alphabet, transition and
// emission matrices, initial distribution. Rows are stochastic within 1e-9.
struct HmmModel {
    std::vector<std::string> states;   // N
    std::vector<std::string> symbols;  // M
    std::vector<std::vector<double>> transition; // N x N
    std::vector<std::vector<double>> emission;   // N x M
    std::vector<double> initial;                 // N

    int state_index(const std::string& name) const;  // -1 if unknown
    int symbol_index(const std::string& name) const;
    void validate() const; // throws DomainError
};

struct TrainingCorpus {
    std::vector<std::string> states;
    std::vector<std::string> symbols;
    // Paired (state index, symbol index) per position, one vector per sequence.
    std::vector<std::vector<std::pair<int, int>>> sequences;
    std::vector<std::string> provenance;

    void validate() const;
};

struct CountTables {
    std::vector<std::string> states;
    std::vector<std::string> symbols;
    std::vector<std::vector<long long>> transition; // N x N
    std::vector<std::vector<long long>> emission;   // N x M
    std::vector<long long> initial;                 // N
};

struct DecodedPath {
    std::vector<std::string> states;       // Q*
    std::vector<double> log_deltas;        // per-step max_j delta_n(j), log
    std::vector<double> deltas;            // exp of the above (may underflow)
    std::vector<std::string> observations; // the decoded alert sequence
};

CountTables count_corpus(const TrainingCorpus& corpus);

// Row-normalizes counts with additive smoothing kappa. Zero-total rows with
// kappa = 0 become uniform.
HmmModel train(const CountTables& counts, double kappa);

// Log-domain Viterbi; ties broken toward the lowest state index. Throws
// DomainError("no admissible path...") when every path has probability zero,
// and on unknown symbols.
DecodedPath viterbi(const HmmModel& model, const std::vector<std::string>& alerts);

// Joint probability P(H, Q | lambda); the independent evaluator used to check
// Viterbi output.
double sequence_log_likelihood(const HmmModel& model,
                               const std::vector<std::string>& observations,
                               const std::vector<std::string>& states);
double sequence_likelihood(const HmmModel& model,
                           const std::vector<std::string>& observations,
                           const std::vector<std::string>& states);

// HMM configuration file: header with N, M, state and symbol names, then T, E
// and Pi blocks. Decimals are written with 17 significant digits, so
// load(save(m)) reproduces m bit-exactly.
std::string save_model(const HmmModel& model);
HmmModel load_model(const std::string& text);
void save_model_file(const HmmModel& model, const std::string& path);
HmmModel load_model_file(const std::string& path);

// Corpus file: `state<TAB>symbol` lines, blank line between sequences.
// Optional `#states ...` / `#symbols ...` directives pin the alphabets.
std::string save_corpus(const TrainingCorpus& corpus);
TrainingCorpus load_corpus(const std::string& text);
void save_corpus_file(const TrainingCorpus& corpus, const std::string& path);
TrainingCorpus load_corpus_file(const std::string& path);

// Most probable next state after the decoded path ends in `state`.
std::string predict_next_state(const HmmModel& model, const std::string& state);

std::string render_decode_table(const HmmModel& model, const DecodedPath& path);

} // namespace evcsec
