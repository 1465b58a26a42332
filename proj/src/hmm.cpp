#include "evcsec/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "evcsec/errors.hpp"

namespace evcsec {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_row(const std::vector<double>& row, const std::string& what) {
    double sum = 0.0;
    for (double v : row) {
        if (!(v >= 0.0 && v <= 1.0))
            throw DomainError(what + " entry " + fmt17(v) + " outside [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw DomainError(what + " sums to " + fmt17(sum) + ", expected 1");
}

} // namespace

int HmmModel::state_index(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == name) return static_cast<int>(i);
    return -1;
}

int HmmModel::symbol_index(const std::string& name) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == name) return static_cast<int>(i);
    return -1;
}

void HmmModel::validate() const {
    std::size_t n = states.size(), m = symbols.size();
    if (n < 1 || m < 1) throw DomainError("model needs at least 1 state and 1 symbol");
    if (std::set<std::string>(states.begin(), states.end()).size() != n)
        throw DomainError("duplicate state names");
    if (std::set<std::string>(symbols.begin(), symbols.end()).size() != m)
        throw DomainError("duplicate symbol names");
    if (transition.size() != n || emission.size() != n || initial.size() != n)
        throw DomainError("matrix dimensions disagree with state count");
    for (std::size_t i = 0; i < n; ++i) {
        if (transition[i].size() != n)
            throw DomainError("transition row " + std::to_string(i) + " has wrong width");
        if (emission[i].size() != m)
            throw DomainError("emission row " + std::to_string(i) + " has wrong width");
        check_row(transition[i], "transition row " + states[i]);
        check_row(emission[i], "emission row " + states[i]);
    }
    check_row(initial, "initial distribution");
}

void TrainingCorpus::validate() const {
    if (states.empty() || symbols.empty())
        throw DomainError("corpus declares no states or no symbols");
    for (const auto& seq : sequences) {
        if (seq.empty()) throw DomainError("corpus contains an empty sequence");
        for (auto [s, o] : seq) {
            if (s < 0 || s >= static_cast<int>(states.size()))
                throw DomainError("corpus state index out of range");
            if (o < 0 || o >= static_cast<int>(symbols.size()))
                throw DomainError("corpus symbol index out of range");
        }
    }
}

CountTables count_corpus(const TrainingCorpus& corpus) {
    corpus.validate();
    std::size_t n = corpus.states.size(), m = corpus.symbols.size();
    CountTables t;
    t.states = corpus.states;
    t.symbols = corpus.symbols;
    t.transition.assign(n, std::vector<long long>(n, 0));
    t.emission.assign(n, std::vector<long long>(m, 0));
    t.initial.assign(n, 0);
    for (const auto& seq : corpus.sequences) {
        t.initial[seq.front().first]++;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            t.emission[seq[k].first][seq[k].second]++;
            if (k + 1 < seq.size())
                t.transition[seq[k].first][seq[k + 1].first]++;
        }
    }
    return t;
}

namespace {

std::vector<double> normalize_row(const std::vector<long long>& counts,
                                  double kappa) {
    std::size_t n = counts.size();
    long long total = 0;
    for (long long c : counts) total += c;
    std::vector<double> row(n);
    double denom = static_cast<double>(total) + kappa * static_cast<double>(n);
    if (denom <= 0.0) {
        // Zero-count row with no smoothing: uniform keeps the model usable.
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
        return row;
    }
    for (std::size_t i = 0; i < n; ++i)
        row[i] = (static_cast<double>(counts[i]) + kappa) / denom;
    return row;
}

} // namespace

HmmModel train(const CountTables& counts, double kappa) {
    if (kappa < 0.0) throw DomainError("smoothing kappa must be non-negative");
    HmmModel model;
    model.states = counts.states;
    model.symbols = counts.symbols;
    for (const auto& row : counts.transition)
        model.transition.push_back(normalize_row(row, kappa));
    for (const auto& row : counts.emission)
        model.emission.push_back(normalize_row(row, kappa));
    model.initial = normalize_row(counts.initial, kappa);
    model.validate();
    return model;
}

DecodedPath viterbi(const HmmModel& model, const std::vector<std::string>& alerts) {
    if (alerts.empty()) throw DomainError("empty alert sequence");
    std::size_t n = model.states.size(), len = alerts.size();
    std::vector<int> obs(len);
    for (std::size_t t = 0; t < len; ++t) {
        obs[t] = model.symbol_index(alerts[t]);
        if (obs[t] < 0)
            throw DomainError("unknown symbol '" + alerts[t] + "'");
    }

    std::vector<std::vector<double>> delta(len, std::vector<double>(n, kNegInf));
    std::vector<std::vector<int>> back(len, std::vector<int>(n, -1));
    for (std::size_t j = 0; j < n; ++j)
        delta[0][j] = safe_log(model.initial[j]) +
                      safe_log(model.emission[j][obs[0]]);
    for (std::size_t t = 1; t < len; ++t) {
        for (std::size_t j = 0; j < n; ++j) {
            double best = kNegInf;
            int arg = -1;
            for (std::size_t i = 0; i < n; ++i) {
                double cand = delta[t - 1][i] + safe_log(model.transition[i][j]);
                if (cand > best) { best = cand; arg = static_cast<int>(i); }
            }
            delta[t][j] = best + safe_log(model.emission[j][obs[t]]);
            back[t][j] = arg;
        }
    }

    DecodedPath path;
    path.observations = alerts;
    path.log_deltas.resize(len);
    path.deltas.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
        double best = kNegInf;
        for (std::size_t j = 0; j < n; ++j) best = std::max(best, delta[t][j]);
        if (best == kNegInf)
            throw DomainError("no admissible path: all state sequences have "
                              "probability zero at step " + std::to_string(t + 1));
        path.log_deltas[t] = best;
        path.deltas[t] = std::exp(best);
    }

    int cur = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (delta[len - 1][j] > delta[len - 1][cur]) cur = static_cast<int>(j);
    std::vector<int> seq(len);
    seq[len - 1] = cur;
    for (std::size_t t = len - 1; t > 0; --t) {
        cur = back[t][cur];
        seq[t - 1] = cur;
    }
    for (std::size_t t = 0; t < len; ++t) path.states.push_back(model.states[seq[t]]);
    return path;
}

double sequence_log_likelihood(const HmmModel& model,
                               const std::vector<std::string>& observations,
                               const std::vector<std::string>& states) {
    if (observations.size() != states.size())
        throw DomainError("observation/state sequence length mismatch");
    if (observations.empty()) throw DomainError("empty sequence");
    double logp = 0.0;
    int prev = -1;
    for (std::size_t t = 0; t < observations.size(); ++t) {
        int s = model.state_index(states[t]);
        if (s < 0) throw DomainError("unknown state '" + states[t] + "'");
        int o = model.symbol_index(observations[t]);
        if (o < 0) throw DomainError("unknown symbol '" + observations[t] + "'");
        logp += (t == 0) ? safe_log(model.initial[s])
                         : safe_log(model.transition[prev][s]);
        logp += safe_log(model.emission[s][o]);
        prev = s;
    }
    return logp;
}

double sequence_likelihood(const HmmModel& model,
                           const std::vector<std::string>& observations,
                           const std::vector<std::string>& states) {
    return std::exp(sequence_log_likelihood(model, observations, states));
}

std::string save_model(const HmmModel& model) {
    std::ostringstream out;
    out << "# evcsec hmm configuration\n";
    out << "states " << model.states.size() << "\n";
    out << "symbols " << model.symbols.size() << "\n";
    out << "state_names";
    for (const auto& s : model.states) out << " " << s;
    out << "\nsymbol_names";
    for (const auto& s : model.symbols) out << " " << s;
    out << "\nT\n";
    for (const auto& row : model.transition) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? " " : "") << fmt17(row[j]);
        out << "\n";
    }
    out << "E\n";
    for (const auto& row : model.emission) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? " " : "") << fmt17(row[j]);
        out << "\n";
    }
    out << "Pi\n";
    for (std::size_t j = 0; j < model.initial.size(); ++j)
        out << (j ? " " : "") << fmt17(model.initial[j]);
    out << "\n";
    return out.str();
}

namespace {

std::vector<std::string> next_data_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        if (!tokens.empty()) return tokens;
    }
    return {};
}

std::vector<double> parse_row(const std::vector<std::string>& tokens,
                              std::size_t expected, const std::string& what) {
    if (tokens.size() != expected)
        throw DomainError(what + ": expected " + std::to_string(expected) +
                          " values, got " + std::to_string(tokens.size()));
    std::vector<double> row;
    for (const auto& t : tokens) {
        try {
            std::size_t used = 0;
            row.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw DomainError(what + ": bad number '" + t + "'");
        }
    }
    return row;
}

} // namespace

HmmModel load_model(const std::string& text) {
    std::istringstream in(text);
    auto expect_kw = [&](const std::string& kw) {
        auto t = next_data_line(in);
        if (t.empty() || t[0] != kw)
            throw DomainError("malformed model file: expected '" + kw + "'");
        return t;
    };
    auto t = expect_kw("states");
    if (t.size() != 2) throw DomainError("malformed 'states' header");
    std::size_t n = std::stoul(t[1]);
    t = expect_kw("symbols");
    if (t.size() != 2) throw DomainError("malformed 'symbols' header");
    std::size_t m = std::stoul(t[1]);

    HmmModel model;
    t = expect_kw("state_names");
    if (t.size() != n + 1)
        throw DomainError("state_names count disagrees with header N");
    model.states.assign(t.begin() + 1, t.end());
    t = expect_kw("symbol_names");
    if (t.size() != m + 1)
        throw DomainError("symbol_names count disagrees with header M");
    model.symbols.assign(t.begin() + 1, t.end());

    expect_kw("T");
    for (std::size_t i = 0; i < n; ++i)
        model.transition.push_back(parse_row(next_data_line(in), n, "T row"));
    expect_kw("E");
    for (std::size_t i = 0; i < n; ++i)
        model.emission.push_back(parse_row(next_data_line(in), m, "E row"));
    expect_kw("Pi");
    model.initial = parse_row(next_data_line(in), n, "Pi");
    model.validate();
    return model;
}

void save_model_file(const HmmModel& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write model file '" + path + "'");
    f << save_model(model);
}

HmmModel load_model_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_model(ss.str());
}

std::string save_corpus(const TrainingCorpus& corpus) {
    std::ostringstream out;
    out << "#states";
    for (const auto& s : corpus.states) out << " " << s;
    out << "\n#symbols";
    for (const auto& s : corpus.symbols) out << " " << s;
    out << "\n";
    for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
        if (i) out << "\n";
        for (auto [s, o] : corpus.sequences[i])
            out << corpus.states[s] << "\t" << corpus.symbols[o] << "\n";
    }
    return out.str();
}

TrainingCorpus load_corpus(const std::string& text) {
    TrainingCorpus corpus;
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<int, int>> current;
    auto name_index = [](std::vector<std::string>& names, const std::string& n,
                         bool allow_new) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        if (!allow_new) throw DomainError("name '" + n + "' not in declared alphabet");
        names.push_back(n);
        return static_cast<int>(names.size() - 1);
    };
    bool states_declared = false, symbols_declared = false;
    while (std::getline(in, line)) {
        if (line.rfind("#states", 0) == 0 || line.rfind("#symbols", 0) == 0) {
            std::istringstream ss(line);
            std::string kw, name;
            ss >> kw;
            auto& names = (kw == "#states") ? corpus.states : corpus.symbols;
            while (ss >> name) names.push_back(name);
            (kw == "#states" ? states_declared : symbols_declared) = true;
            continue;
        }
        if (!line.empty() && line[0] == '#') continue;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            if (!current.empty()) corpus.sequences.push_back(std::move(current));
            current.clear();
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DomainError("corpus line missing tab separator: '" + line + "'");
        std::string state = line.substr(0, tab);
        std::string symbol = line.substr(tab + 1);
        while (!symbol.empty() && (symbol.back() == '\r' || symbol.back() == ' '))
            symbol.pop_back();
        current.emplace_back(name_index(corpus.states, state, !states_declared),
                             name_index(corpus.symbols, symbol, !symbols_declared));
    }
    if (!current.empty()) corpus.sequences.push_back(std::move(current));
    if (corpus.sequences.empty()) throw DomainError("corpus contains no sequences");
    corpus.validate();
    return corpus;
}

void save_corpus_file(const TrainingCorpus& corpus, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write corpus file '" + path + "'");
    f << save_corpus(corpus);
}

TrainingCorpus load_corpus_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open corpus file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_corpus(ss.str());
}

std::string predict_next_state(const HmmModel& model, const std::string& state) {
    int i = model.state_index(state);
    if (i < 0) throw DomainError("unknown state '" + state + "'");
    std::size_t best = 0;
    for (std::size_t j = 1; j < model.states.size(); ++j)
        if (model.transition[i][j] > model.transition[i][best]) best = j;
    return model.states[best];
}

std::string render_decode_table(const HmmModel& model, const DecodedPath& path) {
    std::ostringstream out;
    out << "# step\tobservation\tstate\tlog_delta\tdelta\n";
    char buf[128];
    for (std::size_t t = 0; t < path.states.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu\t%s\t%s\t%.12g\t%.12g\n", t + 1,
                      path.observations[t].c_str(), path.states[t].c_str(),
                      path.log_deltas[t], path.deltas[t]);
        out << buf;
    }
    out << "predicted_next " << predict_next_state(model, path.states.back())
        << "\n";
    return out.str();
}

} // namespace evcsec
