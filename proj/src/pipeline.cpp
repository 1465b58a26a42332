#include "evcsec/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "evcsec/attack_tree.hpp"
#include "evcsec/dfd.hpp"
#include "evcsec/errors.hpp"
#include "evcsec/hmm.hpp"
#include "evcsec/pomdp.hpp"
#include "evcsec/sim.hpp"

namespace evcsec {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DomainError("bad numeric value '" + value + "' for key '" + key + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DomainError("bad integer value '" + value + "' for key '" + key + "'");
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

} // namespace

void apply_option(Options& o, const std::string& key, const std::string& value) {
    if (key == "seed") o.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "kappa") o.kappa = parse_double(key, value);
    else if (key == "lambda") o.lambda = parse_double(key, value);
    else if (key == "ods_mode") {
        if (value == "full-coverage") o.ods_budget_mode = false;
        else if (value == "budget") o.ods_budget_mode = true;
        else throw DomainError("ods_mode must be 'full-coverage' or 'budget'");
    }
    else if (key == "ods_budget") o.ods_budget = parse_double(key, value);
    else if (key == "gamma") o.gamma = parse_double(key, value);
    else if (key == "c_ucb") o.c_ucb = parse_double(key, value);
    else if (key == "particles") o.particles = static_cast<int>(parse_int(key, value));
    else if (key == "budget") o.budget = static_cast<int>(parse_int(key, value));
    else if (key == "p_pred") o.p_pred = parse_double(key, value);
    else if (key == "fn_rate") o.fn_rate = parse_double(key, value);
    else if (key == "confusion_rate") o.confusion_rate = parse_double(key, value);
    else if (key == "d_max") o.d_max = static_cast<int>(parse_int(key, value));
    else if (key == "corpus_episodes")
        o.corpus_episodes = static_cast<int>(parse_int(key, value));
    else if (key == "sim_episodes")
        o.sim_episodes = static_cast<int>(parse_int(key, value));
    else if (key == "max_ticks") o.max_ticks = static_cast<int>(parse_int(key, value));
    else if (key == "reward_catch") o.reward_catch = parse_double(key, value);
    else if (key == "reward_goal") o.reward_goal = parse_double(key, value);
    else if (key == "decoy_cost") o.decoy_cost = parse_double(key, value);
    else if (key == "hint_weight") o.hint_weight = parse_double(key, value);
    else if (key == "dfd") o.dfd_path = value;
    else if (key == "tree") o.tree_path = value;
    else if (key == "alerts") o.alerts_path = value;
    else if (key == "out") o.out_dir = value;
    else throw DomainError("unknown configuration key '" + key + "'");
}

Options load_options_file(const std::string& path, Options base) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        apply_option(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

std::vector<std::string> load_alerts_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open alert log '" + path + "'");
    std::vector<std::string> alerts;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DomainError("alert log line " + std::to_string(lineno) +
                              ": expected tick<TAB>alert-category");
        alerts.push_back(line.substr(tab + 1));
    }
    if (alerts.empty()) throw DomainError("alert log '" + path + "' is empty");
    return alerts;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << content;
}

std::string run_threats(const std::string& dfd_path) {
    auto model = load_dfd_file(dfd_path);
    return render_threat_report(model, enumerate_threats(model));
}

std::string run_scenarios(const std::string& tree_path) {
    auto tree = parse_tree_file(tree_path);
    return render_scenarios(enumerate_scenarios(tree));
}

std::string run_ods(const std::string& tree_path, const Options& options) {
    auto tree = parse_tree_file(tree_path);
    OdsMode mode;
    mode.full_coverage = !options.ods_budget_mode;
    mode.budget = options.ods_budget;
    return render_ods(compute_ods(tree, options.lambda, mode));
}

namespace {

MonitoringModel monitoring_for(const AttackDefenseTree& tree,
                               const Options& options) {
    MonitoringModel m = default_monitoring(tree);
    m.false_negative_rate = options.fn_rate;
    m.confusion_rate = options.confusion_rate;
    return m;
}

} // namespace

void run_gen_corpus(const std::string& tree_path, const Options& options,
                    const std::string& out_path) {
    auto tree = parse_tree_file(tree_path);
    auto corpus = generate_corpus(tree, monitoring_for(tree, options),
                                  AttackerPolicy::randomized(options.p_pred),
                                  options.corpus_episodes, options.seed,
                                  options.max_ticks);
    save_corpus_file(corpus, out_path);
}

void run_train(const std::string& corpus_path, const Options& options,
               const std::string& model_out_path) {
    auto corpus = load_corpus_file(corpus_path);
    auto model = train(count_corpus(corpus), options.kappa);
    save_model_file(model, model_out_path);
}

std::string run_decode(const std::string& model_path,
                       const std::string& alerts_path) {
    auto model = load_model_file(model_path);
    auto alerts = load_alerts_file(alerts_path);
    return render_decode_table(model, viterbi(model, alerts));
}

namespace {

std::string plan_report(const AttackDefenseTree& tree, const HmmModel& model,
                        const std::vector<std::string>& alerts,
                        const Options& options) {
    auto decoded = viterbi(model, alerts);

    PomdpParams params;
    params.d_max = options.d_max;
    params.p_pred = options.p_pred;
    params.reward_catch = options.reward_catch;
    params.reward_goal = options.reward_goal;
    params.decoy_cost = options.decoy_cost;
    params.discount = options.gamma;
    AttackerPomdp pomdp(tree, monitoring_for(tree, options).alert_map, params);

    auto belief = initial_belief(pomdp, options.particles, &decoded.states,
                                 options.hint_weight, derive_seed(options.seed, 1));

    // One index per decoding step: layer = step, priority ranked within layer.
    std::vector<std::pair<std::string, double>> node_deltas;
    std::map<std::string, int> layers;
    for (std::size_t t = 0; t < decoded.states.size(); ++t) {
        // A state can repeat across steps; keep the first occurrence.
        if (layers.count(decoded.states[t])) continue;
        node_deltas.emplace_back(decoded.states[t], decoded.deltas[t]);
        layers[decoded.states[t]] = static_cast<int>(t) + 1;
    }
    auto indices = compute_ppi(node_deltas, layers);

    PomcpConfig config;
    config.budget = options.budget;
    config.c_ucb = options.c_ucb;
    config.discount = options.gamma;
    config.seed = derive_seed(options.seed, 2);
    auto plan = plan_decoys(pomdp, belief, config, indices);
    return render_plan(plan);
}

} // namespace

std::string run_plan(const std::string& tree_path, const std::string& model_path,
                     const std::string& alerts_path, const Options& options) {
    auto tree = parse_tree_file(tree_path);
    auto model = load_model_file(model_path);
    auto alerts = load_alerts_file(alerts_path);
    return plan_report(tree, model, alerts, options);
}

namespace {

SimConfig sim_config_for(const AttackDefenseTree& tree, const Options& options,
                         PlannerMode mode) {
    SimConfig cfg;
    cfg.attacker = AttackerPolicy::randomized(options.p_pred);
    cfg.monitoring = monitoring_for(tree, options);
    cfg.planner.mode = mode;
    cfg.planner.pomdp.d_max = options.d_max;
    cfg.planner.pomdp.p_pred = options.p_pred;
    cfg.planner.pomdp.reward_catch = options.reward_catch;
    cfg.planner.pomdp.reward_goal = options.reward_goal;
    cfg.planner.pomdp.decoy_cost = options.decoy_cost;
    cfg.planner.pomdp.discount = options.gamma;
    cfg.planner.pomcp.budget = options.budget;
    cfg.planner.pomcp.c_ucb = options.c_ucb;
    cfg.planner.pomcp.discount = options.gamma;
    cfg.planner.particles = options.particles;
    cfg.planner.hint_weight = options.hint_weight;
    cfg.max_ticks = options.max_ticks;
    cfg.seed = options.seed;
    return cfg;
}

} // namespace

std::string run_simulate(const std::string& tree_path,
                         const std::string& model_path, const Options& options) {
    auto tree = parse_tree_file(tree_path);
    HmmModel model;
    const HmmModel* model_ptr = nullptr;
    if (!model_path.empty()) {
        model = load_model_file(model_path);
        model_ptr = &model;
    }
    auto cfg = sim_config_for(tree, options, PlannerMode::Pomcp);
    return render_batch_report(run_batch(tree, cfg, model_ptr,
                                         options.sim_episodes));
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw IoError(std::string("stage ") + name + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(std::string("stage ") + name + ": " + e.what());
    }
}

} // namespace

void run_pipeline(const Options& options, const std::string& out_dir) {
    if (options.dfd_path.empty() || options.tree_path.empty())
        throw DomainError("pipeline config requires 'dfd' and 'tree' paths");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
    auto out = [&](const std::string& name) { return out_dir + "/" + name; };

    // Step 1: threat enumeration.
    stage("threats", [&] {
        write_text_file(out("threats.txt"), run_threats(options.dfd_path));
        return 0;
    });

    // Step 2: attack tree, scenarios, optimal defensive strategy.
    AttackDefenseTree tree = stage("tree", [&] {
        auto t = parse_tree_file(options.tree_path);
        write_text_file(out("scenarios.txt"),
                        render_scenarios(enumerate_scenarios(t)));
        OdsMode mode;
        mode.full_coverage = !options.ods_budget_mode;
        mode.budget = options.ods_budget;
        write_text_file(out("ods.txt"),
                        render_ods(compute_ods(t, options.lambda, mode)));
        return t;
    });

    // Step 3: supervised training and decoding.
    HmmModel model = stage("train", [&] {
        auto corpus = generate_corpus(tree, monitoring_for(tree, options),
                                      AttackerPolicy::randomized(options.p_pred),
                                      options.corpus_episodes, options.seed,
                                      options.max_ticks);
        auto m = train(count_corpus(corpus), options.kappa);
        write_text_file(out("model.hmm"), save_model(m));
        return m;
    });

    std::vector<std::string> alerts = stage("decode", [&] {
        std::vector<std::string> a;
        if (!options.alerts_path.empty()) {
            a = load_alerts_file(options.alerts_path);
        } else {
            // Deterministic demo stream: one seeded attacker episode.
            SimConfig cfg = sim_config_for(tree, options, PlannerMode::None);
            auto record = run_episode(tree, cfg, nullptr,
                                      derive_seed(options.seed, 3));
            a = record.alerts;
        }
        write_text_file(out("decode.txt"),
                        render_decode_table(model, viterbi(model, a)));
        return a;
    });

    // Step 4: decoy planning and closed-loop simulation.
    stage("plan", [&] {
        write_text_file(out("plan.txt"), plan_report(tree, model, alerts, options));
        return 0;
    });

    stage("simulate", [&] {
        auto cfg = sim_config_for(tree, options, PlannerMode::Pomcp);
        write_text_file(out("episodes.txt"),
                        render_batch_report(
                            run_batch(tree, cfg, &model, options.sim_episodes)));
        return 0;
    });
}

} // namespace evcsec
