#include "evcsec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "evcsec/errors.hpp"

namespace evcsec {

AttackerPolicy AttackerPolicy::scenario_follower(std::size_t index) {
    AttackerPolicy p;
    p.kind = Kind::ScenarioFollower;
    p.scenario_index = index;
    return p;
}

AttackerPolicy AttackerPolicy::randomized(double p_pred) {
    AttackerPolicy p;
    p.kind = Kind::Randomized;
    p.p_pred = p_pred;
    return p;
}

AttackerPolicy AttackerPolicy::scripted(std::vector<std::string> leaves) {
    AttackerPolicy p;
    p.kind = Kind::Scripted;
    p.script = std::move(leaves);
    return p;
}

std::vector<std::string> MonitoringModel::alphabet() const {
    std::vector<std::string> leaves;
    for (const auto& [leaf, cat] : alert_map) leaves.push_back(leaf);
    std::sort(leaves.begin(), leaves.end());
    std::vector<std::string> out;
    for (const auto& leaf : leaves) {
        const std::string& cat = alert_map.at(leaf);
        if (std::find(out.begin(), out.end(), cat) == out.end()) out.push_back(cat);
    }
    if (false_negative_rate > 0.0) out.push_back("none");
    return out;
}

void MonitoringModel::validate(const AttackDefenseTree& tree) const {
    if (false_negative_rate < 0.0 || false_negative_rate > 1.0 ||
        confusion_rate < 0.0 || confusion_rate > 1.0)
        throw DomainError("monitoring noise rates must be in [0,1]");
    for (const auto& leaf : tree.attack_leaf_ids())
        if (!alert_map.count(leaf))
            throw DomainError("attack leaf '" + leaf + "' has no alert mapping");
}

MonitoringModel default_monitoring(const AttackDefenseTree& tree) {
    // Parent map: first node in document order listing the child.
    std::map<std::string, std::string> parent;
    for (const auto& n : tree.nodes)
        for (const auto& c : n.children)
            if (!parent.count(c)) parent[c] = n.id;
    MonitoringModel m;
    for (const auto& leaf : tree.attack_leaf_ids()) {
        // Alert family = nearest OR-gate ancestor; root id as fallback.
        std::string cur = leaf, category = tree.root_id;
        while (parent.count(cur)) {
            cur = parent.at(cur);
            if (tree.node(cur).kind == NodeKind::Goal &&
                tree.node(cur).gate == Gate::Or) {
                category = cur;
                break;
            }
        }
        m.alert_map[leaf] = category;
    }
    return m;
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::GoalReached: return "goal-reached";
    case Outcome::Caught: return "caught";
    case Outcome::Timeout: return "timeout";
    }
    return "?";
}

namespace {

std::string emit_alert(const MonitoringModel& monitoring, const std::string& leaf,
                       Rng& rng) {
    if (monitoring.false_negative_rate > 0.0 &&
        uniform_real(rng) < monitoring.false_negative_rate)
        return "none";
    const std::string& correct = monitoring.alert_map.at(leaf);
    if (monitoring.confusion_rate > 0.0 &&
        uniform_real(rng) < monitoring.confusion_rate) {
        std::vector<std::string> others;
        for (const auto& cat : monitoring.alphabet())
            if (cat != correct && cat != "none") others.push_back(cat);
        if (!others.empty()) return others[uniform_index(rng, others.size())];
    }
    return correct;
}

// Per-episode attacker state machine.
class Attacker {
public:
    Attacker(const AttackDefenseTree& tree, const AttackerPolicy& policy)
        : kernel_(tree, policy.kind == AttackerPolicy::Kind::Randomized
                            ? policy.p_pred
                            : 1.0),
          policy_(policy) {
        if (policy.kind == AttackerPolicy::Kind::ScenarioFollower) {
            auto scenarios = enumerate_scenarios(tree);
            if (policy.scenario_index >= scenarios.size())
                throw DomainError("scenario index out of range");
            scenario_ = scenarios[policy.scenario_index];
        }
        if (policy.kind == AttackerPolicy::Kind::Scripted)
            for (const auto& leaf : policy.script)
                if (kernel_.leaf_index(leaf) < 0)
                    throw DomainError("scripted leaf '" + leaf +
                                      "' is not an attack leaf");
    }

    // Next leaf id, or empty when the attacker has no move left.
    std::string next(Rng& rng) {
        switch (policy_.kind) {
        case AttackerPolicy::Kind::Scripted: {
            if (step_ >= policy_.script.size()) return "";
            return policy_.script[step_++];
        }
        case AttackerPolicy::Kind::ScenarioFollower: {
            // Remaining scenario leaves, cheapest (lexicographic) first.
            for (const auto& leaf : scenario_) {
                int i = kernel_.leaf_index(leaf);
                if (!(compromised_ & (std::uint32_t(1) << i))) return leaf;
            }
            return "";
        }
        case AttackerPolicy::Kind::Randomized: {
            if (kernel_.goal_reached(compromised_)) return "";
            int leaf = kernel_.sample_move(compromised_, rng);
            return leaf < 0 ? "" : kernel_.leaves()[leaf];
        }
        }
        return "";
    }

    void commit(const std::string& leaf) {
        compromised_ |= std::uint32_t(1) << kernel_.leaf_index(leaf);
    }
    bool goal_reached() const { return kernel_.goal_reached(compromised_); }
    const AttackKernel& kernel() const { return kernel_; }

private:
    AttackKernel kernel_;
    AttackerPolicy policy_;
    Scenario scenario_;
    std::uint32_t compromised_ = 0;
    std::size_t step_ = 0;
};

} // namespace

TrainingCorpus generate_corpus(const AttackDefenseTree& tree,
                               const MonitoringModel& monitoring,
                               const AttackerPolicy& policy, int episodes,
                               std::uint64_t seed, int max_ticks) {
    if (episodes < 1) throw DomainError("corpus needs at least one episode");
    monitoring.validate(tree);
    TrainingCorpus corpus;
    corpus.states = tree.attack_leaf_ids();
    corpus.symbols = monitoring.alphabet();
    corpus.provenance.push_back("generated seed=" + std::to_string(seed) +
                                " episodes=" + std::to_string(episodes));
    auto state_idx = [&](const std::string& s) {
        return static_cast<int>(std::find(corpus.states.begin(), corpus.states.end(),
                                          s) -
                                corpus.states.begin());
    };
    auto symbol_idx = [&](const std::string& s) {
        return static_cast<int>(std::find(corpus.symbols.begin(),
                                          corpus.symbols.end(), s) -
                                corpus.symbols.begin());
    };
    for (int ep = 0; ep < episodes; ++ep) {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(ep)));
        Attacker attacker(tree, policy);
        std::vector<std::pair<int, int>> seq;
        for (int tick = 0; tick < max_ticks; ++tick) {
            std::string leaf = attacker.next(rng);
            if (leaf.empty()) break;
            attacker.commit(leaf);
            seq.emplace_back(state_idx(leaf), symbol_idx(emit_alert(monitoring, leaf, rng)));
            if (attacker.goal_reached()) break;
        }
        if (!seq.empty()) corpus.sequences.push_back(std::move(seq));
    }
    if (corpus.sequences.empty())
        throw DomainError("generated corpus is empty");
    return corpus;
}

EpisodeRecord run_episode(const AttackDefenseTree& tree, const SimConfig& config,
                          const HmmModel* model, std::uint64_t seed) {
    config.monitoring.validate(tree);
    EpisodeRecord record;
    Rng rng = make_rng(seed);
    Attacker attacker(tree, config.attacker);

    std::unique_ptr<AttackerPomdp> pomdp;
    DefenderBelief belief;
    int prev_action = 0;
    if (config.planner.mode == PlannerMode::Pomcp) {
        pomdp = std::make_unique<AttackerPomdp>(tree, config.monitoring.alert_map,
                                                config.planner.pomdp);
        // Belief starts before the attacker's first move; each alert then
        // advances it by exactly one step.
        belief.particles.assign(config.planner.particles, pomdp->start_state());
    }
    if (model) {
        // The trained model must speak the monitoring alphabet.
        for (const auto& cat : config.monitoring.alphabet())
            if (model->symbol_index(cat) < 0)
                throw DomainError("model alphabet missing alert category '" +
                                  cat + "'");
    }

    std::vector<std::string> decoys = config.initial_decoys;
    std::vector<std::string> alert_prefix;

    for (int tick = 1; tick <= config.max_ticks; ++tick) {
        std::string leaf = attacker.next(rng);
        if (leaf.empty()) {
            record.end_tick = tick - 1;
            record.outcome = Outcome::Timeout;
            return record;
        }
        record.true_leaves.push_back(leaf);
        if (std::find(decoys.begin(), decoys.end(), leaf) != decoys.end()) {
            record.alerts.push_back("decoy");
            record.decoded.push_back("");
            record.decoy_actions.push_back(decoys);
            record.outcome = Outcome::Caught;
            record.end_tick = tick;
            return record;
        }
        attacker.commit(leaf);
        std::string alert = emit_alert(config.monitoring, leaf, rng);
        record.alerts.push_back(alert);
        alert_prefix.push_back(alert);

        std::string decoded;
        if (model) {
            try {
                decoded = viterbi(*model, alert_prefix).states.back();
            } catch (const DomainError&) {
                decoded.clear(); // no admissible path under this model
            }
        }
        record.decoded.push_back(decoded);

        if (attacker.goal_reached()) {
            record.decoy_actions.push_back(decoys);
            record.outcome = Outcome::GoalReached;
            record.end_tick = tick;
            return record;
        }

        switch (config.planner.mode) {
        case PlannerMode::None:
            break;
        case PlannerMode::Random: {
            auto leaves = tree.attack_leaf_ids();
            decoys.clear();
            int want = std::min<int>(config.planner.pomdp.d_max,
                                     static_cast<int>(leaves.size()));
            while (static_cast<int>(decoys.size()) < want) {
                const std::string& pick = leaves[uniform_index(rng, leaves.size())];
                if (std::find(decoys.begin(), decoys.end(), pick) == decoys.end())
                    decoys.push_back(pick);
            }
            break;
        }
        case PlannerMode::Pomcp: {
            int obs = pomdp->observation_for_category(alert);
            if (obs < 0) obs = pomdp->silence_observation();
            belief = update_belief(*pomdp, belief, prev_action, obs,
                                   config.planner.particles,
                                   derive_seed(seed, 0x1000 + tick), true);
            PomcpConfig search = config.planner.pomcp;
            search.seed = derive_seed(seed, 0x2000 + tick);
            auto result = pomcp_search(*pomdp, belief.particles, search);
            prev_action = result.action;
            decoys = pomdp->action_leaves(result.action);
            break;
        }
        }
        record.decoy_actions.push_back(decoys);
    }
    record.outcome = Outcome::Timeout;
    record.end_tick = config.max_ticks;
    return record;
}

BatchSummary run_batch(const AttackDefenseTree& tree, const SimConfig& config,
                       const HmmModel* model, int episodes) {
    BatchSummary summary;
    summary.episodes = episodes;
    if (episodes == 0) {
        summary.goal_rate = summary.caught_rate = summary.timeout_rate =
            summary.mean_detection_tick = summary.decoder_accuracy =
                std::nan("");
        return summary;
    }
    int goal = 0, caught = 0, timeout = 0;
    long long detect_ticks = 0;
    long long decode_hits = 0, decode_total = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto record = run_episode(tree, config, model,
                                  derive_seed(config.seed,
                                              static_cast<std::uint64_t>(ep)));
        switch (record.outcome) {
        case Outcome::GoalReached: ++goal; break;
        case Outcome::Caught: ++caught; detect_ticks += record.end_tick; break;
        case Outcome::Timeout: ++timeout; break;
        }
        for (std::size_t t = 0; t < record.decoded.size(); ++t) {
            if (record.decoded[t].empty()) continue;
            ++decode_total;
            if (record.decoded[t] == record.true_leaves[t]) ++decode_hits;
        }
    }
    summary.goal_rate = static_cast<double>(goal) / episodes;
    summary.caught_rate = static_cast<double>(caught) / episodes;
    summary.timeout_rate = static_cast<double>(timeout) / episodes;
    summary.mean_detection_tick =
        caught ? static_cast<double>(detect_ticks) / caught : std::nan("");
    summary.decoder_accuracy =
        decode_total ? static_cast<double>(decode_hits) / decode_total
                     : std::nan("");
    return summary;
}

namespace {

std::string rate_or_undefined(double v) {
    if (std::isnan(v)) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string render_batch_report(const BatchSummary& summary) {
    std::ostringstream out;
    out << "# episode batch summary\n";
    out << "episodes " << summary.episodes << "\n";
    out << "goal_rate " << rate_or_undefined(summary.goal_rate) << "\n";
    out << "caught_rate " << rate_or_undefined(summary.caught_rate) << "\n";
    out << "timeout_rate " << rate_or_undefined(summary.timeout_rate) << "\n";
    out << "mean_detection_tick "
        << rate_or_undefined(summary.mean_detection_tick) << "\n";
    out << "decoder_accuracy " << rate_or_undefined(summary.decoder_accuracy)
        << "\n";
    return out.str();
}

std::string render_episode(const EpisodeRecord& record) {
    std::ostringstream out;
    out << "outcome " << to_string(record.outcome) << " end_tick "
        << record.end_tick << "\n";
    for (std::size_t t = 0; t < record.true_leaves.size(); ++t) {
        out << (t + 1) << "\t" << record.true_leaves[t] << "\t"
            << record.alerts[t] << "\t"
            << (record.decoded[t].empty() ? "-" : record.decoded[t]) << "\t";
        if (t < record.decoy_actions.size() && !record.decoy_actions[t].empty()) {
            for (std::size_t i = 0; i < record.decoy_actions[t].size(); ++i)
                out << (i ? "," : "") << record.decoy_actions[t][i];
        } else {
            out << "-";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace evcsec
