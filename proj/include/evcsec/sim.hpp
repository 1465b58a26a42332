#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evcsec/attack_tree.hpp"
#include "evcsec/hmm.hpp"
#include "evcsec/pomdp.hpp"

namespace evcsec {

struct AttackerPolicy {
    enum class Kind { ScenarioFollower, Randomized, Scripted };
    Kind kind = Kind::Randomized;
    std::size_t scenario_index = 0;      // ScenarioFollower
    double p_pred = 0.7;                 // Randomized
    std::vector<std::string> script;     // Scripted

    static AttackerPolicy scenario_follower(std::size_t index);
    static AttackerPolicy randomized(double p_pred);
    static AttackerPolicy scripted(std::vector<std::string> leaves);
};

struct MonitoringModel {
    std::map<std::string, std::string> alert_map; // leaf id -> alert category
    double false_negative_rate = 0.0;             // emit "none" instead
    double confusion_rate = 0.0;                  // emit a wrong category

    // Alert categories in first-use order over the map's leaves (sorted by
    // leaf id), plus "none" when false negatives are possible.
    std::vector<std::string> alphabet() const;
    void validate(const AttackDefenseTree& tree) const;
};

// Default map: every attack leaf reports the alert category of its nearest
// L4-style family; falls back to a single category per subtree of the root.
MonitoringModel default_monitoring(const AttackDefenseTree& tree);

enum class Outcome { GoalReached, Caught, Timeout };
const char* to_string(Outcome outcome);

struct EpisodeRecord {
    std::vector<std::string> true_leaves;
    std::vector<std::string> alerts;
    std::vector<std::string> decoded; // decoded current state per tick ("" if n/a)
    std::vector<std::vector<std::string>> decoy_actions; // placements per tick
    Outcome outcome = Outcome::Timeout;
    int end_tick = 0; // 1-based tick at which the episode ended
};

enum class PlannerMode { None, Random, Pomcp };

struct PlannerConfig {
    PlannerMode mode = PlannerMode::Pomcp;
    PomdpParams pomdp;
    PomcpConfig pomcp;
    int particles = 400;
    double hint_weight = 0.8; // rho
};

struct SimConfig {
    AttackerPolicy attacker;
    MonitoringModel monitoring;
    PlannerConfig planner;
    std::vector<std::string> initial_decoys; // active before the first move
    int max_ticks = 50;
    std::uint64_t seed = 1;
};

// Labeled (state, alert) sequences drawn from seeded attacker episodes.
// States are the attacker's leaf ids, symbols the emitted alert categories.
TrainingCorpus generate_corpus(const AttackDefenseTree& tree,
                               const MonitoringModel& monitoring,
                               const AttackerPolicy& policy, int episodes,
                               std::uint64_t seed,
                               int max_ticks = 50);

// One closed-loop episode: attacker moves, monitoring emits, Viterbi decodes
// the alert prefix, the planner places decoys for the next tick.
EpisodeRecord run_episode(const AttackDefenseTree& tree, const SimConfig& config,
                          const HmmModel* model, std::uint64_t seed);

struct BatchSummary {
    int episodes = 0;
    double goal_rate = 0.0;
    double caught_rate = 0.0;
    double timeout_rate = 0.0;
    double mean_detection_tick = 0.0; // mean end tick over caught episodes
    double decoder_accuracy = 0.0;    // top-1 decoded-vs-true per tick
};

BatchSummary run_batch(const AttackDefenseTree& tree, const SimConfig& config,
                       const HmmModel* model, int episodes);

std::string render_batch_report(const BatchSummary& summary);
std::string render_episode(const EpisodeRecord& record);

} // namespace evcsec
