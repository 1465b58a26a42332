#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evcsec/attack_tree.hpp"
#include "evcsec/rng.hpp"

namespace evcsec {

// Generative POMDP interface with enumerable states/actions/observations.
// transitions() exposes the explicit branch distribution so tests can run
// exact finite-horizon value iteration against the same model.
class PomdpModel {
public:
    virtual ~PomdpModel() = default;

    virtual int state_count() const = 0;
    virtual int action_count() const = 0;
    virtual int observation_count() const = 0;
    virtual bool terminal(int state) const = 0;

    struct StepResult {
        int state;
        int observation;
        double reward;
    };
    virtual StepResult step(int state, int action, Rng& rng) const = 0;

    struct Branch {
        int state;
        int observation;
        double reward;
        double prob;
    };
    virtual std::vector<Branch> transitions(int state, int action) const = 0;

    virtual double min_reward() const = 0;
    virtual double max_reward() const = 0;

    // Rollout policy beyond the search tree; default uniform random.
    virtual int rollout_action(Rng& rng) const {
        return static_cast<int>(uniform_index(rng, action_count()));
    }

    // Observation-consistent particle perturbation for reinvigoration.
    virtual int perturb(int state, int observation, Rng& rng) const {
        (void)observation;
        (void)rng;
        return state;
    }
};

// Attacker movement over the attack tree: shared by the POMDP and the
// simulation harness. The attacker keeps its compromised set consistent with
// at least one minimal scenario; with probability p_pred it takes the
// cheapest extension of the cheapest remaining scenario, otherwise a uniform
// other admissible leaf.
class AttackKernel {
public:
    AttackKernel(const AttackDefenseTree& tree, double p_pred);

    const std::vector<std::string>& leaves() const { return leaves_; }
    const std::vector<std::uint32_t>& scenario_masks() const { return masks_; }
    int leaf_index(const std::string& id) const; // -1 if unknown
    double p_pred() const { return p_pred_; }

    bool goal_reached(std::uint32_t compromised) const;
    std::vector<int> admissible_next(std::uint32_t compromised) const;
    int predicted_next(std::uint32_t compromised) const; // -1 if none
    // Leaf choice distribution given the compromised set.
    std::vector<std::pair<int, double>> move_distribution(
        std::uint32_t compromised) const;
    int sample_move(std::uint32_t compromised, Rng& rng) const;

private:
    std::vector<std::string> leaves_;
    std::vector<double> leaf_costs_; // W_ij, 1.0 when unset
    std::vector<std::uint32_t> masks_;
    double p_pred_;
};

struct PomdpParams {
    int d_max = 2;                // max decoys per action
    double p_pred = 0.7;
    double reward_catch = 10.0;
    double reward_goal = -100.0;  // applied when the attacker completes a scenario
    double decoy_cost = 0.1;      // per placed decoy per step
    double discount = 0.95;
    std::size_t state_cap = 200000;
};

// Defender-vs-attacker POMDP over the attack tree. States are (attacker
// position, compromised set) plus absorbing goal/caught; actions are decoy
// placements of size <= d_max; observations are alert categories plus a decoy
// alert and silence.
class AttackerPomdp : public PomdpModel {
public:
    AttackerPomdp(const AttackDefenseTree& tree,
                  const std::map<std::string, std::string>& alert_map,
                  const PomdpParams& params);

    int state_count() const override { return static_cast<int>(states_.size()); }
    int action_count() const override { return static_cast<int>(actions_.size()); }
    int observation_count() const override;
    bool terminal(int state) const override;
    StepResult step(int state, int action, Rng& rng) const override;
    std::vector<Branch> transitions(int state, int action) const override;
    double min_reward() const override;
    double max_reward() const override;
    int rollout_action(Rng&) const override { return 0; } // defender no-op
    int perturb(int state, int observation, Rng& rng) const override;

    const PomdpParams& params() const { return params_; }
    const AttackKernel& kernel() const { return kernel_; }

    int start_state() const { return 0; }
    int goal_state() const { return goal_; }
    int caught_state() const { return caught_; }

    // States with exactly one compromised leaf (the attacker's first move).
    std::vector<int> start_adjacent_states() const;
    // State lookup; -1 when the combination was not enumerated.
    int find_state(const std::string& position_leaf,
                   const std::vector<std::string>& compromised) const;

    std::string describe_state(int state) const;
    std::string describe_action(int action) const;
    std::vector<std::string> action_leaves(int action) const;
    int position_leaf(int state) const; // leaf index, or -1 for start/goal/caught
    const std::vector<std::string>& alert_categories() const { return categories_; }
    int observation_for_category(const std::string& category) const;
    int decoy_observation() const { return static_cast<int>(categories_.size()); }
    int silence_observation() const { return static_cast<int>(categories_.size()) + 1; }

private:
    struct State {
        int pos;                // leaf index, or kStart/kGoal/kCaught
        std::uint32_t comp;
    };
    static constexpr int kStart = -1, kGoal = -2, kCaught = -3;

    int state_id(int pos, std::uint32_t comp) const;
    void enumerate_states();

    AttackKernel kernel_;
    PomdpParams params_;
    std::vector<std::string> categories_;  // alert category names, first-use order
    std::vector<int> leaf_category_;       // leaf index -> category index
    std::vector<State> states_;
    std::map<std::pair<int, std::uint32_t>, int> state_index_;
    std::vector<std::uint32_t> actions_;   // decoy masks; actions_[0] == 0 (no-op)
    int goal_ = -1, caught_ = -1;
};

struct DefenderBelief {
    std::vector<int> particles;                 // state ids, size K
    std::vector<std::pair<int, int>> history;   // (action, observation)
};

// Without a hint: particles uniform over start-adjacent states. With a hint
// (decoded leaf-id path): fraction rho of draws lands on states whose position
// is the hinted current leaf.
DefenderBelief initial_belief(const AttackerPomdp& pomdp, int K,
                              const std::vector<std::string>* hint_path,
                              double rho, std::uint64_t seed);

struct PomcpConfig {
    int budget = 10000;
    double c_ucb = 100.0;
    double discount = 0.95;
    int max_depth = 20;
    std::uint64_t seed = 1;
    bool reinvigorate = true;
};

struct PomcpResult {
    int action = 0;
    double expected_value = 0.0;
    std::vector<int> visit_counts; // per action
};

// Monte-Carlo tree search over histories: UCB1 at visited nodes, rollouts
// beyond the tree, chosen action = most visits (ties to the lowest index,
// which is lexicographic in the canonical action order). Deterministic per
// seed.
PomcpResult pomcp_search(const PomdpModel& pomdp,
                         const std::vector<int>& particles,
                         const PomcpConfig& config);

// Rejection-sample successors consistent with the observation; refill to K by
// reinvigoration. Throws DomainError on belief collapse when reinvigoration
// is disabled.
DefenderBelief update_belief(const PomdpModel& pomdp,
                             const DefenderBelief& belief, int action,
                             int observation, int K, std::uint64_t seed,
                             bool reinvigorate = true);

struct PredictedProbabilityIndex {
    std::string node;
    double p;      // probability estimate (delta of the decoding step)
    int priority;  // rank of p among same-layer nodes, 1 = highest
    int layer;
};

// One index per guarded node; throws DomainError on a missing layer entry.
std::vector<PredictedProbabilityIndex> compute_ppi(
    const std::vector<std::pair<std::string, double>>& node_deltas,
    const std::map<std::string, int>& layers);

// Renders "P^<priority>_<layer> = <p>" with 5 decimals.
std::string render_ppi_entry(const PredictedProbabilityIndex& index);
std::string render_ppi_table(const std::vector<PredictedProbabilityIndex>& indices);

struct DecoyPlan {
    std::vector<std::string> placements;
    double expected_value = 0.0;
    std::vector<std::pair<std::string, int>> visit_counts; // (action, count)
    std::vector<PredictedProbabilityIndex> indices;
};

DecoyPlan plan_decoys(const AttackerPomdp& pomdp, const DefenderBelief& belief,
                      const PomcpConfig& config,
                      const std::vector<PredictedProbabilityIndex>& indices);

std::string render_plan(const DecoyPlan& plan);

} // namespace evcsec
