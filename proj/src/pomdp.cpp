#include "evcsec/pomdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include "evcsec/errors.hpp"

namespace evcsec {

// ---------------------------------------------------------------------------
// AttackKernel

AttackKernel::AttackKernel(const AttackDefenseTree& tree, double p_pred)
    : p_pred_(p_pred) {
    if (p_pred < 0.0 || p_pred > 1.0)
        throw DomainError("p_pred must be in [0,1]");
    leaves_ = tree.attack_leaf_ids();
    if (leaves_.empty()) throw DomainError("attack tree has no attack leaves");
    if (leaves_.size() > 32)
        throw DomainError("attacker kernel supports at most 32 leaves");
    leaf_costs_.resize(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        const TreeNode& n = tree.node(leaves_[i]);
        leaf_costs_[i] = n.has_weight ? n.weight : 1.0;
    }
    for (const auto& s : enumerate_scenarios(tree)) {
        std::uint32_t m = 0;
        for (const auto& l : s)
            m |= std::uint32_t(1) << leaf_index(l);
        masks_.push_back(m);
    }
}

int AttackKernel::leaf_index(const std::string& id) const {
    for (std::size_t i = 0; i < leaves_.size(); ++i)
        if (leaves_[i] == id) return static_cast<int>(i);
    return -1;
}

bool AttackKernel::goal_reached(std::uint32_t compromised) const {
    for (std::uint32_t m : masks_)
        if ((m & compromised) == m) return true;
    return false;
}

std::vector<int> AttackKernel::admissible_next(std::uint32_t compromised) const {
    std::uint32_t candidates = 0;
    for (std::uint32_t m : masks_)
        if ((compromised & m) == compromised) candidates |= m & ~compromised;
    std::vector<int> out;
    for (std::size_t i = 0; i < leaves_.size(); ++i)
        if (candidates & (std::uint32_t(1) << i)) out.push_back(static_cast<int>(i));
    return out;
}

int AttackKernel::predicted_next(std::uint32_t compromised) const {
    double best_cost = 0.0;
    std::uint32_t best_mask = 0;
    bool found = false;
    for (std::uint32_t m : masks_) {
        if ((compromised & m) != compromised) continue;
        std::uint32_t rem = m & ~compromised;
        if (!rem) continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < leaves_.size(); ++i)
            if (rem & (std::uint32_t(1) << i)) cost += leaf_costs_[i];
        if (!found || cost < best_cost - 1e-12 ||
            (std::abs(cost - best_cost) <= 1e-12 && m < best_mask)) {
            best_cost = cost;
            best_mask = m;
            found = true;
        }
    }
    if (!found) return -1;
    std::uint32_t rem = best_mask & ~compromised;
    int best_leaf = -1;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        if (!(rem & (std::uint32_t(1) << i))) continue;
        if (best_leaf < 0 || leaf_costs_[i] < leaf_costs_[best_leaf] - 1e-12)
            best_leaf = static_cast<int>(i);
    }
    return best_leaf;
}

std::vector<std::pair<int, double>> AttackKernel::move_distribution(
    std::uint32_t compromised) const {
    auto next = admissible_next(compromised);
    std::vector<std::pair<int, double>> dist;
    if (next.empty()) return dist;
    if (next.size() == 1) {
        dist.emplace_back(next[0], 1.0);
        return dist;
    }
    int pred = predicted_next(compromised);
    double other = (1.0 - p_pred_) / static_cast<double>(next.size() - 1);
    for (int leaf : next)
        dist.emplace_back(leaf, leaf == pred ? p_pred_ : other);
    return dist;
}

int AttackKernel::sample_move(std::uint32_t compromised, Rng& rng) const {
    auto dist = move_distribution(compromised);
    if (dist.empty()) return -1;
    double u = uniform_real(rng);
    double acc = 0.0;
    for (auto [leaf, p] : dist) {
        acc += p;
        if (u < acc) return leaf;
    }
    return dist.back().first;
}

// ---------------------------------------------------------------------------
// AttackerPomdp

AttackerPomdp::AttackerPomdp(const AttackDefenseTree& tree,
                             const std::map<std::string, std::string>& alert_map,
                             const PomdpParams& params)
    : kernel_(tree, params.p_pred), params_(params) {
    leaf_category_.resize(kernel_.leaves().size());
    for (std::size_t i = 0; i < kernel_.leaves().size(); ++i) {
        auto it = alert_map.find(kernel_.leaves()[i]);
        if (it == alert_map.end())
            throw DomainError("leaf '" + kernel_.leaves()[i] +
                              "' has no alert category mapping");
        auto pos = std::find(categories_.begin(), categories_.end(), it->second);
        if (pos == categories_.end()) {
            categories_.push_back(it->second);
            leaf_category_[i] = static_cast<int>(categories_.size()) - 1;
        } else {
            leaf_category_[i] = static_cast<int>(pos - categories_.begin());
        }
    }

    enumerate_states();

    // Canonical action order: no-op first, then placements sorted by size and
    // lexicographic leaf ids.
    std::size_t n = kernel_.leaves().size();
    std::vector<std::pair<std::vector<std::string>, std::uint32_t>> combos;
    for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << n); ++mask) {
        if (std::popcount(mask) > params_.d_max) continue;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::uint32_t(1) << i)) ids.push_back(kernel_.leaves()[i]);
        std::sort(ids.begin(), ids.end());
        combos.emplace_back(std::move(ids), mask);
    }
    std::sort(combos.begin(), combos.end(),
              [](const auto& a, const auto& b) {
                  if (a.first.size() != b.first.size())
                      return a.first.size() < b.first.size();
                  return a.first < b.first;
              });
    actions_.push_back(0);
    for (const auto& [ids, mask] : combos) actions_.push_back(mask);
}

void AttackerPomdp::enumerate_states() {
    auto intern = [&](int pos, std::uint32_t comp) {
        auto key = std::make_pair(pos, comp);
        auto it = state_index_.find(key);
        if (it != state_index_.end()) return it->second;
        if (states_.size() >= params_.state_cap)
            throw DomainError("POMDP state cap of " +
                              std::to_string(params_.state_cap) + " exceeded");
        states_.push_back({pos, comp});
        int id = static_cast<int>(states_.size()) - 1;
        state_index_[key] = id;
        return id;
    };
    intern(kStart, 0);
    goal_ = intern(kGoal, 0);
    caught_ = intern(kCaught, 0);
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        State s = states_[id];
        if (s.pos == kGoal || s.pos == kCaught) continue;
        for (int leaf : kernel_.admissible_next(s.comp)) {
            std::uint32_t comp = s.comp | (std::uint32_t(1) << leaf);
            if (kernel_.goal_reached(comp)) continue;
            int before = static_cast<int>(states_.size());
            int next = intern(leaf, comp);
            if (next == before) queue.push_back(next);
        }
    }
}

int AttackerPomdp::observation_count() const {
    return static_cast<int>(categories_.size()) + 2; // + decoy alert + silence
}

bool AttackerPomdp::terminal(int state) const {
    const State& s = states_[state];
    if (s.pos == kGoal || s.pos == kCaught) return true;
    return kernel_.admissible_next(s.comp).empty() && s.pos != kStart;
}

PomdpModel::StepResult AttackerPomdp::step(int state, int action, Rng& rng) const {
    auto branches = transitions(state, action);
    double u = uniform_real(rng);
    double acc = 0.0;
    for (const auto& b : branches) {
        acc += b.prob;
        if (u < acc) return {b.state, b.observation, b.reward};
    }
    const auto& last = branches.back();
    return {last.state, last.observation, last.reward};
}

std::vector<PomdpModel::Branch> AttackerPomdp::transitions(int state,
                                                           int action) const {
    const State& s = states_[state];
    if (terminal(state))
        return {{state, silence_observation(), 0.0, 1.0}};
    std::uint32_t decoys = actions_[action];
    double base = -params_.decoy_cost * std::popcount(decoys);
    std::vector<Branch> out;
    for (auto [leaf, p] : kernel_.move_distribution(s.comp)) {
        if (decoys & (std::uint32_t(1) << leaf)) {
            out.push_back({caught_, decoy_observation(),
                           base + params_.reward_catch, p});
            continue;
        }
        std::uint32_t comp = s.comp | (std::uint32_t(1) << leaf);
        int obs = leaf_category_[leaf];
        if (kernel_.goal_reached(comp)) {
            out.push_back({goal_, obs, base + params_.reward_goal, p});
        } else {
            auto it = state_index_.find({leaf, comp});
            if (it == state_index_.end())
                throw DomainError("internal: unenumerated successor state");
            out.push_back({it->second, obs, base, p});
        }
    }
    return out;
}

double AttackerPomdp::min_reward() const {
    return -params_.decoy_cost * params_.d_max +
           std::min({params_.reward_goal, params_.reward_catch, 0.0});
}

double AttackerPomdp::max_reward() const {
    return std::max({params_.reward_goal, params_.reward_catch, 0.0});
}

int AttackerPomdp::perturb(int state, int observation, Rng& rng) const {
    const State& s = states_[state];
    if (s.pos < 0) return state;
    int category = leaf_category_[s.pos];
    if (observation < static_cast<int>(categories_.size()) &&
        observation != category)
        category = observation; // move toward the observed alert family
    std::vector<int> candidates;
    std::uint32_t without = s.comp & ~(std::uint32_t(1) << s.pos);
    for (std::size_t b = 0; b < kernel_.leaves().size(); ++b) {
        if (static_cast<int>(b) == s.pos) continue;
        if (leaf_category_[b] != category) continue;
        std::uint32_t comp = without | (std::uint32_t(1) << b);
        auto it = state_index_.find({static_cast<int>(b), comp});
        if (it != state_index_.end()) candidates.push_back(it->second);
    }
    if (candidates.empty()) return state;
    return candidates[uniform_index(rng, candidates.size())];
}

std::vector<int> AttackerPomdp::start_adjacent_states() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i].pos >= 0 && std::popcount(states_[i].comp) == 1)
            out.push_back(static_cast<int>(i));
    return out;
}

int AttackerPomdp::find_state(const std::string& position_leaf,
                              const std::vector<std::string>& compromised) const {
    int pos = kernel_.leaf_index(position_leaf);
    if (pos < 0) return -1;
    std::uint32_t comp = 0;
    for (const auto& id : compromised) {
        int i = kernel_.leaf_index(id);
        if (i < 0) return -1;
        comp |= std::uint32_t(1) << i;
    }
    auto it = state_index_.find({pos, comp});
    return it == state_index_.end() ? -1 : it->second;
}

std::string AttackerPomdp::describe_state(int state) const {
    const State& s = states_[state];
    if (s.pos == kStart) return "start";
    if (s.pos == kGoal) return "goal";
    if (s.pos == kCaught) return "caught";
    std::string out = "at " + kernel_.leaves()[s.pos] + " comp={";
    bool first = true;
    for (std::size_t i = 0; i < kernel_.leaves().size(); ++i)
        if (s.comp & (std::uint32_t(1) << i)) {
            if (!first) out += ",";
            out += kernel_.leaves()[i];
            first = false;
        }
    return out + "}";
}

std::string AttackerPomdp::describe_action(int action) const {
    auto leaves = action_leaves(action);
    if (leaves.empty()) return "no-op";
    std::string out = "decoy:";
    for (std::size_t i = 0; i < leaves.size(); ++i)
        out += (i ? "," : "") + leaves[i];
    return out;
}

std::vector<std::string> AttackerPomdp::action_leaves(int action) const {
    std::vector<std::string> out;
    std::uint32_t mask = actions_[action];
    for (std::size_t i = 0; i < kernel_.leaves().size(); ++i)
        if (mask & (std::uint32_t(1) << i)) out.push_back(kernel_.leaves()[i]);
    std::sort(out.begin(), out.end());
    return out;
}

int AttackerPomdp::position_leaf(int state) const {
    int pos = states_[state].pos;
    return pos >= 0 ? pos : -1;
}

int AttackerPomdp::observation_for_category(const std::string& category) const {
    for (std::size_t i = 0; i < categories_.size(); ++i)
        if (categories_[i] == category) return static_cast<int>(i);
    return -1;
}

int AttackerPomdp::state_id(int pos, std::uint32_t comp) const {
    auto it = state_index_.find({pos, comp});
    return it == state_index_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------
// Belief

DefenderBelief initial_belief(const AttackerPomdp& pomdp, int K,
                              const std::vector<std::string>* hint_path,
                              double rho, std::uint64_t seed) {
    if (K < 1) throw DomainError("particle count K must be >= 1");
    auto starts = pomdp.start_adjacent_states();
    if (starts.empty()) throw DomainError("POMDP has no start-adjacent states");

    std::vector<int> hinted;
    if (hint_path && !hint_path->empty()) {
        // Last decoded state that names a tree leaf is the current position.
        int leaf = -1;
        for (auto it = hint_path->rbegin(); it != hint_path->rend(); ++it) {
            leaf = pomdp.kernel().leaf_index(*it);
            if (leaf >= 0) break;
        }
        if (leaf >= 0)
            for (int s = 0; s < pomdp.state_count(); ++s)
                if (pomdp.position_leaf(s) == leaf) hinted.push_back(s);
    }

    DefenderBelief belief;
    Rng rng = make_rng(seed);
    for (int i = 0; i < K; ++i) {
        if (!hinted.empty() && uniform_real(rng) < rho)
            belief.particles.push_back(hinted[uniform_index(rng, hinted.size())]);
        else
            belief.particles.push_back(starts[uniform_index(rng, starts.size())]);
    }
    return belief;
}

// ---------------------------------------------------------------------------
// POMCP

namespace {

struct ObsNode;

struct ActionEdge {
    int n = 0;
    double v = 0.0;
    std::map<int, std::unique_ptr<ObsNode>> children;
};

struct ObsNode {
    int n = 0;
    bool expanded = false;
    std::vector<ActionEdge> actions;
};

double rollout(const PomdpModel& pomdp, int state, int depth,
               const PomcpConfig& cfg, Rng& rng) {
    double total = 0.0, discount = 1.0;
    for (int d = depth; d < cfg.max_depth && !pomdp.terminal(state); ++d) {
        int a = pomdp.rollout_action(rng);
        auto r = pomdp.step(state, a, rng);
        total += discount * r.reward;
        discount *= cfg.discount;
        state = r.state;
    }
    return total;
}

double simulate(const PomdpModel& pomdp, int state, ObsNode* node, int depth,
                const PomcpConfig& cfg, Rng& rng) {
    if (depth >= cfg.max_depth || pomdp.terminal(state)) return 0.0;
    if (!node->expanded) {
        node->expanded = true;
        node->actions.resize(pomdp.action_count());
        return rollout(pomdp, state, depth, cfg, rng);
    }
    // UCB1; untried actions first, in canonical order.
    int chosen = -1;
    double best = 0.0;
    for (std::size_t a = 0; a < node->actions.size(); ++a) {
        const auto& edge = node->actions[a];
        if (edge.n == 0) { chosen = static_cast<int>(a); break; }
        double ucb = edge.v + cfg.c_ucb * std::sqrt(std::log(static_cast<double>(
                                                        node->n)) /
                                                    edge.n);
        if (chosen < 0 || ucb > best) { chosen = static_cast<int>(a); best = ucb; }
    }
    auto r = pomdp.step(state, chosen, rng);
    auto& edge = node->actions[chosen];
    auto& child = edge.children[r.observation];
    if (!child) child = std::make_unique<ObsNode>();
    double ret = r.reward +
                 cfg.discount * simulate(pomdp, r.state, child.get(), depth + 1,
                                         cfg, rng);
    node->n += 1;
    edge.n += 1;
    edge.v += (ret - edge.v) / edge.n;
    return ret;
}

} // namespace

PomcpResult pomcp_search(const PomdpModel& pomdp, const std::vector<int>& particles,
                         const PomcpConfig& config) {
    if (particles.empty()) throw DomainError("belief is empty");
    if (config.budget < 1) throw DomainError("simulation budget must be >= 1");
    Rng rng = make_rng(config.seed);
    ObsNode root;
    root.expanded = true;
    root.actions.resize(pomdp.action_count());
    for (int i = 0; i < config.budget; ++i) {
        int state = particles[uniform_index(rng, particles.size())];
        simulate(pomdp, state, &root, 0, config, rng);
    }
    PomcpResult result;
    result.visit_counts.resize(pomdp.action_count());
    int best = 0;
    for (std::size_t a = 0; a < root.actions.size(); ++a) {
        result.visit_counts[a] = root.actions[a].n;
        if (root.actions[a].n > root.actions[best].n) best = static_cast<int>(a);
    }
    result.action = best;
    result.expected_value = root.actions[best].v;
    return result;
}

DefenderBelief update_belief(const PomdpModel& pomdp, const DefenderBelief& belief,
                             int action, int observation, int K,
                             std::uint64_t seed, bool reinvigorate) {
    if (belief.particles.empty()) throw DomainError("belief is empty");
    if (K < 1) throw DomainError("particle count K must be >= 1");
    Rng rng = make_rng(seed);
    std::vector<int> accepted;
    long long max_tries = static_cast<long long>(K) * 200;
    for (long long t = 0; t < max_tries && static_cast<int>(accepted.size()) < K;
         ++t) {
        int s = belief.particles[uniform_index(rng, belief.particles.size())];
        auto r = pomdp.step(s, action, rng);
        if (r.observation == observation) accepted.push_back(r.state);
    }
    if (accepted.empty()) {
        if (!reinvigorate)
            throw DomainError("belief collapse: observation inconsistent with "
                              "every particle");
        // Degrade to a prior update when nothing matches the observation.
        for (int i = 0; i < K; ++i) {
            int s = belief.particles[uniform_index(rng, belief.particles.size())];
            accepted.push_back(pomdp.step(s, action, rng).state);
        }
    }
    while (static_cast<int>(accepted.size()) < K) {
        int s = accepted[uniform_index(rng, accepted.size())];
        accepted.push_back(pomdp.perturb(s, observation, rng));
    }
    DefenderBelief out;
    out.particles = std::move(accepted);
    out.history = belief.history;
    out.history.emplace_back(action, observation);
    return out;
}

// ---------------------------------------------------------------------------
// Predicted probability index

std::vector<PredictedProbabilityIndex> compute_ppi(
    const std::vector<std::pair<std::string, double>>& node_deltas,
    const std::map<std::string, int>& layers) {
    std::vector<PredictedProbabilityIndex> out;
    for (const auto& [node, p] : node_deltas) {
        auto it = layers.find(node);
        if (it == layers.end())
            throw DomainError("node '" + node + "' has no layer assignment");
        out.push_back({node, p, 0, it->second});
    }
    // Priority = rank of p within each layer, 1 = highest.
    for (auto& idx : out) {
        int rank = 1;
        for (const auto& other : out) {
            if (other.layer != idx.layer) continue;
            if (other.p > idx.p ||
                (other.p == idx.p && other.node < idx.node))
                ++rank;
        }
        idx.priority = rank;
    }
    return out;
}

std::string render_ppi_entry(const PredictedProbabilityIndex& index) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "P^%d_%d = %.5f", index.priority, index.layer,
                  index.p);
    return buf;
}

std::string render_ppi_table(
    const std::vector<PredictedProbabilityIndex>& indices) {
    std::ostringstream out;
    out << "# predicted probability indices\n";
    for (const auto& idx : indices)
        out << idx.node << "\t" << render_ppi_entry(idx) << "\n";
    return out.str();
}

DecoyPlan plan_decoys(const AttackerPomdp& pomdp, const DefenderBelief& belief,
                      const PomcpConfig& config,
                      const std::vector<PredictedProbabilityIndex>& indices) {
    auto result = pomcp_search(pomdp, belief.particles, config);
    DecoyPlan plan;
    plan.placements = pomdp.action_leaves(result.action);
    plan.expected_value = result.expected_value;
    for (std::size_t a = 0; a < result.visit_counts.size(); ++a)
        plan.visit_counts.emplace_back(pomdp.describe_action(static_cast<int>(a)),
                                       result.visit_counts[a]);
    plan.indices = indices;
    return plan;
}

std::string render_plan(const DecoyPlan& plan) {
    std::ostringstream out;
    out << "# decoy plan\n";
    out << "placements";
    if (plan.placements.empty()) out << " none";
    for (const auto& p : plan.placements) out << " " << p;
    out << "\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "expected_value %.6f\n", plan.expected_value);
    out << buf;
    out << "visit_counts\n";
    for (const auto& [action, count] : plan.visit_counts)
        out << "  " << action << "\t" << count << "\n";
    out << render_ppi_table(plan.indices);
    return out.str();
}

} // namespace evcsec
