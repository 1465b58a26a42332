#pragma once

// Test-only oracles and generators shared by the unit and acceptance suites.
// Everything here is implemented independently of the library's algorithms:
// brute-force enumeration for Viterbi, truth tables for cut sets, exhaustive
// subset search for ODS, and exact finite-horizon value iteration for the
// tiny POMDP fixture.

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evcsec/attack_tree.hpp"
#include "evcsec/hmm.hpp"
#include "evcsec/pomdp.hpp"
#include "evcsec/rng.hpp"

namespace testutil {

// ---------------------------------------------------------------- HMM

inline std::vector<double> random_stochastic_row(evcsec::Rng& rng, int n) {
    std::vector<double> row(n);
    double total = 0.0;
    for (auto& v : row) {
        v = evcsec::uniform_real(rng) + 1e-3;
        total += v;
    }
    for (auto& v : row) v /= total;
    // Exact row sum: fold rounding error into the largest entry.
    double sum = 0.0;
    for (double v : row) sum += v;
    auto it = std::max_element(row.begin(), row.end());
    *it += 1.0 - sum;
    return row;
}

inline evcsec::HmmModel random_hmm(evcsec::Rng& rng, int n, int m,
                                   bool sparse = false) {
    evcsec::HmmModel model;
    for (int i = 0; i < n; ++i) model.states.push_back("q" + std::to_string(i));
    for (int k = 0; k < m; ++k) model.symbols.push_back("o" + std::to_string(k));
    for (int i = 0; i < n; ++i) {
        auto row = random_stochastic_row(rng, n);
        if (sparse && n > 1) {
            // Zero one entry to exercise -inf branches, renormalize.
            std::size_t z = evcsec::uniform_index(rng, n);
            double rest = 1.0 - row[z];
            row[z] = 0.0;
            for (auto& v : row) v /= rest;
        }
        model.transition.push_back(row);
    }
    for (int i = 0; i < n; ++i)
        model.emission.push_back(random_stochastic_row(rng, m));
    model.initial = random_stochastic_row(rng, n);
    return model;
}

// Max joint log-likelihood over every state sequence, by full enumeration.
inline double brute_force_best_loglik(const evcsec::HmmModel& model,
                                      const std::vector<std::string>& obs) {
    const int n = static_cast<int>(model.states.size());
    const int len = static_cast<int>(obs.size());
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::string> q(len);
    std::vector<int> idx(len, 0);
    while (true) {
        for (int t = 0; t < len; ++t) q[t] = model.states[idx[t]];
        best = std::max(best, evcsec::sequence_log_likelihood(model, obs, q));
        int t = len - 1;
        while (t >= 0 && ++idx[t] == n) idx[t--] = 0;
        if (t < 0) break;
    }
    return best;
}

// ---------------------------------------------------------------- trees

// True iff the set of succeeding leaves satisfies the node under AND/OR
// semantics; defenses are ignored.
inline bool satisfies(const evcsec::AttackDefenseTree& tree,
                      const std::string& id,
                      const std::set<std::string>& true_leaves) {
    const auto& node = tree.node(id);
    if (node.kind == evcsec::NodeKind::AttackLeaf) return true_leaves.count(id) > 0;
    if (node.kind == evcsec::NodeKind::Defense) return false;
    bool any = false, all = true, have = false;
    for (const auto& child : node.children) {
        if (tree.node(child).kind == evcsec::NodeKind::Defense) continue;
        have = true;
        bool v = satisfies(tree, child, true_leaves);
        any = any || v;
        all = all && v;
    }
    if (!have) return false;
    return node.gate == evcsec::Gate::And ? all : any;
}

// All minimal satisfying leaf sets by truth table (leaf count <= ~20).
inline std::vector<std::set<std::string>> oracle_min_cut_sets(
    const evcsec::AttackDefenseTree& tree) {
    auto leaves = tree.attack_leaf_ids();
    const int n = static_cast<int>(leaves.size());
    std::vector<std::uint32_t> sat;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::set<std::string> on;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) on.insert(leaves[i]);
        if (satisfies(tree, tree.root_id, on)) sat.push_back(mask);
    }
    std::vector<std::set<std::string>> minimal;
    for (auto mask : sat) {
        bool is_min = true;
        for (auto other : sat)
            if (other != mask && (other & mask) == other) { is_min = false; break; }
        if (is_min) {
            std::set<std::string> on;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) on.insert(leaves[i]);
            minimal.push_back(on);
        }
    }
    return minimal;
}

// Random attack tree DSL source: AND/OR goals, <= max_leaves leaves, optional
// shared leaves via ref.
inline std::string random_tree_source(evcsec::Rng& rng, int max_leaves) {
    int leaf_budget = 1 + static_cast<int>(evcsec::uniform_index(rng, max_leaves));
    int leaf_count = 0, goal_count = 0;
    std::vector<std::string> made_leaves;
    std::ostringstream out;
    // Recursive emitter; depth-limited so trees stay small.
    std::function<void(int)> emit = [&](int depth) {
        std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
        bool make_leaf = depth >= 3 || leaf_count >= leaf_budget ||
                         (depth > 0 && evcsec::uniform_index(rng, 3) == 0);
        if (make_leaf) {
            // Reuse a leaf one time in four to exercise shared subtrees.
            if (!made_leaves.empty() && evcsec::uniform_index(rng, 4) == 0) {
                out << indent << "ref "
                    << made_leaves[evcsec::uniform_index(rng, made_leaves.size())]
                    << "\n";
                return;
            }
            std::string id = "l" + std::to_string(leaf_count++);
            made_leaves.push_back(id);
            double v = 0.05 + 0.9 * evcsec::uniform_real(rng);
            out << indent << "leaf " << id << " \"leaf\" v=" << v << "\n";
            return;
        }
        std::string id = "g" + std::to_string(goal_count++);
        const char* gate = evcsec::uniform_index(rng, 2) == 0 ? "AND" : "OR";
        int kids = 2 + static_cast<int>(evcsec::uniform_index(rng, 2));
        out << indent << "goal " << id << " " << gate << " \"goal\" {\n";
        for (int i = 0; i < kids; ++i) emit(depth + 1);
        out << indent << "}\n";
    };
    emit(0);
    return out.str();
}

// Appends random defenses (covering leaves or goals) to a tree's source.
inline std::string add_random_defenses(evcsec::Rng& rng, const std::string& source,
                                       int defense_count) {
    auto tree = evcsec::parse_tree(source);
    std::vector<std::string> targets = tree.attack_leaf_ids();
    for (const auto& node : tree.nodes)
        if (node.kind == evcsec::NodeKind::Goal && node.id != tree.root_id)
            targets.push_back(node.id);
    if (targets.empty()) targets.push_back(tree.root_id);
    // Defenses must sit inside the root block: strip the final "}\n".
    std::string body = source;
    auto brace = body.rfind('}');
    body.erase(brace);
    std::ostringstream out;
    out << body;
    for (int d = 0; d < defense_count; ++d) {
        double cost = 0.5 + 5.0 * evcsec::uniform_real(rng);
        int covers = 1 + static_cast<int>(evcsec::uniform_index(rng, 2));
        std::set<std::string> chosen;
        for (int c = 0; c < covers; ++c)
            chosen.insert(targets[evcsec::uniform_index(rng, targets.size())]);
        out << "  defense d" << d << " \"defense\" c=" << cost << " covers=";
        bool first = true;
        for (const auto& t : chosen) {
            if (!first) out << ",";
            out << t;
            first = false;
        }
        out << "\n";
    }
    out << "}\n";
    return out.str();
}

// Exhaustive defense-subset search with the library's tie-break order:
// objective, then fewer defenses, then lexicographic ids. Returns false when
// no selection is feasible.
inline bool oracle_ods(const evcsec::AttackDefenseTree& tree, double lambda,
                       const evcsec::OdsMode& mode,
                       evcsec::DefenseStrategy& best) {
    auto defenses = tree.defense_ids();
    std::sort(defenses.begin(), defenses.end());
    auto leaves = tree.attack_leaf_ids();
    const int nl = static_cast<int>(leaves.size());
    const int nd = static_cast<int>(defenses.size());
    auto leaf_bit = [&](const std::string& id) {
        for (int i = 0; i < nl; ++i)
            if (leaves[i] == id) return 1u << i;
        return 0u;
    };
    std::vector<std::uint32_t> cover_mask(nd, 0);
    std::vector<double> cost(nd, 0.0);
    for (int d = 0; d < nd; ++d) {
        const auto& node = tree.node(defenses[d]);
        cost[d] = tree.effective_cost(node);
        for (const auto& target : node.covers)
            for (const auto& leaf : tree.leaves_under(target))
                cover_mask[d] |= leaf_bit(leaf);
    }
    std::vector<std::uint32_t> scenario_masks;
    for (const auto& s : evcsec::enumerate_scenarios(tree)) {
        std::uint32_t m = 0;
        for (const auto& leaf : s) m |= leaf_bit(leaf);
        scenario_masks.push_back(m);
    }
    bool found = false;
    for (std::uint64_t subset = 0; subset < (1ull << nd); ++subset) {
        double total = 0.0;
        std::uint32_t covered = 0;
        for (int d = 0; d < nd; ++d)
            if (subset & (1ull << d)) {
                total += cost[d];
                covered |= cover_mask[d];
            }
        if (mode.full_coverage) {
            bool ok = true;
            for (auto m : scenario_masks)
                if ((m & covered) == 0) { ok = false; break; }
            if (!ok) continue;
        } else if (total > mode.budget + 1e-12) {
            continue;
        }
        double vuln = 0.0;
        for (int i = 0; i < nl; ++i)
            if (covered & (1u << i))
                vuln += tree.node(leaves[i]).vulnerability;
        double objective = total - lambda * vuln;
        std::vector<std::string> ids;
        for (int d = 0; d < nd; ++d)
            if (subset & (1ull << d)) ids.push_back(defenses[d]);
        bool take = !found;
        if (found) {
            if (objective < best.objective - 1e-12) take = true;
            else if (std::abs(objective - best.objective) <= 1e-12) {
                if (ids.size() < best.selected_defenses.size()) take = true;
                else if (ids.size() == best.selected_defenses.size() &&
                         ids < best.selected_defenses) take = true;
            }
        }
        if (take) {
            best.selected_defenses = ids;
            best.total_cost = total;
            best.covered_vulnerability = vuln;
            best.objective = objective;
            found = true;
        }
    }
    return found;
}

// ---------------------------------------------------------------- POMDP

// Tiger-style diagnosis POMDP: the intruder is of type A or B (hidden).
// Action 0 probes (cost 1, correct type observed with probability 0.85),
// actions 1/2 commit to a countermeasure for type A/B (+10 right, -20 wrong,
// then terminal). 5 states: A, B, probed-A, probed-B, done.
class TinyPomdp : public evcsec::PomdpModel {
public:
    static constexpr int kA = 0, kB = 1, kAp = 2, kBp = 3, kDone = 4;
    static constexpr int kObsA = 0, kObsB = 1, kObsNone = 2;

    int state_count() const override { return 5; }
    int action_count() const override { return 3; }
    int observation_count() const override { return 3; }
    bool terminal(int state) const override { return state == kDone; }

    std::vector<Branch> transitions(int state, int action) const override {
        if (state == kDone) return {{kDone, kObsNone, 0.0, 1.0}};
        bool is_a = state == kA || state == kAp;
        int next = is_a ? kAp : kBp;
        if (action == 0) {
            int good = is_a ? kObsA : kObsB;
            int bad = is_a ? kObsB : kObsA;
            return {{next, good, -1.0, 0.85}, {next, bad, -1.0, 0.15}};
        }
        bool right = (action == 1) == is_a;
        return {{kDone, kObsNone, right ? 10.0 : -20.0, 1.0}};
    }

    StepResult step(int state, int action, evcsec::Rng& rng) const override {
        auto branches = transitions(state, action);
        double u = evcsec::uniform_real(rng), acc = 0.0;
        for (const auto& b : branches) {
            acc += b.prob;
            if (u <= acc) return {b.state, b.observation, b.reward};
        }
        const auto& last = branches.back();
        return {last.state, last.observation, last.reward};
    }

    double min_reward() const override { return -20.0; }
    double max_reward() const override { return 10.0; }
};

// Exact finite-horizon belief-space value iteration over an explicit-model
// POMDP. Returns the optimal value; best_action receives the root argmax
// (lowest index on ties).
inline double pomdp_vi(const evcsec::PomdpModel& pomdp,
                       const std::vector<double>& belief, int horizon,
                       double discount, int* best_action = nullptr) {
    const int ns = pomdp.state_count();
    if (horizon == 0) {
        if (best_action) *best_action = 0;
        return 0.0;
    }
    double best = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int a = 0; a < pomdp.action_count(); ++a) {
        double immediate = 0.0;
        // next[o] = unnormalized successor belief; weight[o] = P(o | b, a).
        std::vector<std::vector<double>> next(
            pomdp.observation_count(), std::vector<double>(ns, 0.0));
        std::vector<double> weight(pomdp.observation_count(), 0.0);
        for (int s = 0; s < ns; ++s) {
            if (belief[s] <= 0.0 || pomdp.terminal(s)) continue;
            for (const auto& br : pomdp.transitions(s, a)) {
                double p = belief[s] * br.prob;
                immediate += p * br.reward;
                next[br.observation][br.state] += p;
                weight[br.observation] += p;
            }
        }
        double value = immediate;
        for (int o = 0; o < pomdp.observation_count(); ++o) {
            if (weight[o] <= 1e-15) continue;
            for (auto& v : next[o]) v /= weight[o];
            value += discount * weight[o] *
                     pomdp_vi(pomdp, next[o], horizon - 1, discount);
        }
        if (value > best + 1e-12) {
            best = value;
            arg = a;
        }
    }
    if (best_action) *best_action = arg;
    return best;
}

inline std::vector<double> belief_from_particles(const evcsec::PomdpModel& pomdp,
                                                 const std::vector<int>& particles) {
    std::vector<double> b(pomdp.state_count(), 0.0);
    for (int s : particles) b[s] += 1.0 / static_cast<double>(particles.size());
    return b;
}

} // namespace testutil
