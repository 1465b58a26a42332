#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace evcsec {

enum class NodeKind { Goal, AttackLeaf, Defense };
enum class Gate { And, Or, None };

struct TreeNode {
    std::string id;
    std::string label;
    NodeKind kind = NodeKind::Goal;
    Gate gate = Gate::None;
    std::vector<std::string> children; // goal nodes only, document order
    double weight = 1.0;               // W_ij
    bool has_weight = false;
    double defense_cost = 0.0;         // C_ij, defense only
    double vulnerability = 0.5;        // V_k in [0,1], attack leaves only
    std::vector<std::string> covers;   // defense only: leaf or goal ids
};

class AttackDefenseTree {
public:
    std::vector<TreeNode> nodes; // document order, nodes[0] is the root
    std::string root_id;

    const TreeNode& node(const std::string& id) const;
    bool has_node(const std::string& id) const;

    std::vector<std::string> attack_leaf_ids() const;  // document order
    std::vector<std::string> defense_ids() const;      // document order

    // Attack leaves in the subtree rooted at id (id itself if a leaf).
    std::vector<std::string> leaves_under(const std::string& id) const;

    // Effective cost of a defense: W_ij * C_ij when a weight was given.
    double effective_cost(const TreeNode& defense) const;

    void validate() const; // cycles, dangling refs, ranges, gate arity

private:
    mutable std::unordered_map<std::string, std::size_t> index_;
    void build_index() const;
};

AttackDefenseTree parse_tree(const std::string& source);
AttackDefenseTree parse_tree_file(const std::string& path);

// Canonical form: 2-space indent, sorted attributes; a fixpoint of
// parse-then-serialize.
std::string serialize_tree(const AttackDefenseTree& tree);

// A minimal cut set: sorted leaf ids whose joint success satisfies the root.
using Scenario = std::vector<std::string>;

// All minimal cut sets, sorted lexicographically. Throws DomainError when the
// intermediate set count exceeds `cap`.
std::vector<Scenario> enumerate_scenarios(const AttackDefenseTree& tree,
                                          std::size_t cap = 1000000);

struct OdsMode {
    bool full_coverage = true;
    double budget = 0.0; // used when full_coverage == false
};

struct DefenseStrategy {
    std::vector<std::string> selected_defenses; // sorted ids
    double total_cost = 0.0;             // sum of effective costs
    double covered_vulnerability = 0.0;  // sum V_k over covered leaves
    double objective = 0.0;              // total_cost - lambda * covered_vuln
};

// Optimal defensive strategy: minimize sum(C) - lambda * sum(V over covered
// leaves). Full-coverage mode requires every scenario to contain a covered
// leaf; budget mode instead enforces total_cost <= budget. Ties broken by
// fewer defenses, then lexicographic ids. Throws DomainError when no covering
// selection exists.
DefenseStrategy compute_ods(const AttackDefenseTree& tree, double lambda,
                            const OdsMode& mode);

std::string render_scenarios(const std::vector<Scenario>& scenarios);
std::string render_ods(const DefenseStrategy& strategy);

} // namespace evcsec
