#include "evcsec/attack_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "evcsec/errors.hpp"

namespace evcsec {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct Token {
    enum Kind { Word, String, LBrace, RBrace, End } kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_ws();
        if (pos_ >= src_.size()) return {Token::End, "", line_, col_};
        int line = line_, col = col_;
        char c = src_[pos_];
        if (c == '{') { advance(); return {Token::LBrace, "{", line, col}; }
        if (c == '}') { advance(); return {Token::RBrace, "}", line, col}; }
        if (c == '"') {
            advance();
            std::string s;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\n')
                    throw ParseError("unterminated string", line, col);
                s += src_[pos_];
                advance();
            }
            if (pos_ >= src_.size())
                throw ParseError("unterminated string", line, col);
            advance(); // closing quote
            return {Token::String, s, line, col};
        }
        std::string w;
        while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
               src_[pos_] != '{' && src_[pos_] != '}' && src_[pos_] != '#' &&
               src_[pos_] != '"') {
            w += src_[pos_];
            advance();
        }
        return {Token::Word, w, line, col};
    }

private:
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
    void advance() {
        if (src_[pos_] == '\n') { ++line_; col_ = 1; }
        else ++col_;
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) { shift(); }

    AttackDefenseTree parse() {
        AttackDefenseTree tree;
        std::string root = parse_node(tree);
        if (cur_.kind != Token::End)
            throw ParseError("trailing content after root node (single root required)",
                             cur_.line, cur_.col);
        tree.root_id = root;
        if (!tree.nodes.empty()) {
            // Keep the root first in document order.
            auto it = std::find_if(tree.nodes.begin(), tree.nodes.end(),
                                   [&](const TreeNode& n) { return n.id == root; });
            std::rotate(tree.nodes.begin(), it, it + 1);
        }
        tree.validate();
        return tree;
    }

private:
    void shift() { cur_ = lex_.next(); }

    Token expect(Token::Kind kind, const std::string& what) {
        if (cur_.kind != kind)
            throw ParseError("expected " + what + ", got '" + cur_.text + "'",
                             cur_.line, cur_.col);
        Token t = cur_;
        shift();
        return t;
    }

    double parse_number(const std::string& s, const Token& tok) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError("expected a number, got '" + s + "'", tok.line, tok.col);
        }
    }

    // Returns the id of the parsed node (definitions and refs alike).
    std::string parse_node(AttackDefenseTree& tree) {
        Token kw = expect(Token::Word, "node keyword");
        if (kw.text == "ref") {
            Token id = expect(Token::Word, "node id");
            return id.text;
        }
        TreeNode node;
        if (kw.text == "goal") node.kind = NodeKind::Goal;
        else if (kw.text == "leaf") node.kind = NodeKind::AttackLeaf;
        else if (kw.text == "defense") node.kind = NodeKind::Defense;
        else
            throw ParseError("unknown keyword '" + kw.text +
                                 "' (expected goal, leaf, defense or ref)",
                             kw.line, kw.col);
        node.id = expect(Token::Word, "node id").text;
        if (node.kind == NodeKind::Goal) {
            Token gate = expect(Token::Word, "gate (AND or OR)");
            if (gate.text == "AND") node.gate = Gate::And;
            else if (gate.text == "OR") node.gate = Gate::Or;
            else
                throw ParseError("unknown gate '" + gate.text + "'", gate.line,
                                 gate.col);
        }
        node.label = expect(Token::String, "quoted label").text;
        if (node.kind == NodeKind::Goal) {
            expect(Token::LBrace, "'{'");
            while (cur_.kind != Token::RBrace) {
                if (cur_.kind == Token::End)
                    throw ParseError("unexpected end of input inside goal '" +
                                         node.id + "'",
                                     cur_.line, cur_.col);
                node.children.push_back(parse_node(tree));
            }
            shift(); // '}'
        } else {
            parse_attributes(node);
        }
        std::string id = node.id;
        tree.nodes.push_back(std::move(node));
        return id;
    }

    void parse_attributes(TreeNode& node) {
        bool seen_cost = false;
        while (cur_.kind == Token::Word && cur_.text.find('=') != std::string::npos) {
            Token tok = cur_;
            shift();
            auto eq = tok.text.find('=');
            std::string key = tok.text.substr(0, eq);
            std::string value = tok.text.substr(eq + 1);
            if (key == "v" && node.kind == NodeKind::AttackLeaf) {
                node.vulnerability = parse_number(value, tok);
                if (node.vulnerability < 0.0 || node.vulnerability > 1.0)
                    throw ParseError("vulnerability v=" + value +
                                         " out of [0,1] on leaf '" + node.id + "'",
                                     tok.line, tok.col);
            } else if (key == "w") {
                node.weight = parse_number(value, tok);
                node.has_weight = true;
                if (node.weight < 0.0)
                    throw ParseError("negative weight on '" + node.id + "'",
                                     tok.line, tok.col);
            } else if (key == "c" && node.kind == NodeKind::Defense) {
                node.defense_cost = parse_number(value, tok);
                seen_cost = true;
                if (node.defense_cost < 0.0)
                    throw ParseError("negative defense cost on '" + node.id + "'",
                                     tok.line, tok.col);
            } else if (key == "covers" && node.kind == NodeKind::Defense) {
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) node.covers.push_back(item);
            } else {
                throw ParseError("unknown attribute '" + key + "' on " +
                                     (node.kind == NodeKind::Defense ? "defense"
                                      : node.kind == NodeKind::AttackLeaf ? "leaf"
                                                                          : "goal") +
                                     " '" + node.id + "'",
                                 tok.line, tok.col);
            }
        }
        if (node.kind == NodeKind::Defense) {
            if (!seen_cost)
                throw ParseError("defense '" + node.id + "' missing c=<cost>",
                                 cur_.line, cur_.col);
            if (node.covers.empty())
                throw ParseError("defense '" + node.id + "' missing covers=<ids>",
                                 cur_.line, cur_.col);
        }
    }

    Lexer lex_;
    Token cur_{Token::End, "", 0, 0};
};

} // namespace

void AttackDefenseTree::build_index() const {
    index_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) index_[nodes[i].id] = i;
}

const TreeNode& AttackDefenseTree::node(const std::string& id) const {
    if (index_.size() != nodes.size()) build_index();
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("unknown node id '" + id + "'");
    return nodes[it->second];
}

bool AttackDefenseTree::has_node(const std::string& id) const {
    if (index_.size() != nodes.size()) build_index();
    return index_.count(id) > 0;
}

std::vector<std::string> AttackDefenseTree::attack_leaf_ids() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (n.kind == NodeKind::AttackLeaf) out.push_back(n.id);
    return out;
}

std::vector<std::string> AttackDefenseTree::defense_ids() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (n.kind == NodeKind::Defense) out.push_back(n.id);
    return out;
}

std::vector<std::string> AttackDefenseTree::leaves_under(const std::string& id) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const std::string&)> walk = [&](const std::string& nid) {
        if (!seen.insert(nid).second) return;
        const TreeNode& n = node(nid);
        if (n.kind == NodeKind::AttackLeaf) out.push_back(n.id);
        for (const auto& c : n.children) walk(c);
    };
    walk(id);
    std::sort(out.begin(), out.end());
    return out;
}

double AttackDefenseTree::effective_cost(const TreeNode& defense) const {
    return defense.has_weight ? defense.weight * defense.defense_cost
                              : defense.defense_cost;
}

void AttackDefenseTree::validate() const {
    if (nodes.empty()) throw DomainError("empty tree");
    std::set<std::string> ids;
    for (const auto& n : nodes)
        if (!ids.insert(n.id).second)
            throw DomainError("duplicate node id '" + n.id + "'");
    build_index();
    for (const auto& n : nodes) {
        for (const auto& c : n.children)
            if (!has_node(c))
                throw DomainError("node '" + n.id + "' references unknown child '" +
                                  c + "'");
        if (n.kind == NodeKind::Goal) {
            std::size_t operands = 0;
            for (const auto& c : n.children)
                if (node(c).kind != NodeKind::Defense) ++operands;
            if (operands == 0)
                throw DomainError("gate node '" + n.id +
                                  "' has no attack-relevant children");
        }
        if (n.kind == NodeKind::Defense) {
            for (const auto& c : n.covers) {
                if (!has_node(c))
                    throw DomainError("defense '" + n.id +
                                      "' covers unknown node '" + c + "'");
                if (node(c).kind == NodeKind::Defense)
                    throw DomainError("defense '" + n.id +
                                      "' cannot cover another defense '" + c + "'");
            }
        }
    }
    // Cycle check over child edges.
    enum { White, Gray, Black };
    std::unordered_map<std::string, int> color;
    std::function<void(const std::string&)> dfs = [&](const std::string& id) {
        color[id] = Gray;
        for (const auto& c : node(id).children) {
            int col = color.count(c) ? color[c] : White;
            if (col == Gray)
                throw DomainError("cycle detected through node '" + c + "'");
            if (col == White) dfs(c);
        }
        color[id] = Black;
    };
    dfs(root_id);
    // Every defined node must be reachable from the root.
    for (const auto& n : nodes)
        if (!color.count(n.id))
            throw DomainError("node '" + n.id + "' not reachable from root '" +
                              root_id + "'");
}

AttackDefenseTree parse_tree(const std::string& source) {
    Parser p(source);
    return p.parse();
}

AttackDefenseTree parse_tree_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open tree file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_tree(ss.str());
}

namespace {

void serialize_node(const AttackDefenseTree& tree, const std::string& id,
                    std::set<std::string>& emitted, int depth,
                    std::ostringstream& out) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    if (!emitted.insert(id).second) {
        out << indent << "ref " << id << "\n";
        return;
    }
    const TreeNode& n = tree.node(id);
    switch (n.kind) {
    case NodeKind::Goal: {
        out << indent << "goal " << n.id << " "
            << (n.gate == Gate::And ? "AND" : "OR") << " \"" << n.label << "\" {\n";
        for (const auto& c : n.children)
            serialize_node(tree, c, emitted, depth + 1, out);
        out << indent << "}\n";
        break;
    }
    case NodeKind::AttackLeaf: {
        out << indent << "leaf " << n.id << " \"" << n.label << "\" v="
            << format_double(n.vulnerability);
        if (n.has_weight) out << " w=" << format_double(n.weight);
        out << "\n";
        break;
    }
    case NodeKind::Defense: {
        std::vector<std::string> covers = n.covers;
        std::sort(covers.begin(), covers.end());
        out << indent << "defense " << n.id << " \"" << n.label << "\" c="
            << format_double(n.defense_cost) << " covers=";
        for (std::size_t i = 0; i < covers.size(); ++i)
            out << (i ? "," : "") << covers[i];
        if (n.has_weight) out << " w=" << format_double(n.weight);
        out << "\n";
        break;
    }
    }
}

} // namespace

std::string serialize_tree(const AttackDefenseTree& tree) {
    std::ostringstream out;
    std::set<std::string> emitted;
    serialize_node(tree, tree.root_id, emitted, 0, out);
    return out.str();
}

namespace {

using Mask = std::uint64_t;

std::vector<Mask> combine_and(const std::vector<Mask>& a,
                              const std::vector<Mask>& b, std::size_t cap) {
    std::vector<Mask> out;
    std::unordered_set<Mask> seen;
    out.reserve(a.size() * b.size());
    for (Mask x : a)
        for (Mask y : b) {
            Mask m = x | y;
            if (seen.insert(m).second) {
                out.push_back(m);
                if (out.size() > cap)
                    throw DomainError("scenario enumeration exceeded cap of " +
                                      std::to_string(cap));
            }
        }
    return out;
}

} // namespace

std::vector<Scenario> enumerate_scenarios(const AttackDefenseTree& tree,
                                          std::size_t cap) {
    auto leaves = tree.attack_leaf_ids();
    if (leaves.size() > 64)
        throw DomainError("scenario enumeration supports at most 64 attack leaves");
    std::unordered_map<std::string, int> leaf_index;
    for (std::size_t i = 0; i < leaves.size(); ++i)
        leaf_index[leaves[i]] = static_cast<int>(i);

    std::unordered_map<std::string, std::vector<Mask>> memo;
    std::function<const std::vector<Mask>&(const std::string&)> cut_sets =
        [&](const std::string& id) -> const std::vector<Mask>& {
        auto it = memo.find(id);
        if (it != memo.end()) return it->second;
        const TreeNode& n = tree.node(id);
        std::vector<Mask> result;
        if (n.kind == NodeKind::AttackLeaf) {
            result.push_back(Mask(1) << leaf_index[n.id]);
        } else if (n.kind == NodeKind::Goal) {
            std::vector<const std::vector<Mask>*> kids;
            for (const auto& c : n.children)
                if (tree.node(c).kind != NodeKind::Defense)
                    kids.push_back(&cut_sets(c));
            if (n.gate == Gate::Or) {
                std::unordered_set<Mask> seen;
                for (const auto* k : kids)
                    for (Mask m : *k)
                        if (seen.insert(m).second) {
                            result.push_back(m);
                            if (result.size() > cap)
                                throw DomainError(
                                    "scenario enumeration exceeded cap of " +
                                    std::to_string(cap));
                        }
            } else {
                result = {Mask(0)};
                for (const auto* k : kids) result = combine_and(result, *k, cap);
            }
        }
        // Defense nodes contribute no cut sets.
        return memo.emplace(id, std::move(result)).first->second;
    };

    std::vector<Mask> sets = cut_sets(tree.root_id);
    // Minimality: drop any set that strictly contains another.
    std::vector<Mask> minimal;
    for (Mask m : sets) {
        bool keep = true;
        for (Mask other : sets)
            if (other != m && (other & m) == other) { keep = false; break; }
        if (keep) minimal.push_back(m);
    }
    std::vector<Scenario> scenarios;
    scenarios.reserve(minimal.size());
    for (Mask m : minimal) {
        Scenario s;
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (m & (Mask(1) << i)) s.push_back(leaves[i]);
        std::sort(s.begin(), s.end());
        scenarios.push_back(std::move(s));
    }
    std::sort(scenarios.begin(), scenarios.end());
    scenarios.erase(std::unique(scenarios.begin(), scenarios.end()),
                    scenarios.end());
    return scenarios;
}

namespace {

struct OdsCandidate {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<std::string> ids; // sorted
    double cost = 0.0, vuln = 0.0;
    bool valid = false;
};

bool better(const OdsCandidate& a, const OdsCandidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.objective < b.objective - 1e-12) return true;
    if (a.objective > b.objective + 1e-12) return false;
    if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
    return a.ids < b.ids;
}

// Block bitset over scenarios.
struct ScenBits {
    std::vector<std::uint64_t> w;
    explicit ScenBits(std::size_t n = 0) : w((n + 63) / 64, 0) {}
    void set(std::size_t i) { w[i / 64] |= std::uint64_t(1) << (i % 64); }
    ScenBits operator|(const ScenBits& o) const {
        ScenBits r(*this);
        for (std::size_t i = 0; i < w.size(); ++i) r.w[i] |= o.w[i];
        return r;
    }
    bool covers_all(const ScenBits& full) const {
        for (std::size_t i = 0; i < w.size(); ++i)
            if ((w[i] & full.w[i]) != full.w[i]) return false;
        return true;
    }
};

} // namespace

DefenseStrategy compute_ods(const AttackDefenseTree& tree, double lambda,
                            const OdsMode& mode) {
    if (lambda <= 0.0) throw DomainError("tradeoff lambda must be positive");
    auto leaves = tree.attack_leaf_ids();
    DefenseStrategy empty;
    if (leaves.empty()) return empty;

    auto scenarios = enumerate_scenarios(tree);
    std::unordered_map<std::string, int> leaf_index;
    std::vector<double> leaf_vuln(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        leaf_index[leaves[i]] = static_cast<int>(i);
        leaf_vuln[i] = tree.node(leaves[i]).vulnerability;
    }
    std::vector<Mask> scen_masks;
    for (const auto& s : scenarios) {
        Mask m = 0;
        for (const auto& l : s) m |= Mask(1) << leaf_index[l];
        scen_masks.push_back(m);
    }

    struct Def {
        std::string id;
        double cost;
        Mask leaf_mask;
        ScenBits scen;
    };
    std::vector<Def> defs;
    for (const auto& n : tree.nodes) {
        if (n.kind != NodeKind::Defense) continue;
        Def d;
        d.id = n.id;
        d.cost = tree.effective_cost(n);
        d.leaf_mask = 0;
        for (const auto& target : n.covers)
            for (const auto& l : tree.leaves_under(target))
                d.leaf_mask |= Mask(1) << leaf_index[l];
        d.scen = ScenBits(scen_masks.size());
        for (std::size_t i = 0; i < scen_masks.size(); ++i)
            if (d.leaf_mask & scen_masks[i]) d.scen.set(i);
        defs.push_back(std::move(d));
    }
    std::sort(defs.begin(), defs.end(),
              [](const Def& a, const Def& b) { return a.id < b.id; });

    ScenBits full(scen_masks.size());
    for (std::size_t i = 0; i < scen_masks.size(); ++i) full.set(i);

    if (mode.full_coverage) {
        if (defs.empty())
            throw DomainError("no defense nodes present; cannot cover scenarios");
        ScenBits all_cover(scen_masks.size());
        for (const auto& d : defs) all_cover = all_cover | d.scen;
        if (!all_cover.covers_all(full)) {
            std::ostringstream msg;
            msg << "infeasible: scenarios not coverable by any defense:";
            for (std::size_t i = 0; i < scenarios.size(); ++i) {
                bool covered = (all_cover.w[i / 64] >> (i % 64)) & 1;
                if (!covered) {
                    msg << " {";
                    for (std::size_t j = 0; j < scenarios[i].size(); ++j)
                        msg << (j ? "," : "") << scenarios[i][j];
                    msg << "}";
                }
            }
            throw DomainError(msg.str());
        }
    }

    auto vuln_of = [&](Mask m) {
        double v = 0.0;
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (m & (Mask(1) << i)) v += leaf_vuln[i];
        return v;
    };

    // Suffix unions for bounding.
    std::size_t nd = defs.size();
    std::vector<Mask> suffix_leaf(nd + 1, 0);
    std::vector<ScenBits> suffix_scen(nd + 1, ScenBits(scen_masks.size()));
    for (std::size_t i = nd; i-- > 0;) {
        suffix_leaf[i] = suffix_leaf[i + 1] | defs[i].leaf_mask;
        suffix_scen[i] = suffix_scen[i + 1] | defs[i].scen;
    }

    OdsCandidate best;
    std::vector<std::string> chosen;

    // Branch and bound over include/exclude decisions in id order.
    std::function<void(std::size_t, double, Mask, ScenBits)> search =
        [&](std::size_t i, double cost, Mask covered, ScenBits scen) {
            // Optimistic bound: gain all remaining vulnerability for free.
            double bound = cost - lambda * vuln_of(covered | suffix_leaf[i]);
            if (best.valid && bound > best.objective + 1e-9) return;
            if (mode.full_coverage && !(scen | suffix_scen[i]).covers_all(full))
                return;
            if (i == nd) {
                if (mode.full_coverage && !scen.covers_all(full)) return;
                OdsCandidate cand;
                cand.valid = true;
                cand.cost = cost;
                cand.vuln = vuln_of(covered);
                cand.objective = cost - lambda * cand.vuln;
                cand.ids = chosen;
                std::sort(cand.ids.begin(), cand.ids.end());
                if (better(cand, best)) best = cand;
                return;
            }
            // Include defs[i] first (it can only improve coverage).
            double new_cost = cost + defs[i].cost;
            if (mode.full_coverage || new_cost <= mode.budget + 1e-12) {
                chosen.push_back(defs[i].id);
                search(i + 1, new_cost, covered | defs[i].leaf_mask,
                       scen | defs[i].scen);
                chosen.pop_back();
            }
            search(i + 1, cost, covered, scen);
        };
    search(0, 0.0, 0, ScenBits(scen_masks.size()));

    if (!best.valid)
        throw DomainError(mode.full_coverage
                              ? "infeasible: no covering defense selection exists"
                              : "infeasible: no selection within budget");
    DefenseStrategy strategy;
    strategy.selected_defenses = best.ids;
    strategy.total_cost = best.cost;
    strategy.covered_vulnerability = best.vuln;
    strategy.objective = best.objective;
    return strategy;
}

std::string render_scenarios(const std::vector<Scenario>& scenarios) {
    std::ostringstream out;
    out << "# minimal attack scenarios\n";
    out << "count " << scenarios.size() << "\n";
    for (const auto& s : scenarios) {
        for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
        out << "\n";
    }
    return out.str();
}

std::string render_ods(const DefenseStrategy& strategy) {
    std::ostringstream out;
    out << "# optimal defensive strategy\n";
    out << "selected";
    for (const auto& id : strategy.selected_defenses) out << " " << id;
    out << "\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "total_cost %.6f\n", strategy.total_cost);
    out << buf;
    std::snprintf(buf, sizeof(buf), "covered_vulnerability %.6f\n",
                  strategy.covered_vulnerability);
    out << buf;
    std::snprintf(buf, sizeof(buf), "objective %.6f\n", strategy.objective);
    out << buf;
    return out.str();
}

} // namespace evcsec
