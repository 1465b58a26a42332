#include "evcsec/dfd.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "evcsec/errors.hpp"

namespace evcsec {

const char* to_string(DfdKind kind) {
    switch (kind) {
    case DfdKind::ExternalEntity: return "external-entity";
    case DfdKind::Process: return "process";
    case DfdKind::DataStore: return "data-store";
    case DfdKind::DataFlow: return "data-flow";
    }
    return "?";
}

DfdKind dfd_kind_from_string(const std::string& s) {
    if (s == "external-entity") return DfdKind::ExternalEntity;
    if (s == "process") return DfdKind::Process;
    if (s == "data-store") return DfdKind::DataStore;
    if (s == "data-flow") return DfdKind::DataFlow;
    throw DomainError("unknown DFD element kind '" + s + "'");
}

const DfdElement* DfdModel::find(const std::string& id) const {
    for (const auto& e : elements)
        if (e.id == id) return &e;
    return nullptr;
}

void DfdModel::validate() const {
    std::set<std::string> seen;
    for (const auto& e : elements) {
        if (!seen.insert(e.id).second)
            throw DomainError("duplicate DFD element id '" + e.id + "'");
    }
    for (const auto& e : elements) {
        if (e.kind != DfdKind::DataFlow) continue;
        for (const std::string* ep : {&e.from, &e.to}) {
            const DfdElement* target = find(*ep);
            if (!target)
                throw DomainError("data-flow '" + e.id +
                                  "' references missing element '" + *ep + "'");
            if (target->kind == DfdKind::DataFlow)
                throw DomainError("data-flow '" + e.id +
                                  "' endpoint '" + *ep + "' is itself a flow");
        }
    }
}

const std::vector<ThreatCategory>& stride_categories() {
    static const std::vector<ThreatCategory> cats = {
        {'S', "Spoofing"},
        {'T', "Tampering"},
        {'R', "Repudiation"},
        {'I', "Information disclosure"},
        {'D', "Denial of service"},
        {'E', "Elevation of privilege"},
    };
    return cats;
}

namespace {

// Splits one record line into tokens; names may be double-quoted.
std::vector<std::string> tokenize_line(const std::string& line, int lineno) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == ' ' || line[i] == '\t') { ++i; continue; }
        if (line[i] == '#') break;
        if (line[i] == '"') {
            std::size_t j = line.find('"', i + 1);
            if (j == std::string::npos)
                throw ParseError("unterminated quote", lineno,
                                 static_cast<int>(i) + 1);
            out.push_back(line.substr(i + 1, j - i - 1));
            i = j + 1;
        } else {
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
                   line[j] != '#')
                ++j;
            out.push_back(line.substr(i, j - i));
            i = j;
        }
    }
    return out;
}

} // namespace

DfdModel load_dfd(const std::string& text) {
    DfdModel model;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tokens = tokenize_line(line, lineno);
        if (tokens.empty()) continue;
        DfdElement e;
        try {
            e.kind = dfd_kind_from_string(tokens[0]);
        } catch (const DomainError& ex) {
            throw ParseError(ex.what(), lineno, 1);
        }
        bool is_flow = e.kind == DfdKind::DataFlow;
        std::size_t expected = is_flow ? 5u : 3u;
        if (tokens.size() != expected)
            throw ParseError("expected '" + std::string(tokens[0]) +
                                 " <id> <name>" +
                                 (is_flow ? " <from> <to>'" : "'") +
                                 ", got " + std::to_string(tokens.size()) +
                                 " fields",
                             lineno, 1);
        e.id = tokens[1];
        e.name = tokens[2];
        if (is_flow) {
            e.from = tokens[3];
            e.to = tokens[4];
        }
        model.elements.push_back(std::move(e));
    }
    model.validate();
    return model;
}

DfdModel load_dfd_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open DFD file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_dfd(ss.str());
}

std::vector<char> admissible_categories(DfdKind kind) {
    switch (kind) {
    case DfdKind::ExternalEntity: return {'S', 'R'};
    case DfdKind::Process: return {'S', 'T', 'R', 'I', 'D', 'E'};
    case DfdKind::DataStore: return {'T', 'R', 'I', 'D'};
    case DfdKind::DataFlow: return {'T', 'I', 'D'};
    }
    return {};
}

namespace {

// Rationale templates keyed by (kind, category).
std::string rationale_for(DfdKind kind, char cat, const std::string& name) {
    switch (cat) {
    case 'S':
        if (kind == DfdKind::ExternalEntity)
            return "an adversary may impersonate " + name +
                   " to issue unauthorized command sequences";
        return name + " may accept requests from a fabricated identity";
    case 'T':
        if (kind == DfdKind::DataFlow)
            return "messages on " + name +
                   " may be distorted in transit (charging requests, IDs)";
        if (kind == DfdKind::DataStore)
            return "records held by " + name + " may be forged or corrupted";
        return name + " may process injected erroneous charging data";
    case 'R':
        return name + " may deny having performed a charging transaction, "
                      "causing financial loss";
    case 'I':
        if (kind == DfdKind::DataFlow)
            return "traffic on " + name +
                   " may be intercepted, leaking security-sensitive data";
        return "sensitive data held by " + name + " may be disclosed";
    case 'D':
        if (kind == DfdKind::DataFlow)
            return "flooding of the bus network with malicious traffic over " +
                   name;
        return name + " may be made unavailable to legitimate users";
    case 'E':
        return "a threat agent may gain elevated privileges on " + name +
               " and modify system files or configurations";
    }
    return "";
}

} // namespace

std::vector<Threat> enumerate_threats(const DfdModel& model) {
    std::vector<Threat> threats;
    std::vector<const DfdElement*> order;
    order.reserve(model.elements.size());
    for (const auto& e : model.elements) order.push_back(&e);
    std::sort(order.begin(), order.end(),
              [](const DfdElement* a, const DfdElement* b) { return a->id < b->id; });
    for (const DfdElement* e : order) {
        for (char cat : admissible_categories(e->kind))
            threats.push_back({e->id, cat, rationale_for(e->kind, cat, e->name)});
        // admissible_categories returns tags in S,T,R,I,D,E order; sort per
        // element by tag for the (id, tag) contract.
        auto begin = threats.end() - static_cast<long>(
                         admissible_categories(e->kind).size());
        std::sort(begin, threats.end(),
                  [](const Threat& a, const Threat& b) {
                      return a.category < b.category;
                  });
    }
    return threats;
}

std::string render_threat_report(const DfdModel& model,
                                 const std::vector<Threat>& threats) {
    std::ostringstream out;
    out << "# STRIDE threat enumeration\n";
    out << "elements " << model.elements.size() << "\n";
    out << "threats " << threats.size() << "\n";
    for (const auto& t : threats)
        out << t.element_id << "\t" << t.category << "\t" << t.rationale << "\n";
    return out.str();
}

} // namespace evcsec
