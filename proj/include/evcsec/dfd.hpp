#pragma once

#include <string>
#include <vector>

namespace evcsec {

enum class DfdKind { ExternalEntity, Process, DataStore, DataFlow };

const char* to_string(DfdKind kind);
DfdKind dfd_kind_from_string(const std::string& s); // throws DomainError

struct DfdElement {
    std::string id;
    DfdKind kind = DfdKind::Process;
    std::string name;
    std::string from; // data-flow only
    std::string to;   // data-flow only
};

struct DfdModel {
    std::vector<DfdElement> elements;

    const DfdElement* find(const std::string& id) const;
    void validate() const; // duplicate ids, dangling flow endpoints
};

// STRIDE categories. Exactly six, distinct single-letter tags.
struct ThreatCategory {
    char tag;
    std::string description;
};

const std::vector<ThreatCategory>& stride_categories();

struct Threat {
    std::string element_id;
    char category;
    std::string rationale;
};

// Parses the DFD file format: one element per line,
//   kind id "name" [from to]
// with '#' comments. Throws ParseError / DomainError.
DfdModel load_dfd(const std::string& text);
DfdModel load_dfd_file(const std::string& path);

// STRIDE-per-element applicability. external-entity: S,R; process: all six;
// data-store: T,R,I,D; data-flow: T,I,D.
std::vector<char> admissible_categories(DfdKind kind);

// Deterministic: ordered by (element id, category tag).
std::vector<Threat> enumerate_threats(const DfdModel& model);

std::string render_threat_report(const DfdModel& model,
                                 const std::vector<Threat>& threats);

} // namespace evcsec
