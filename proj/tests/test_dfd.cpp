#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "evcsec/dfd.hpp"
#include "evcsec/errors.hpp"

using namespace evcsec;

TEST_CASE("single process parses to one element") {
    auto model = load_dfd("process P1 \"charger controller\"\n");
    REQUIRE(model.elements.size() == 1);
    CHECK(model.elements[0].id == "P1");
    CHECK(model.elements[0].kind == DfdKind::Process);
    CHECK(model.elements[0].name == "charger controller");
}

TEST_CASE("comments and blank lines are skipped") {
    auto model = load_dfd("# header\n\nprocess P1 \"p\"\n  # trailing\n");
    CHECK(model.elements.size() == 1);
}

TEST_CASE("dangling flow endpoint is rejected") {
    std::string text =
        "process P1 \"p\"\n"
        "data-flow F1 \"link\" P1 EVC9\n";
    CHECK_THROWS_WITH_AS(load_dfd(text), doctest::Contains("EVC9"), DomainError);
}

TEST_CASE("flow endpoints must not be flows") {
    std::string text =
        "process P1 \"p\"\n"
        "process P2 \"q\"\n"
        "data-flow F1 \"a\" P1 P2\n"
        "data-flow F2 \"b\" P1 F1\n";
    CHECK_THROWS_AS(load_dfd(text), DomainError);
}

TEST_CASE("duplicate ids are rejected") {
    std::string text = "process P1 \"p\"\nprocess P1 \"q\"\n";
    CHECK_THROWS_WITH_AS(load_dfd(text), doctest::Contains("P1"), DomainError);
}

TEST_CASE("unknown kind is a parse error with position") {
    try {
        load_dfd("process P1 \"p\"\nwidget W1 \"w\"\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("flow without endpoints is a parse error") {
    CHECK_THROWS_AS(load_dfd("data-flow F1 \"f\"\n"), DomainError);
}

TEST_CASE("EVCS fixture loads with validated flows") {
    auto model = load_dfd_file(std::string(EVCSEC_FIXTURE_DIR) + "/evcs.dfd");
    int flows = 0, others = 0;
    for (const auto& e : model.elements)
        (e.kind == DfdKind::DataFlow ? flows : others)++;
    CHECK(others >= 4);
    CHECK(flows >= 1);
    for (const auto& e : model.elements) {
        if (e.kind != DfdKind::DataFlow) continue;
        CHECK(model.find(e.from) != nullptr);
        CHECK(model.find(e.to) != nullptr);
    }
}

TEST_CASE("stride categories are six distinct tags") {
    const auto& cats = stride_categories();
    REQUIRE(cats.size() == 6);
    std::string tags;
    for (const auto& c : cats) tags += c.tag;
    std::string sorted_tags = tags;
    std::sort(sorted_tags.begin(), sorted_tags.end());
    CHECK(sorted_tags == "DEIRST");
}

TEST_CASE("applicability matrix per element kind") {
    auto as_string = [](DfdKind kind) {
        std::string out;
        for (char c : admissible_categories(kind)) out += c;
        std::sort(out.begin(), out.end());
        return out;
    };
    CHECK(as_string(DfdKind::ExternalEntity) == "RS");
    CHECK(as_string(DfdKind::Process) == "DEIRST");
    CHECK(as_string(DfdKind::DataStore) == "DIRT");
    CHECK(as_string(DfdKind::DataFlow) == "DIT");
}

TEST_CASE("empty model yields empty threat list") {
    DfdModel model;
    CHECK(enumerate_threats(model).empty());
}

TEST_CASE("single external entity yields S and R") {
    auto model = load_dfd("external-entity EV \"vehicle\"\n");
    auto threats = enumerate_threats(model);
    REQUIRE(threats.size() == 2);
    CHECK(threats[0].category == 'R');
    CHECK(threats[1].category == 'S');
    for (const auto& t : threats) CHECK(t.element_id == "EV");
}

TEST_CASE("single process yields all six categories") {
    auto model = load_dfd("process EVC \"charger\"\n");
    auto threats = enumerate_threats(model);
    REQUIRE(threats.size() == 6);
    std::string tags;
    for (const auto& t : threats) tags += t.category;
    CHECK(tags == "DEIRST"); // sorted by category within one element
}

TEST_CASE("threats ordered by element id then category") {
    auto model = load_dfd(
        "process B \"b\"\n"
        "external-entity A \"a\"\n");
    auto threats = enumerate_threats(model);
    REQUIRE(threats.size() == 8);
    CHECK(threats[0].element_id == "A");
    CHECK(threats[1].element_id == "A");
    for (std::size_t i = 2; i < threats.size(); ++i)
        CHECK(threats[i].element_id == "B");
    for (std::size_t i = 1; i < threats.size(); ++i) {
        if (threats[i].element_id != threats[i - 1].element_id) continue;
        CHECK(threats[i - 1].category < threats[i].category);
    }
}

TEST_CASE("enumeration is pure and size matches the matrix") {
    auto model = load_dfd_file(std::string(EVCSEC_FIXTURE_DIR) + "/evcs.dfd");
    auto a = enumerate_threats(model);
    auto b = enumerate_threats(model);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].element_id == b[i].element_id);
        CHECK(a[i].category == b[i].category);
        CHECK(a[i].rationale == b[i].rationale);
    }
    std::size_t expected = 0;
    for (const auto& e : model.elements)
        expected += admissible_categories(e.kind).size();
    CHECK(a.size() == expected);
    for (const auto& t : a) CHECK(model.find(t.element_id) != nullptr);
    for (const auto& t : a) CHECK_FALSE(t.rationale.empty());
}

TEST_CASE("report mentions every element and category") {
    auto model = load_dfd_file(std::string(EVCSEC_FIXTURE_DIR) + "/evcs.dfd");
    auto threats = enumerate_threats(model);
    auto report = render_threat_report(model, threats);
    for (const auto& e : model.elements)
        CHECK(report.find(e.id) != std::string::npos);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(load_dfd_file("/nonexistent/path.dfd"), IoError);
}
