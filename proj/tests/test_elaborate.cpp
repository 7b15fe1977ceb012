#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <string>

#include "doctest.h"
#include "generators.hpp"
#include "vwsim/elaborate.hpp"
#include "vwsim/native.hpp"

using namespace vwsim;

namespace {

Netlist parse_ok(const std::string& text) {
    Diagnostics diags;
    Netlist nl = parse_native(text, diags);
    for (const auto& d : diags) INFO(format_diagnostic(d));
    REQUIRE(!has_errors(diags));
    return nl;
}

std::vector<std::string> module_names(const Netlist& nl) {
    std::vector<std::string> out;
    for (const auto& m : nl.modules) out.push_back(m.name);
    return out;
}

std::vector<std::string> occurrence_names(const FlatCircuit& fc) {
    std::vector<std::string> out;
    for (const auto& o : fc.occurrences) out.push_back(o.name);
    return out;
}

}  // namespace

TEST_CASE("modules sort so referents precede referrers") {
    Netlist nl = parse_ok(
        "((a nil ((xb b (n1))))"
        " (b (in) ((xc c (in))))"
        " (c (in) ((r1 r (in gnd) (i-r1) ('1)))))");
    Diagnostics diags;
    Netlist sorted = sort_modules(nl, diags);
    CHECK(!has_errors(diags));
    CHECK(module_names(sorted) == std::vector<std::string>{"c", "b", "a"});
}

TEST_CASE("an already flat netlist keeps its order") {
    Netlist nl = parse_ok(test::kRcNative);
    Diagnostics diags;
    Netlist sorted = sort_modules(nl, diags);
    CHECK(!has_errors(diags));
    CHECK(module_names(sorted) == std::vector<std::string>{"rc-module"});
}

TEST_CASE("module cycles are reported") {
    Netlist self = parse_ok("((a nil ((xa a ()))))");
    Diagnostics diags;
    sort_modules(self, diags);
    CHECK(has_errors(diags));

    Netlist pair = parse_ok("((a nil ((xb b ()))) (b nil ((xa a ()))))");
    Diagnostics d2;
    sort_modules(pair, d2);
    REQUIRE(has_errors(d2));
    CHECK(d2[0].message.find("cycle") != std::string::npos);
}

TEST_CASE("flattening prefixes inner names with the instance path") {
    Netlist nl = parse_ok(
        "((top nil ((x1 sub (a)) (r0 r (a gnd) (i-r0) ('1))))"
        " (sub (in) ((r1 r (in n) (i-r1) ('1)) (c1 c (n gnd) (i-c1) ('1)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(sort_modules(nl, diags), "top", '|', {}, diags);
    REQUIRE(!has_errors(diags));

    auto names = occurrence_names(fc);
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"r0", "x1|c1", "x1|r1"});

    // The external lands on the caller's node; the internal node is prefixed;
    // ground passes through untouched.
    const Occurrence* r1 = nullptr;
    for (const auto& o : fc.occurrences)
        if (o.name == "x1|r1") r1 = &o;
    REQUIRE(r1 != nullptr);
    CHECK(r1->nodes == std::vector<std::string>{"a", "x1|n"});
    CHECK(r1->branches == std::vector<std::string>{"x1|i-r1"});
    CHECK(fc.nodes.count("x1|n") == 1);
    CHECK(fc.nodes.count("gnd") == 1);
    CHECK(fc.nodes.count("n") == 0);
}

TEST_CASE("the flat RC netlist flattens to itself") {
    Netlist nl = parse_ok(test::kRcNative);
    Diagnostics diags;
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    REQUIRE(!has_errors(diags));
    CHECK(occurrence_names(fc) == std::vector<std::string>{"v1", "r1", "c1"});
    CHECK(fc.nodes == std::set<std::string>{"gnd", "vc1", "vs1"});
}

TEST_CASE("two instances of one module get disjoint names") {
    Netlist nl = parse_ok(
        "((top nil ((x1 sub (a)) (x2 sub (a))))"
        " (sub (in) ((r1 r (in m) (i-r1) ('1)) (c1 c (m gnd) (i-c1) ('1)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(sort_modules(nl, diags), "top", '|', {}, diags);
    REQUIRE(!has_errors(diags));
    auto names = occurrence_names(fc);
    std::sort(names.begin(), names.end());
    CHECK(names ==
          std::vector<std::string>{"x1|c1", "x1|r1", "x2|c1", "x2|r1"});
    CHECK(fc.nodes.count("x1|m") == 1);
    CHECK(fc.nodes.count("x2|m") == 1);
}

TEST_CASE("global nodes are never renamed") {
    Netlist nl = parse_ok(
        "((top nil ((x1 sub ())))"
        " (sub nil ((r1 r (vdd gnd) (i-r1) ('1)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(sort_modules(nl, diags), "top", '|', {"vdd"}, diags);
    REQUIRE(!has_errors(diags));
    CHECK(fc.nodes.count("vdd") == 1);
    CHECK(fc.nodes.count("x1|vdd") == 0);
}

TEST_CASE("nested hierarchy composes prefixes") {
    Netlist nl = parse_ok(
        "((top nil ((xo outer (a))))"
        " (outer (p) ((xi inner (p))))"
        " (inner (q) ((r1 r (q gnd) (i-r1) ('1)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(sort_modules(nl, diags), "top", '|', {}, diags);
    REQUIRE(!has_errors(diags));
    REQUIRE(fc.occurrences.size() == 1);
    CHECK(fc.occurrences[0].name == "xo|xi|r1");
    CHECK(fc.occurrences[0].nodes[0] == "a");
}

TEST_CASE("undefined module references and bad connection counts") {
    Netlist nl = parse_ok("((top nil ((x1 ghost (a)))))");
    Diagnostics diags;
    flatten(nl, "", '|', {}, diags);
    CHECK(has_errors(diags));

    Netlist n2 = parse_ok(
        "((top nil ((x1 sub (a b))))"
        " (sub (in) ((r1 r (in gnd) (i-r1) ('1)))))");
    Diagnostics d2;
    flatten(sort_modules(n2, d2), "top", '|', {}, d2);
    CHECK(has_errors(d2));
}

TEST_CASE("flattening is idempotent on the occurrence multiset") {
    Netlist nl = parse_ok(test::kRcHierNative);
    Diagnostics diags;
    FlatCircuit fc = flatten(sort_modules(nl, diags), "top", '|', {}, diags);
    REQUIRE(!has_errors(diags));

    // Repackage the flat result as a single module and flatten again.
    Netlist once;
    Module m;
    m.name = "main";
    for (const auto& o : fc.occurrences) m.items.emplace_back(o);
    once.modules.push_back(std::move(m));
    Diagnostics d2;
    FlatCircuit fc2 = flatten(once, "", '|', {}, d2);
    REQUIRE(!has_errors(d2));

    auto a = occurrence_names(fc);
    auto b = occurrence_names(fc2);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(fc2.nodes == fc.nodes);
}

TEST_CASE("mutual couplings must name real inductors") {
    Netlist nl = parse_ok(
        "((m nil ((l1 l (a gnd) (i-l1) ('1))"
        " (k1 k () () (l1 l9 '1/2)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    REQUIRE(!has_errors(diags));
    check_flat(fc, diags);
    REQUIRE(has_errors(diags));
    bool mentions = false;
    for (const auto& d : diags) mentions |= d.message.find("l9") != std::string::npos;
    CHECK(mentions);
}

TEST_CASE("check-flat accepts the RC circuit and warns on danglers") {
    Netlist nl = parse_ok(test::kRcNative);
    Diagnostics diags;
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    check_flat(fc, diags);
    CHECK(diags.empty());

    // A node with a single connection draws a warning, not an error.
    Netlist n2 = parse_ok(
        "((m nil ((r1 r (a gnd) (i-r1) ('1)) (r2 r (a dangle) (i-r2) ('1)))))");
    Diagnostics d2;
    FlatCircuit f2 = flatten(n2, "", '|', {}, d2);
    check_flat(f2, d2);
    CHECK(!has_errors(d2));
    bool warned = false;
    for (const auto& d : d2)
        warned |= d.severity == Severity::warning &&
                  d.message.find("dangle") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("an empty circuit passes the flat checks") {
    Netlist nl = parse_ok("((m nil ()))");
    Diagnostics diags;
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    check_flat(fc, diags);
    CHECK(!has_errors(diags));
}

TEST_CASE("a populated circuit must touch ground") {
    Netlist nl = parse_ok("((m nil ((r1 r (a b) (i-r1) ('1)))))");
    Diagnostics diags;
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    check_flat(fc, diags);
    CHECK(has_errors(diags));
}
