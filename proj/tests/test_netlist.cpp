#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "generators.hpp"
#include "vwsim/eval.hpp"
#include "vwsim/native.hpp"
#include "vwsim/spice.hpp"
#include "vwsim/term.hpp"

using namespace vwsim;

namespace {

Netlist parse_native_ok(const std::string& text) {
    Diagnostics diags;
    Netlist nl = parse_native(text, diags);
    for (const auto& d : diags) INFO(format_diagnostic(d));
    REQUIRE(!has_errors(diags));
    return nl;
}

Netlist parse_spice_ok(const std::string& text) {
    Diagnostics diags;
    Netlist nl = parse_spice(text, diags);
    for (const auto& d : diags) INFO(format_diagnostic(d));
    REQUIRE(!has_errors(diags));
    return nl;
}

const Occurrence& occ_at(const Module& m, std::size_t i) {
    REQUIRE(i < m.items.size());
    REQUIRE(std::holds_alternative<Occurrence>(m.items[i]));
    return std::get<Occurrence>(m.items[i]);
}

}  // namespace

TEST_CASE("the reference RC netlist parses faithfully") {
    Netlist nl = parse_native_ok(test::kRcNative);
    REQUIRE(nl.modules.size() == 1);
    const Module& m = nl.modules[0];
    CHECK(m.name == "rc-module");
    CHECK(m.externals.empty());
    REQUIRE(m.items.size() == 3);

    const Occurrence& v1 = occ_at(m, 0);
    CHECK(v1.name == "v1");
    CHECK(v1.kind == DeviceKind::vsource);
    CHECK(v1.nodes == std::vector<std::string>{"vs1", "gnd"});
    CHECK(v1.branches == std::vector<std::string>{"i-v1"});
    REQUIRE(v1.values.size() == 1);
    CHECK(v1.values[0]->fn == Fn::if_);
    CHECK(print_term(v1.values[0]) == "(if ($time$< '1/5) '0 '1)");

    const Occurrence& r1 = occ_at(m, 1);
    CHECK(r1.kind == DeviceKind::resistor);
    CHECK(r1.values[0]->value == 1.0);

    const Occurrence& c1 = occ_at(m, 2);
    CHECK(c1.kind == DeviceKind::capacitor);
    CHECK(c1.nodes == std::vector<std::string>{"vc1", "gnd"});

    Diagnostics diags;
    netlist_syntax_check(nl, diags);
    netlist_arity_check(nl, diags);
    CHECK(!has_errors(diags));
}

TEST_CASE("an empty module is legal") {
    Netlist nl = parse_native_ok("((m nil ()))");
    REQUIRE(nl.modules.size() == 1);
    CHECK(nl.modules[0].name == "m");
    CHECK(nl.modules[0].items.empty());
}

TEST_CASE("module references parse as (name module (connections))") {
    Netlist nl = parse_native_ok(test::kRcHierNative);
    REQUIRE(nl.modules.size() == 2);
    REQUIRE(nl.modules[0].items.size() == 2);
    REQUIRE(std::holds_alternative<ModuleRef>(nl.modules[0].items[1]));
    const auto& ref = std::get<ModuleRef>(nl.modules[0].items[1]);
    CHECK(ref.name == "x1");
    CHECK(ref.module == "stage");
    CHECK(ref.connections == std::vector<std::string>{"vs1"});
    CHECK(nl.modules[1].externals == std::vector<std::string>{"in"});
}

TEST_CASE("print then parse is identity") {
    for (const char* text : {test::kRcNative, test::kRcHierNative}) {
        Netlist nl = parse_native_ok(text);
        std::string printed = print_native(nl);
        Netlist back = parse_native_ok(printed);
        CHECK(print_native(back) == printed);
    }

    // And on a netlist with every device kind.
    std::string zoo = R"(((zoo nil
      ((v1 v (a gnd) (i-v1) ((f* '2 $time$)))
       (i1 i (a gnd) (i-i1) ('1/1000))
       (p1 p (b gnd) (i-p1) ('0))
       (r1 r (a b) (i-r1) ('5))
       (c1 c (b gnd) (i-c1) ('1/100))
       (l1 l (a c) (i-l1) ('2))
       (l2 l (c gnd) (i-l2) ('3))
       (k1 k () () (l1 l2 '1/10))
       (b1 b (c gnd) (i-b1) ('1/10000 '3 '1/10000000000000))
       (t1 t (a gnd b gnd) (i-t1-a i-t1-b) ('50 '1/100))))))";
    Netlist nl = parse_native_ok(zoo);
    Diagnostics diags;
    netlist_syntax_check(nl, diags);
    netlist_arity_check(nl, diags);
    CHECK(!has_errors(diags));
    CHECK(print_native(parse_native_ok(print_native(nl))) == print_native(nl));
}

TEST_CASE("syntax check flags duplicates and bad names") {
    Netlist nl = parse_native_ok(
        "((m nil ((r1 r (a b) (i-r1) ('1)) (r1 r (b gnd) (i-r2) ('1)))))");
    Diagnostics diags;
    netlist_syntax_check(nl, diags);
    REQUIRE(has_errors(diags));
    bool names_r1 = false;
    for (const auto& d : diags) names_r1 |= d.message.find("r1") != std::string::npos;
    CHECK(names_r1);
}

TEST_CASE("unknown device kinds are rejected") {
    Diagnostics diags;
    parse_native("((m nil ((q1 q (a b) (i-q1) ('1)))))", diags);
    CHECK(has_errors(diags));
}

TEST_CASE("arity violations are reported") {
    // A resistor with three nodes.
    Diagnostics diags;
    Netlist nl = parse_native("((m nil ((r1 r (a b c) (i-r1) ('1)))))", diags);
    REQUIRE(!has_errors(diags));
    netlist_arity_check(nl, diags);
    CHECK(has_errors(diags));

    // A reference passing 2 wires to a 1-external module.
    Diagnostics d2;
    Netlist n2 = parse_native(
        "((top nil ((x1 sub (a b)))) (sub (in) ((r1 r (in gnd) (i-r1) ('1)))))", d2);
    REQUIRE(!has_errors(d2));
    netlist_arity_check(n2, d2);
    CHECK(has_errors(d2));
}

TEST_CASE("unbalanced parens are a parse error") {
    Diagnostics diags;
    parse_native("((m nil ((r1 r (a b) (i-r1) ('1))))", diags);
    CHECK(has_errors(diags));
}

TEST_CASE("the SPICE RC deck maps onto the same shapes") {
    Netlist nl = parse_spice_ok(test::kRcSpice);
    REQUIRE(!nl.modules.empty());
    const Module& m = nl.modules[0];
    CHECK(m.name == "main");
    REQUIRE(m.items.size() == 3);

    const Occurrence& v1 = occ_at(m, 0);
    CHECK(v1.name == "v1");
    CHECK(v1.kind == DeviceKind::vsource);
    CHECK(v1.nodes == std::vector<std::string>{"vs1", "gnd"});  // node 0 is ground
    CHECK(v1.branches == std::vector<std::string>{"i-v1"});

    const Occurrence& r1 = occ_at(m, 1);
    CHECK(r1.kind == DeviceKind::resistor);
    CHECK(r1.nodes == std::vector<std::string>{"vs1", "vc1"});
    CHECK(r1.values[0]->value == 1.0);

    REQUIRE(nl.controls.size() == 2);
    CHECK(nl.controls[0].kind == ControlStatement::Kind::tran);
    CHECK(nl.controls[0].step == Rational(1, 5));
    CHECK(nl.controls[0].stop == Rational(2));
    CHECK(nl.controls[1].kind == ControlStatement::Kind::print);
    CHECK(nl.controls[1].print.what == 'v');
    CHECK(nl.controls[1].print.name == "vc1");

    Diagnostics diags;
    netlist_syntax_check(nl, diags);
    netlist_arity_check(nl, diags);
    CHECK(!has_errors(diags));
}

TEST_CASE("engineering suffixes scale exactly") {
    Netlist nl = parse_spice_ok(
        "suffixes\n"
        "c1 a 0 1p\n"
        "c2 a 0 2.5n\n"
        "r1 a 0 3u\n"
        "r2 a 0 4m\n"
        "r3 a 0 5k\n"
        "r4 a 0 6meg\n"
        ".end\n");
    const Module& m = nl.modules[0];
    CHECK(occ_at(m, 0).values[0]->value == 1e-12);
    CHECK(*occ_at(m, 0).values[0]->exact == Rational(1, 1000000000000LL));
    CHECK(occ_at(m, 1).values[0]->value == 2.5e-9);
    CHECK(occ_at(m, 2).values[0]->value == 3e-6);
    CHECK(occ_at(m, 3).values[0]->value == 0.004);
    CHECK(occ_at(m, 4).values[0]->value == 5000.0);
    CHECK(occ_at(m, 5).values[0]->value == 6e6);
}

TEST_CASE("SPICE is case-insensitive") {
    Netlist nl = parse_spice_ok(
        "case test\n"
        "R1 VS1 VC1 1K\n"
        "C1 vc1 0 1\n"
        ".TRAN 0.1 1\n"
        ".END\n");
    const Module& m = nl.modules[0];
    CHECK(occ_at(m, 0).name == "r1");
    CHECK(occ_at(m, 0).nodes == std::vector<std::string>{"vs1", "vc1"});
    CHECK(occ_at(m, 1).nodes[0] == "vc1");  // same node as R1's second
}

TEST_CASE("subcircuits become modules with externals") {
    Netlist nl = parse_spice_ok(
        "hier\n"
        "x1 n1 n2 twoport\n"
        "v1 n1 0 1\n"
        ".subckt twoport a b\n"
        "r1 a b 50\n"
        ".ends\n"
        ".end\n");
    REQUIRE(nl.modules.size() == 2);
    CHECK(nl.modules[0].name == "main");
    CHECK(nl.modules[1].name == "twoport");
    CHECK(nl.modules[1].externals == std::vector<std::string>{"a", "b"});
    REQUIRE(std::holds_alternative<ModuleRef>(nl.modules[0].items[0]));
    const auto& ref = std::get<ModuleRef>(nl.modules[0].items[0]);
    CHECK(ref.module == "twoport");
    CHECK(ref.connections == std::vector<std::string>{"n1", "n2"});

    Diagnostics diags;
    netlist_arity_check(nl, diags);
    CHECK(!has_errors(diags));
}

TEST_CASE("junction cards pull their parameters from the model") {
    Netlist nl = parse_spice_ok(
        "jj deck\n"
        "b1 a 0 jmod\n"
        "b2 a 0 jmod area 2\n"
        ".model jmod jj(icrit=0.1m, rn=3, cap=0.2p)\n"
        ".end\n");
    const Module& m = nl.modules[0];
    const Occurrence& b1 = occ_at(m, 0);
    REQUIRE(b1.values.size() == 3);
    CHECK(*b1.values[0]->exact == Rational(1, 10000));
    CHECK(*b1.values[1]->exact == Rational(3));
    CHECK(*b1.values[2]->exact == Rational(1, 5000000000000LL));
    const Occurrence& b2 = occ_at(m, 1);
    CHECK(*b2.values[0]->exact == Rational(1, 5000));   // ic doubles with area
    CHECK(*b2.values[1]->exact == Rational(3, 2));      // r halves
}

TEST_CASE("missing models and unsupported analyses are errors") {
    Diagnostics diags;
    parse_spice("bad jj\nb1 a 0 nomodel\n.end\n", diags);
    CHECK(has_errors(diags));

    Diagnostics d2;
    parse_spice("ac deck\nr1 a 0 1\n.ac dec 10 1 1e9\n.end\n", d2);
    CHECK(has_errors(d2));

    Diagnostics d3;
    parse_spice("bad element\nq1 a b c 1\n.end\n", d3);
    CHECK(has_errors(d3));
}

TEST_CASE("source functions desugar to terms over $time$") {
    Netlist nl = parse_spice_ok(
        "sources\n"
        "v1 a 0 pwl(0 0 1 1 2 0)\n"
        "v2 b 0 pulse(0 1 0.1 0.01 0.01 0.5 2)\n"
        "v3 c 0 sin(0 1 50)\n"
        "v4 d 0 dc 5\n"
        ".end\n");
    const Module& m = nl.modules[0];
    CHECK(occ_at(m, 0).values[0]->fn == Fn::if_);
    CHECK(occ_at(m, 1).values[0]->fn == Fn::if_);
    CHECK(occ_at(m, 2).values[0]->kind == Term::Kind::app);
    CHECK(occ_at(m, 3).values[0]->value == 5.0);

    // pwl evaluated at its breakpoints and midpoints.
    MapEnv env;
    TermPtr pwl = occ_at(m, 0).values[0];
    auto at = [&](const Rational& t) {
        return vw_eval(pwl, EvalCtx{&env, t, Rational(1, 10)});
    };
    CHECK(at(Rational(0)) == 0.0);
    CHECK(at(Rational(1, 2)) == 0.5);
    CHECK(at(Rational(1)) == 1.0);
    CHECK(at(Rational(3, 2)) == 0.5);
    CHECK(at(Rational(3)) == 0.0);  // holds after the last breakpoint
}

TEST_CASE("strictly decreasing pwl times are rejected") {
    Diagnostics diags;
    parse_spice("bad pwl\nv1 a 0 pwl(0 0 1 1 1 2)\n.end\n", diags);
    CHECK(has_errors(diags));
}

TEST_CASE("continuation lines join cards") {
    Netlist nl = parse_spice_ok(
        "continuation\n"
        "v1 a 0 pwl(0 0\n"
        "+ 1 1)\n"
        ".end\n");
    CHECK(occ_at(nl.modules[0], 0).values[0] != nullptr);
}
