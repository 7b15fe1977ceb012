#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vwsim/diagnostics.hpp"
#include "vwsim/rational.hpp"
#include "vwsim/sexpr.hpp"

namespace vwsim {

// The value language: every matrix/source entry is a term over constants, named
// signals, and a fixed primitive set. Terms are immutable and shared.
enum class Fn : std::uint8_t {
    add, sub, mul, div, neg, abs, sin, cos, exp, sqrt,
    if_, less, time_less, mod, back, prev,
};

struct FnInfo {
    Fn fn;
    const char* name;
    int arity;
};

const FnInfo& fn_info(Fn fn);
const FnInfo* fn_by_name(std::string_view name);

class Term;
using TermPtr = std::shared_ptr<const Term>;

class Term {
public:
    enum class Kind : std::uint8_t { constant, var, app };

    Kind kind = Kind::constant;

    // constant
    double value = 0.0;
    std::optional<Rational> exact;  // present when the source literal was rational

    // var
    std::string name;

    // app
    Fn fn = Fn::add;
    std::vector<TermPtr> args;

    std::size_t hash = 0;  // structural, filled at construction
};

TermPtr make_const(const Rational& r);
TermPtr make_const(double v);
TermPtr make_var(std::string name);
// Throws SimError on arity mismatch or malformed special forms ($time$< wants a
// rational constant; $back$ wants (var, rational constant); $prev$ wants a var).
TermPtr make_app(Fn fn, std::vector<TermPtr> args);

bool term_equal(const TermPtr& a, const TermPtr& b);

std::string print_term(const TermPtr& t);

// Term from a parsed s-expression; reports problems through `diags` and returns
// nullptr. Bare identifiers are Vars, quoted (or bare) numbers are Constants.
TermPtr term_from_snode(const SNode& node, Diagnostics& diags,
                        const std::string& where = "netlist");

// Convenience for tests and tools: parse a single term from text, throw on error.
TermPtr parse_term(std::string_view text);

struct TermHash {
    std::size_t operator()(const TermPtr& t) const { return t->hash; }
};
struct TermEq {
    bool operator()(const TermPtr& a, const TermPtr& b) const { return term_equal(a, b); }
};

// Builder shorthands used heavily by the stamp code. t_add/t_sub accept nullptr as
// "zero" so accumulation reads naturally.
inline TermPtr t_rat(std::int64_t n, std::int64_t d = 1) { return make_const(Rational(n, d)); }
inline TermPtr t_num(double v) { return make_const(v); }
inline TermPtr t_var(std::string n) { return make_var(std::move(n)); }
TermPtr t_add(TermPtr a, TermPtr b);
TermPtr t_sub(TermPtr a, TermPtr b);
inline TermPtr t_mul(TermPtr a, TermPtr b) { return make_app(Fn::mul, {std::move(a), std::move(b)}); }
inline TermPtr t_div(TermPtr a, TermPtr b) { return make_app(Fn::div, {std::move(a), std::move(b)}); }
inline TermPtr t_neg(TermPtr a) { return make_app(Fn::neg, {std::move(a)}); }
inline TermPtr t_if(TermPtr c, TermPtr a, TermPtr b) {
    return make_app(Fn::if_, {std::move(c), std::move(a), std::move(b)});
}
inline TermPtr t_less(TermPtr a, TermPtr b) { return make_app(Fn::less, {std::move(a), std::move(b)}); }
inline TermPtr t_time_less(const Rational& r) { return make_app(Fn::time_less, {make_const(r)}); }
inline TermPtr t_prev(std::string sig) { return make_app(Fn::prev, {make_var(std::move(sig))}); }
inline TermPtr t_back(std::string sig, const Rational& delay) {
    return make_app(Fn::back, {make_var(std::move(sig)), make_const(delay)});
}

}  // namespace vwsim
