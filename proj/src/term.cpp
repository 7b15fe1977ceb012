#include "vwsim/term.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>

namespace vwsim {

namespace {

constexpr FnInfo kFnTable[] = {
    {Fn::add, "f+", 2},        {Fn::sub, "f-", 2},
    {Fn::mul, "f*", 2},        {Fn::div, "f/", 2},
    {Fn::neg, "f-neg", 1},     {Fn::abs, "f-abs", 1},
    {Fn::sin, "f-sin", 1},     {Fn::cos, "f-cos", 1},
    {Fn::exp, "f-exp", 1},     {Fn::sqrt, "f-sqrt", 1},
    {Fn::if_, "if", 3},        {Fn::less, "f<", 2},
    {Fn::time_less, "$time$<", 1},
    {Fn::mod, "f-mod", 2},
    {Fn::back, "$back$", 2},   {Fn::prev, "$prev$", 1},
};

std::size_t mix(std::size_t h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::size_t hash_string(const std::string& s) {
    return std::hash<std::string>{}(s);
}

bool is_rational_constant(const TermPtr& t) {
    return t->kind == Term::Kind::constant && t->exact.has_value();
}

}  // namespace

const FnInfo& fn_info(Fn fn) {
    return kFnTable[static_cast<std::size_t>(fn)];
}

const FnInfo* fn_by_name(std::string_view name) {
    for (const auto& info : kFnTable)
        if (name == info.name) return &info;
    return nullptr;
}

TermPtr make_const(const Rational& r) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::constant;
    t->exact = r;
    t->value = r.to_double();
    t->hash = mix(0x11, std::hash<double>{}(t->value));
    t->hash = mix(t->hash, std::size_t(r.num()));
    t->hash = mix(t->hash, std::size_t(r.den()));
    return t;
}

TermPtr make_const(double v) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::constant;
    t->value = v;
    t->hash = mix(0x13, std::hash<double>{}(v));
    return t;
}

TermPtr make_var(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::var;
    t->name = std::move(name);
    t->hash = mix(0x17, hash_string(t->name));
    return t;
}

TermPtr make_app(Fn fn, std::vector<TermPtr> args) {
    const FnInfo& info = fn_info(fn);
    if (static_cast<int>(args.size()) != info.arity)
        throw SimError(std::string(info.name) + " expects " + std::to_string(info.arity) +
                       " argument(s), got " + std::to_string(args.size()));
    for (const auto& a : args)
        if (!a) throw SimError(std::string(info.name) + " given a null argument");

    if (fn == Fn::time_less && !is_rational_constant(args[0]))
        throw SimError("$time$< requires an exact rational constant argument");
    if (fn == Fn::prev && args[0]->kind != Term::Kind::var)
        throw SimError("$prev$ requires a signal name argument");
    if (fn == Fn::back) {
        if (args[0]->kind != Term::Kind::var)
            throw SimError("$back$ requires a signal name as its first argument");
        if (!is_rational_constant(args[1]) || args[1]->exact->sign() < 0)
            throw SimError("$back$ requires a non-negative rational constant delay");
    }

    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::app;
    t->fn = fn;
    t->args = std::move(args);
    t->hash = mix(0x1f, static_cast<std::size_t>(fn));
    for (const auto& a : t->args) t->hash = mix(t->hash, a->hash);
    return t;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->hash != b->hash || a->kind != b->kind) return false;
    switch (a->kind) {
        case Term::Kind::constant: {
            if (std::bit_cast<std::uint64_t>(a->value) != std::bit_cast<std::uint64_t>(b->value))
                return false;
            if (a->exact.has_value() != b->exact.has_value()) return false;
            return !a->exact || *a->exact == *b->exact;
        }
        case Term::Kind::var:
            return a->name == b->name;
        case Term::Kind::app: {
            if (a->fn != b->fn || a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i)
                if (!term_equal(a->args[i], b->args[i])) return false;
            return true;
        }
    }
    return false;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print_term_into(const TermPtr& t, std::string& out) {
    switch (t->kind) {
        case Term::Kind::constant:
            out += '\'';
            if (t->exact) out += t->exact->to_string();
            else out += format_double(t->value);
            return;
        case Term::Kind::var:
            out += t->name;
            return;
        case Term::Kind::app: {
            out += '(';
            out += fn_info(t->fn).name;
            for (const auto& a : t->args) {
                out += ' ';
                print_term_into(a, out);
            }
            out += ')';
            return;
        }
    }
}

bool looks_numeric(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i >= s.size()) return false;
    return (s[i] >= '0' && s[i] <= '9') || s[i] == '.';
}

}  // namespace

std::string print_term(const TermPtr& t) {
    std::string out;
    print_term_into(t, out);
    return out;
}

bool valid_identifier(std::string_view s);  // defined in netlist.cpp

namespace {

// Term variables may also reference engine-generated rows ($time$, $hn$,
// $phase-..., ...), which device names themselves may not use.
bool valid_term_var(std::string_view s) {
    if (s.size() > 1 && s[0] == '$') {
        for (char c : s) {
            if (c == '(' || c == ')' || c == '\'' || c == ';' || c == ',') return false;
            if (std::isspace(static_cast<unsigned char>(c))) return false;
        }
        return true;
    }
    return valid_identifier(s);
}

}  // namespace

TermPtr term_from_snode(const SNode& node, Diagnostics& diags, const std::string& where) {
    if (node.is_atom) {
        if (looks_numeric(node.atom)) {
            if (auto r = Rational::parse(node.atom)) return make_const(*r);
            // Digits that do not fit an exact rational still make a float constant.
            double v = 0.0;
            auto res = std::from_chars(node.atom.data(), node.atom.data() + node.atom.size(), v);
            if (res.ec == std::errc() && res.ptr == node.atom.data() + node.atom.size())
                return make_const(v);
            diag_error(diags, where, "bad numeric literal '" + node.atom + "'", node.line);
            return nullptr;
        }
        if (node.quoted) {
            diag_error(diags, where, "quoted non-numeric atom '" + node.atom + "' in term", node.line);
            return nullptr;
        }
        if (!valid_term_var(node.atom)) {
            diag_error(diags, where, "invalid identifier '" + node.atom + "' in term", node.line);
            return nullptr;
        }
        return make_var(node.atom);
    }

    if (node.quoted) {
        diag_error(diags, where, "quoted list is not a term", node.line);
        return nullptr;
    }
    if (node.items.empty() || !node.items[0].is_atom) {
        diag_error(diags, where, "term application must start with a function name", node.line);
        return nullptr;
    }
    const FnInfo* info = fn_by_name(node.items[0].atom);
    if (!info) {
        diag_error(diags, where, "unknown function '" + node.items[0].atom + "'", node.line);
        return nullptr;
    }
    if (static_cast<int>(node.items.size()) - 1 != info->arity) {
        diag_error(diags, where,
                   std::string(info->name) + " expects " + std::to_string(info->arity) +
                       " argument(s), got " + std::to_string(node.items.size() - 1),
                   node.line);
        return nullptr;
    }
    std::vector<TermPtr> args;
    args.reserve(info->arity);
    for (std::size_t i = 1; i < node.items.size(); ++i) {
        TermPtr a = term_from_snode(node.items[i], diags, where);
        if (!a) return nullptr;
        args.push_back(std::move(a));
    }
    try {
        return make_app(info->fn, std::move(args));
    } catch (const SimError& e) {
        diag_error(diags, where, e.what(), node.line);
        return nullptr;
    }
}

TermPtr parse_term(std::string_view text) {
    Diagnostics diags;
    auto forms = parse_sexprs(text, diags, "term");
    if (has_errors(diags) || forms.size() != 1)
        throw SimError("bad term text: " +
                       (diags.empty() ? std::string("expected one form") : diags[0].message));
    TermPtr t = term_from_snode(forms[0], diags, "term");
    if (!t) throw SimError("bad term: " + diags.back().message);
    return t;
}

TermPtr t_add(TermPtr a, TermPtr b) {
    if (!a) return b;
    if (!b) return a;
    return make_app(Fn::add, {std::move(a), std::move(b)});
}

TermPtr t_sub(TermPtr a, TermPtr b) {
    if (!b) return a;
    if (!a) return make_app(Fn::neg, {std::move(b)});
    return make_app(Fn::sub, {std::move(a), std::move(b)});
}

}  // namespace vwsim
