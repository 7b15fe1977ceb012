#include "vwsim/netlist.hpp"

#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace vwsim {

namespace {

struct KindRow {
    DeviceKind kind;
    char letter;
    const char* name;
    DeviceArity arity;
};

constexpr KindRow kKinds[] = {
    {DeviceKind::resistor,  'r', "resistor",           {2, 1, 1}},
    {DeviceKind::capacitor, 'c', "capacitor",          {2, 1, 1}},
    {DeviceKind::inductor,  'l', "inductor",           {2, 1, 1}},
    {DeviceKind::jj,        'b', "josephson junction", {2, 1, 3}},
    {DeviceKind::tline,     't', "transmission line",  {4, 2, 2}},
    {DeviceKind::mutual,    'k', "mutual coupling",    {0, 0, 3}},
    {DeviceKind::vsource,   'v', "voltage source",     {2, 1, 1}},
    {DeviceKind::isource,   'i', "current source",     {2, 1, 1}},
    {DeviceKind::psource,   'p', "phase source",       {2, 1, 1}},
};

const KindRow& row_of(DeviceKind kind) {
    for (const auto& r : kKinds)
        if (r.kind == kind) return r;
    return kKinds[0];
}

}  // namespace

const DeviceArity& arity_of(DeviceKind kind) { return row_of(kind).arity; }
char letter_of(DeviceKind kind) { return row_of(kind).letter; }
const char* kind_name(DeviceKind kind) { return row_of(kind).name; }

std::optional<DeviceKind> kind_from_letter(char c) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& r : kKinds)
        if (r.letter == c) return r.kind;
    return std::nullopt;
}

bool branch_is_unknown(DeviceKind kind) {
    switch (kind) {
        case DeviceKind::resistor:
        case DeviceKind::jj:
        case DeviceKind::mutual:
            return false;
        default:
            return true;
    }
}

bool valid_node_name(std::string_view s) {
    if (s.empty()) return false;
    if (s[0] == '$') return false;  // reserved for engine-generated names
    for (char c : s) {
        if (c == '(' || c == ')' || c == '\'' || c == ';' || c == ',') return false;
        if (std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

bool valid_identifier(std::string_view s) {
    if (!valid_node_name(s)) return false;
    // Must not read as a number, so it can never collide with a constant.
    if (Rational::parse(s)) return false;
    return !(s[0] >= '0' && s[0] <= '9');
}

std::string upper_name(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string lower_name(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

namespace {

void check_term_names(const TermPtr& t, Diagnostics& diags, const std::string& ctx, int line) {
    if (!t) return;
    if (t->kind == Term::Kind::var) {
        if (t->name != "$time$" && t->name != "$hn$" && t->name != kGround &&
            !valid_node_name(t->name))
            diag_error(diags, "netlist", "invalid signal name '" + t->name + "' in " + ctx, line);
        return;
    }
    if (t->kind == Term::Kind::app) {
        for (const auto& a : t->args) check_term_names(a, diags, ctx, line);
    }
}

}  // namespace

void netlist_syntax_check(const Netlist& nl, Diagnostics& diags) {
    std::unordered_set<std::string> module_names;
    for (const auto& mod : nl.modules) {
        if (!valid_identifier(mod.name))
            diag_error(diags, "netlist", "invalid module name '" + mod.name + "'", mod.line);
        if (!module_names.insert(mod.name).second)
            diag_error(diags, "netlist", "duplicate module '" + mod.name + "'", mod.line);

        for (const auto& ext : mod.externals)
            if (!valid_node_name(ext) && ext != kGround)
                diag_error(diags, "netlist",
                           "invalid external node '" + ext + "' in module '" + mod.name + "'",
                           mod.line);

        std::unordered_set<std::string> occ_names;
        for (const auto& item : mod.items) {
            if (const auto* occ = std::get_if<Occurrence>(&item)) {
                if (!valid_identifier(occ->name))
                    diag_error(diags, "netlist", "invalid occurrence name '" + occ->name + "'",
                               occ->line);
                if (!occ_names.insert(occ->name).second)
                    diag_error(diags, "netlist",
                               "duplicate occurrence '" + occ->name + "' in module '" +
                                   mod.name + "'",
                               occ->line);
                for (const auto& n : occ->nodes)
                    if (n != kGround && !valid_node_name(n))
                        diag_error(diags, "netlist",
                                   "invalid node '" + n + "' on '" + occ->name + "'", occ->line);
                for (const auto& b : occ->branches)
                    if (!valid_identifier(b))
                        diag_error(diags, "netlist",
                                   "invalid branch name '" + b + "' on '" + occ->name + "'",
                                   occ->line);
                for (const auto& v : occ->values) {
                    if (!v)
                        diag_error(diags, "netlist", "missing value on '" + occ->name + "'",
                                   occ->line);
                    else
                        check_term_names(v, diags, "value of '" + occ->name + "'", occ->line);
                }
            } else {
                const auto& ref = std::get<ModuleRef>(item);
                if (!valid_identifier(ref.name))
                    diag_error(diags, "netlist", "invalid instance name '" + ref.name + "'",
                               ref.line);
                if (!occ_names.insert(ref.name).second)
                    diag_error(diags, "netlist",
                               "duplicate occurrence '" + ref.name + "' in module '" + mod.name +
                                   "'",
                               ref.line);
                if (!valid_identifier(ref.module))
                    diag_error(diags, "netlist",
                               "invalid module name '" + ref.module + "' in reference '" +
                                   ref.name + "'",
                               ref.line);
                for (const auto& n : ref.connections)
                    if (n != kGround && !valid_node_name(n))
                        diag_error(diags, "netlist",
                                   "invalid node '" + n + "' on reference '" + ref.name + "'",
                                   ref.line);
            }
        }
    }
    if (nl.modules.empty()) diag_error(diags, "netlist", "no modules defined");
}

void netlist_arity_check(const Netlist& nl, Diagnostics& diags) {
    std::unordered_map<std::string, const Module*> by_name;
    for (const auto& mod : nl.modules) by_name.emplace(mod.name, &mod);

    for (const auto& mod : nl.modules) {
        for (const auto& item : mod.items) {
            if (const auto* occ = std::get_if<Occurrence>(&item)) {
                const DeviceArity& want = arity_of(occ->kind);
                auto complain = [&](const char* what, std::size_t got, int want_n) {
                    diag_error(diags, "netlist",
                               std::string(kind_name(occ->kind)) + " '" + occ->name +
                                   "' expects " + std::to_string(want_n) + " " + what +
                                   ", got " + std::to_string(got),
                               occ->line);
                };
                if (static_cast<int>(occ->nodes.size()) != want.nodes)
                    complain("node(s)", occ->nodes.size(), want.nodes);
                if (static_cast<int>(occ->branches.size()) != want.branches)
                    complain("branch name(s)", occ->branches.size(), want.branches);
                if (static_cast<int>(occ->values.size()) != want.values)
                    complain("value(s)", occ->values.size(), want.values);
            } else {
                const auto& ref = std::get<ModuleRef>(item);
                auto it = by_name.find(ref.module);
                if (it == by_name.end()) {
                    diag_error(diags, "netlist",
                               "reference '" + ref.name + "' names undefined module '" +
                                   ref.module + "'",
                               ref.line);
                    continue;
                }
                if (ref.connections.size() != it->second->externals.size())
                    diag_error(diags, "netlist",
                               "reference '" + ref.name + "' connects " +
                                   std::to_string(ref.connections.size()) + " node(s), module '" +
                                   ref.module + "' has " +
                                   std::to_string(it->second->externals.size()) + " external(s)",
                               ref.line);
            }
        }
    }
}

}  // namespace vwsim
