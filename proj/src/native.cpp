#include "vwsim/native.hpp"

#include <sstream>

#include "vwsim/sexpr.hpp"

namespace vwsim {

namespace {

bool is_nil(const SNode& n) {
    return (n.is_atom && lower_name(n.atom) == "nil") || (n.is_list() && n.items.empty());
}

std::vector<std::string> name_list(const SNode& n, Diagnostics& diags, const std::string& where,
                                   const char* what) {
    std::vector<std::string> out;
    if (is_nil(n)) return out;
    if (n.is_atom) {
        diag_error(diags, where, std::string("expected a list of ") + what, n.line);
        return out;
    }
    for (const auto& item : n.items) {
        if (!item.is_atom || item.quoted) {
            diag_error(diags, where, std::string("expected a ") + what + " name", item.line);
            continue;
        }
        out.push_back(item.atom);
    }
    return out;
}

void parse_item(const SNode& form, Module& mod, Diagnostics& diags, const std::string& where) {
    if (form.is_atom || form.items.empty() || !form[0].is_atom) {
        diag_error(diags, where, "malformed occurrence in module '" + mod.name + "'", form.line);
        return;
    }
    const std::string& name = form[0].atom;

    if (form.size() == 3) {
        // (instance-name module-name (connections))
        if (!form[1].is_atom) {
            diag_error(diags, where, "reference '" + name + "' needs a module name", form.line);
            return;
        }
        ModuleRef ref;
        ref.name = name;
        ref.module = form[1].atom;
        ref.connections = name_list(form[2], diags, where, "node");
        ref.line = form.line;
        mod.items.emplace_back(std::move(ref));
        return;
    }

    if (form.size() != 5) {
        diag_error(diags, where,
                   "occurrence '" + name + "' has " + std::to_string(form.size()) +
                       " fields, expected 5 (or 3 for a module reference)",
                   form.line);
        return;
    }
    if (!form[1].is_atom || form[1].atom.size() != 1) {
        diag_error(diags, where, "occurrence '" + name + "' has a malformed device type",
                   form.line);
        return;
    }
    auto kind = kind_from_letter(form[1].atom[0]);
    if (!kind) {
        diag_error(diags, where,
                   "occurrence '" + name + "' has unknown device type '" + form[1].atom + "'",
                   form.line);
        return;
    }

    Occurrence occ;
    occ.name = name;
    occ.kind = *kind;
    occ.line = form.line;
    occ.nodes = name_list(form[2], diags, where, "node");
    occ.branches = name_list(form[3], diags, where, "branch");
    const SNode& vals = form[4];
    if (vals.is_atom && !is_nil(vals)) {
        diag_error(diags, where, "occurrence '" + name + "' has a malformed value list",
                   form.line);
    } else if (!is_nil(vals)) {
        for (const auto& v : vals.items) {
            TermPtr t = term_from_snode(v, diags, where);
            if (t) occ.values.push_back(std::move(t));
        }
    }
    mod.items.emplace_back(std::move(occ));
}

void parse_module(const SNode& form, Netlist& nl, Diagnostics& diags, const std::string& where) {
    if (form.is_atom || form.size() != 3 || !form[0].is_atom) {
        diag_error(diags, where, "malformed module, expected (name externals (occurrences))",
                   form.line);
        return;
    }
    Module mod;
    mod.name = form[0].atom;
    mod.line = form.line;
    mod.externals = name_list(form[1], diags, where, "node");
    const SNode& occs = form[2];
    if (occs.is_atom && !is_nil(occs)) {
        diag_error(diags, where, "module '" + mod.name + "' has a malformed occurrence list",
                   occs.line);
    } else if (!is_nil(occs)) {
        for (const auto& item : occs.items) parse_item(item, mod, diags, where);
    }
    nl.modules.emplace_back(std::move(mod));
}

}  // namespace

Netlist parse_native(std::string_view text, Diagnostics& diags, const std::string& where) {
    Netlist nl;
    auto forms = parse_sexprs(text, diags, where);
    if (has_errors(diags)) return nl;
    if (forms.empty()) {
        diag_error(diags, where, "empty netlist file");
        return nl;
    }

    // Accept either the bare module list or a (defconst *name* '<list>) wrapper.
    const SNode* list = &forms[0];
    if (list->is_list() && list->size() == 3 && (*list)[0].is_atom &&
        lower_name((*list)[0].atom) == "defconst") {
        list = &(*list)[2];
    }
    if (forms.size() > 1)
        diag_error(diags, where, "expected a single top-level netlist form", forms[1].line);
    if (list->is_atom) {
        if (!is_nil(*list))
            diag_error(diags, where, "expected a list of modules", list->line);
        return nl;
    }
    for (const auto& form : list->items) parse_module(form, nl, diags, where);
    return nl;
}

namespace {

std::string join(const std::vector<std::string>& names) {
    if (names.empty()) return "nil";
    std::string out = "(";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ' ';
        out += names[i];
    }
    out += ')';
    return out;
}

}  // namespace

std::string print_native(const Netlist& nl) {
    std::ostringstream os;
    os << "(";
    bool first_mod = true;
    for (const auto& mod : nl.modules) {
        if (!first_mod) os << "\n ";
        first_mod = false;
        os << "(" << mod.name << "\n  " << join(mod.externals) << "\n  (";
        bool first_item = true;
        for (const auto& item : mod.items) {
            if (!first_item) os << "\n   ";
            first_item = false;
            if (const auto* occ = std::get_if<Occurrence>(&item)) {
                os << "(" << occ->name << " " << letter_of(occ->kind) << " "
                   << join(occ->nodes) << " " << join(occ->branches) << " (";
                for (std::size_t i = 0; i < occ->values.size(); ++i) {
                    if (i) os << ' ';
                    os << print_term(occ->values[i]);
                }
                os << "))";
            } else {
                const auto& ref = std::get<ModuleRef>(item);
                os << "(" << ref.name << " " << ref.module << " " << join(ref.connections)
                   << ")";
            }
        }
        os << "))";
    }
    os << ")\n";
    return os.str();
}

}  // namespace vwsim
