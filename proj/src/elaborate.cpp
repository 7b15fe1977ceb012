#include "vwsim/elaborate.hpp"

#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace vwsim {

namespace {

std::vector<std::string> referenced_modules(const Module& mod) {
    std::vector<std::string> out;
    for (const auto& item : mod.items)
        if (const auto* ref = std::get_if<ModuleRef>(&item)) out.push_back(ref->module);
    return out;
}

}  // namespace

Netlist sort_modules(const Netlist& nl, Diagnostics& diags) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nl.modules.size(); ++i) index.emplace(nl.modules[i].name, i);

    enum class Mark : std::uint8_t { white, grey, black };
    std::vector<Mark> mark(nl.modules.size(), Mark::white);
    std::vector<std::size_t> order;
    std::vector<std::string> path;
    bool cycle = false;

    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (cycle) return;
        mark[i] = Mark::grey;
        path.push_back(nl.modules[i].name);
        for (const auto& dep : referenced_modules(nl.modules[i])) {
            auto it = index.find(dep);
            if (it == index.end()) continue;  // undefined reference, arity check reports it
            if (mark[it->second] == Mark::grey) {
                std::string msg = "module reference cycle: ";
                for (const auto& p : path) msg += p + " -> ";
                msg += dep;
                diag_error(diags, "elaborate", msg, nl.modules[i].line);
                cycle = true;
                return;
            }
            if (mark[it->second] == Mark::white) visit(it->second);
        }
        path.pop_back();
        mark[i] = Mark::black;
        order.push_back(i);
    };
    for (std::size_t i = 0; i < nl.modules.size() && !cycle; ++i)
        if (mark[i] == Mark::white) visit(i);
    if (cycle) return nl;

    Netlist out;
    out.controls = nl.controls;
    out.modules.reserve(nl.modules.size());
    for (std::size_t i : order) out.modules.push_back(nl.modules[i]);
    return out;
}

namespace {

struct Flattener {
    char concat;
    const std::set<std::string>& globals;
    Diagnostics& diags;
    FlatCircuit out;
    std::unordered_map<std::string, const Module*> by_name;
    std::unordered_set<std::string> occ_names;
    int depth = 0;

    using NodeMap = std::unordered_map<std::string, std::string>;

    bool fixed_node(const std::string& n) const {
        return n == kGround || globals.count(n) != 0;
    }

    std::string rename_node(const std::string& n, const std::string& prefix,
                            const NodeMap& map) const {
        if (fixed_node(n)) return n;
        if (auto it = map.find(n); it != map.end()) return it->second;
        return prefix + n;
    }

    TermPtr rename_term(const TermPtr& t, const std::string& prefix, const NodeMap& map) {
        if (!t) return t;
        switch (t->kind) {
            case Term::Kind::constant:
                return t;
            case Term::Kind::var: {
                if (t->name == "$time$" || t->name == "$hn$") return t;
                std::string renamed = rename_node(t->name, prefix, map);
                return renamed == t->name ? t : make_var(std::move(renamed));
            }
            case Term::Kind::app: {
                std::vector<TermPtr> args;
                args.reserve(t->args.size());
                bool changed = false;
                for (const auto& a : t->args) {
                    args.push_back(rename_term(a, prefix, map));
                    changed = changed || args.back() != a;
                }
                return changed ? make_app(t->fn, std::move(args)) : t;
            }
        }
        return t;
    }

    void expand(const Module& mod, const std::string& prefix, const NodeMap& map, int line) {
        if (++depth > 1000) {
            diag_error(diags, "elaborate", "module nesting too deep (reference cycle?)", line);
            --depth;
            return;
        }
        for (const auto& item : mod.items) {
            if (const auto* occ = std::get_if<Occurrence>(&item)) {
                Occurrence flat = *occ;
                flat.name = prefix + occ->name;
                if (!occ_names.insert(flat.name).second)
                    diag_error(diags, "elaborate",
                               "flattened occurrence name '" + flat.name + "' is not unique",
                               occ->line);
                for (auto& n : flat.nodes) {
                    n = rename_node(n, prefix, map);
                    out.nodes.insert(n);
                }
                for (auto& b : flat.branches) b = prefix + b;
                if (occ->kind == DeviceKind::mutual) {
                    // First two values name inductor occurrences, not nodes.
                    for (std::size_t i = 0; i < 2 && i < flat.values.size(); ++i) {
                        const TermPtr& v = flat.values[i];
                        if (v && v->kind == Term::Kind::var)
                            flat.values[i] = make_var(prefix + v->name);
                    }
                    if (flat.values.size() > 2)
                        flat.values[2] = rename_term(flat.values[2], prefix, map);
                } else {
                    for (auto& v : flat.values) v = rename_term(v, prefix, map);
                }
                out.occurrences.push_back(std::move(flat));
            } else {
                const auto& ref = std::get<ModuleRef>(item);
                auto it = by_name.find(ref.module);
                if (it == by_name.end()) {
                    diag_error(diags, "elaborate",
                               "reference '" + prefix + ref.name + "' names undefined module '" +
                                   ref.module + "'",
                               ref.line);
                    continue;
                }
                const Module& target = *it->second;
                if (ref.connections.size() != target.externals.size()) {
                    diag_error(diags, "elaborate",
                               "reference '" + prefix + ref.name + "' connection count " +
                                   std::to_string(ref.connections.size()) + " does not match '" +
                                   ref.module + "' externals " +
                                   std::to_string(target.externals.size()),
                               ref.line);
                    continue;
                }
                NodeMap inner;
                for (std::size_t i = 0; i < target.externals.size(); ++i) {
                    const std::string& ext = target.externals[i];
                    std::string actual = rename_node(ref.connections[i], prefix, map);
                    out.nodes.insert(actual);
                    if (!fixed_node(ext)) inner.emplace(ext, std::move(actual));
                }
                expand(target, prefix + ref.name + concat, inner, ref.line);
            }
        }
        --depth;
    }
};

}  // namespace

FlatCircuit flatten(const Netlist& nl, const std::string& top, char concat,
                    const std::set<std::string>& globals, Diagnostics& diags) {
    Flattener fl{concat, globals, diags, {}, {}, {}, 0};
    fl.out.globals = globals;
    if (nl.modules.empty()) {
        diag_error(diags, "elaborate", "no modules to flatten");
        return std::move(fl.out);
    }
    for (const auto& m : nl.modules) fl.by_name.emplace(m.name, &m);

    const Module* root = nullptr;
    if (top.empty()) {
        root = &nl.modules.front();
    } else if (auto it = fl.by_name.find(top); it != fl.by_name.end()) {
        root = it->second;
    } else {
        diag_error(diags, "elaborate", "top module '" + top + "' is not defined");
        return std::move(fl.out);
    }
    fl.expand(*root, "", {}, root->line);
    return std::move(fl.out);
}

void check_flat(const FlatCircuit& fc, Diagnostics& diags) {
    std::unordered_set<std::string> inductors;
    for (const auto& occ : fc.occurrences)
        if (occ.kind == DeviceKind::inductor) inductors.insert(occ.name);

    std::map<std::string, int> degree;  // ordered so warnings come out stably
    // Conductive edges for the reachability walk; a transmission line couples
    // its ports only through delayed sources, so each port is its own edge.
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& occ : fc.occurrences) {
        for (const auto& n : occ.nodes) ++degree[n];
        if (occ.nodes.size() == 2) edges.emplace_back(occ.nodes[0], occ.nodes[1]);
        if (occ.kind == DeviceKind::tline && occ.nodes.size() == 4) {
            edges.emplace_back(occ.nodes[0], occ.nodes[1]);
            edges.emplace_back(occ.nodes[2], occ.nodes[3]);
        }
        if (occ.kind == DeviceKind::mutual) {
            for (std::size_t i = 0; i < 2 && i < occ.values.size(); ++i) {
                const TermPtr& v = occ.values[i];
                if (!v || v->kind != Term::Kind::var)
                    diag_error(diags, "elaborate",
                               "mutual coupling '" + occ.name +
                                   "' must name two inductors in its first two values",
                               occ.line);
                else if (!inductors.count(v->name))
                    diag_error(diags, "elaborate",
                               "mutual coupling '" + occ.name + "' names missing inductor '" +
                                   v->name + "'",
                               occ.line);
            }
        }
    }

    if (!degree.count(kGround)) {
        // An empty circuit is legal (it simulates to just the time rows); a
        // populated one without a ground reference has no usable reference.
        if (!fc.occurrences.empty())
            diag_error(diags, "elaborate", "no device is connected to ground");
        return;
    }

    std::unordered_map<std::string, std::vector<std::string>> adj;
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::unordered_set<std::string> seen{kGround};
    std::vector<std::string> work{kGround};
    while (!work.empty()) {
        std::string n = std::move(work.back());
        work.pop_back();
        for (const auto& m : adj[n])
            if (seen.insert(m).second) work.push_back(m);
    }
    for (const auto& [node, deg] : degree) {
        if (node == kGround) continue;
        if (deg == 1)
            diag_warning(diags, "elaborate", "node '" + node + "' has a single connection");
        if (!seen.count(node))
            diag_warning(diags, "elaborate", "node '" + node + "' has no conductive path to ground");
    }
}

}  // namespace vwsim
