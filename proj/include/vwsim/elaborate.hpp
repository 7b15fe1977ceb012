#pragma once

#include <set>
#include <string>
#include <vector>

#include "vwsim/netlist.hpp"

namespace vwsim {

// Hierarchy expanded away: primitive devices only, with instance-path names.
struct FlatCircuit {
    std::vector<Occurrence> occurrences;
    std::set<std::string> nodes;    // includes ground when referenced
    std::set<std::string> globals;  // never renamed during flattening
};

// Orders modules so every referenced module comes before its referrer; the
// relative order of independent modules is kept. Cycles are reported and the
// input order returned.
Netlist sort_modules(const Netlist& nl, Diagnostics& diags);

// Expands references depth-first. Inner occurrence, branch and internal node
// names get the instance path prefix joined by `concat`; externals are replaced
// by the caller's nodes; ground and globals pass through unrenamed. `top` empty
// means the first module.
FlatCircuit flatten(const Netlist& nl, const std::string& top, char concat,
                    const std::set<std::string>& globals, Diagnostics& diags);

// Post-flatten consistency: mutual couplings must name inductors that exist,
// ground must be referenced, degree-1 and ground-unreachable nodes draw
// warnings.
void check_flat(const FlatCircuit& fc, Diagnostics& diags);

}  // namespace vwsim
