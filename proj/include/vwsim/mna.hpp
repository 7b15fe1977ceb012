#pragma once

#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "vwsim/elaborate.hpp"

namespace vwsim {

enum class SimType : std::uint8_t { voltage, phase };

const char* sim_type_name(SimType t);

// Flux quantum h/2e in webers, from the exact SI values of h and e.
inline constexpr double kPhi0 = 6.62607015e-34 / (2 * 1.602176634e-19);

// Column order: non-ground nodes in first-appearance order, then the branch
// currents of sources, inductors, capacitors and transmission lines in
// occurrence order. Resistor, JJ and coupling currents are never unknowns.
struct UnknownIndex {
    std::vector<std::string> names;
    std::vector<std::string> node_names;    // the node prefix of `names`
    std::vector<std::string> branch_names;  // the branch suffix of `names`
    std::unordered_map<std::string, int> index;

    int of(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? -1 : it->second;
    }
    std::size_t size() const { return names.size(); }
};

// A recorded signal the engine extends each step after solving: JJ phases and
// voltage derivatives, phase-mode device voltage drops, source histories. The
// update term sees new-column unknowns as plain Vars, previous-column values
// through $prev$, and other aux rows at their previous column.
struct AuxRow {
    std::string name;  // starts with '$', so it can never collide with user names
    TermPtr update;
};

// One JJ to watch for phase jumps: the variable-step policy and the test
// rigs read phase advance per step from here.
struct JJWatch {
    std::string name;
    std::string node_a, node_b;  // phase mode: phase difference of these nodes
    std::string phase_row;       // voltage mode: the recorded $phase row
};

struct SymbolicSystem {
    SimType sim_type = SimType::voltage;
    UnknownIndex unknowns;
    // Row i holds the (column, term) entries of equation i, ascending by column.
    std::vector<std::vector<std::pair<int, TermPtr>>> A;
    std::vector<TermPtr> b;  // nullptr entries are zero
    std::vector<AuxRow> aux;
    std::vector<JJWatch> jj_watch;
    std::vector<std::pair<std::string, Rational>> delays;  // tline name, delay
    bool ground_referenced = false;
};

UnknownIndex assign_unknowns(const FlatCircuit& fc, Diagnostics& diags);

// Stamps every occurrence into Ax = b with trapezoidal companions. Terms in A
// reference only $hn$; terms in b reference $time$, $hn$ and previous-step
// record values by name.
SymbolicSystem build_system(const FlatCircuit& fc, SimType sim_type, Diagnostics& diags);

}  // namespace vwsim
