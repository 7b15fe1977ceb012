#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vwsim/diagnostics.hpp"
#include "vwsim/rational.hpp"
#include "vwsim/term.hpp"

namespace vwsim {

enum class DeviceKind : std::uint8_t {
    resistor, capacitor, inductor, jj, tline, mutual, vsource, isource, psource,
};

struct DeviceArity {
    int nodes;
    int branches;
    int values;
};

// Fixed shape of each primitive device in both netlist formats:
//   r/c/l/v/i/p: 2 nodes, 1 branch, 1 value
//   b (JJ):      2 nodes, 1 branch, 3 values (Ic, shunt R, capacitance)
//   t (line):    4 nodes, 2 branches, 2 values (Z0, delay)
//   k (mutual):  0 nodes, 0 branches, 3 values (inductor, inductor, coupling)
const DeviceArity& arity_of(DeviceKind kind);
std::optional<DeviceKind> kind_from_letter(char c);
char letter_of(DeviceKind kind);
const char* kind_name(DeviceKind kind);

// True for devices whose branch current is a matrix unknown (everything except
// resistors, JJs and mutual couplings, whose currents are derived afterwards).
bool branch_is_unknown(DeviceKind kind);

struct Occurrence {
    std::string name;
    DeviceKind kind = DeviceKind::resistor;
    std::vector<std::string> nodes;
    std::vector<std::string> branches;
    std::vector<TermPtr> values;
    int line = 0;
};

struct ModuleRef {
    std::string name;                      // instance name
    std::string module;                    // referenced module
    std::vector<std::string> connections;  // actual nodes, one per external
    int line = 0;
};

using ModuleItem = std::variant<Occurrence, ModuleRef>;

struct Module {
    std::string name;
    std::vector<std::string> externals;
    std::vector<ModuleItem> items;
    int line = 0;
};

struct PrintRequest {
    char what = 'v';  // 'v' node voltage, 'i' branch current, 'p' node phase
    std::string name;
};

struct ControlStatement {
    enum class Kind { tran, print } kind = Kind::tran;
    // tran
    Rational step, stop, start;
    bool has_start = false;
    // print
    PrintRequest print;
    int line = 0;
};

// The first module is the simulation top.
struct Netlist {
    std::vector<Module> modules;
    std::vector<ControlStatement> controls;
};

bool valid_identifier(std::string_view s);
// Nodes additionally admit purely numeric names ("1", "42").
bool valid_node_name(std::string_view s);
std::string upper_name(std::string_view s);
std::string lower_name(std::string_view s);

// Name validity, duplicate occurrence/module names, well-formed value terms.
// Problems are appended to `diags`; nothing throws.
void netlist_syntax_check(const Netlist& nl, Diagnostics& diags);

// Per-kind node/branch/value counts and module-reference connection counts
// (which requires referenced modules to exist).
void netlist_arity_check(const Netlist& nl, Diagnostics& diags);

inline const std::string kGround = "gnd";

}  // namespace vwsim
