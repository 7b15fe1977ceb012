#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vwsim/diagnostics.hpp"

namespace vwsim {

// Minimal s-expression reader shared by the native netlist format and the term
// language. Atoms are any run of characters outside "()' ;" and whitespace; a
// leading quote marks the next form. ';' starts a comment through end of line.
struct SNode {
    bool is_atom = false;
    bool quoted = false;
    std::string atom;
    std::vector<SNode> items;
    int line = 0;

    bool is_list() const { return !is_atom; }
    std::size_t size() const { return items.size(); }
    const SNode& operator[](std::size_t i) const { return items[i]; }
};

// Parses every top-level form in the text. Errors (unbalanced parens, stray
// characters) are reported through `diags` with 1-based line numbers; on error the
// partial result so far is returned.
std::vector<SNode> parse_sexprs(std::string_view text, Diagnostics& diags,
                                const std::string& where = "netlist");

std::string print_sexpr(const SNode& node);

}  // namespace vwsim
