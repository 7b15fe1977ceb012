#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "vwsim/netlist.hpp"

namespace vwsim {

// SPICE deck reader. First line is the title; cards are case-insensitive and
// folded to lower case; '+' continues the previous card; '*' lines and ';'
// tails are comments; node 0 is ground. Supported cards: R C L V I P B T K X,
// .subckt/.ends, .model (jj only), .tran, .print, .end. Unsupported analyses
// (.ac, .dc, ...) are reported as errors, never skipped.
Netlist parse_spice(std::string_view text, Diagnostics& diags,
                    const std::string& where = "deck");

// One numeric field with an optional engineering suffix (f p n u m k meg g t),
// scaled exactly. Trailing unit letters after the suffix are ignored ("10pF").
std::optional<Rational> spice_number(std::string_view token);

}  // namespace vwsim
