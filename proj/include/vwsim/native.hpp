#pragma once

#include <string>
#include <string_view>

#include "vwsim/netlist.hpp"

namespace vwsim {

// Native symbolic netlist format. A file holds a list of modules:
//
//   ((module-name externals
//     ((name kind (nodes) (branches) (values))   ; primitive device
//      (name module (connections))               ; reference to another module
//      ...))
//    ...)
//
// `nil` and `()` both mean the empty list, and the whole form may be wrapped
// in `(defconst *some-name* '<netlist>)`. Value fields are symbolic terms.
Netlist parse_native(std::string_view text, Diagnostics& diags,
                     const std::string& where = "netlist");

std::string print_native(const Netlist& nl);

}  // namespace vwsim
