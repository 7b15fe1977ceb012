#pragma once

#include <string>
#include <vector>

namespace vwsim {

// Full command-line surface. Returns the process exit status: 0 only when no
// error diagnostics were produced. Output and diagnostics go to the standard
// streams; tests drive this through the vector overload.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace vwsim
