#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vwsim/record.hpp"

namespace vwsim {

// Header of display names, then one row per time point. Values are printed
// with shortest round-trip formatting, so read_csv(write_csv(r)) == r bitwise.
void write_csv(const SimulationRecord& rec, std::ostream& os);
// Same, restricted to the given record rows, in the given order.
void write_csv(const SimulationRecord& rec, const std::vector<int>& rows, std::ostream& os);

SimulationRecord read_csv(std::istream& is);

// Sub-record in request order; unknown names throw a SimError that lists what
// is available. Derived currents must be materialized first (Engine::row_for).
SimulationRecord extract_records(const SimulationRecord& rec,
                                 const std::vector<std::string>& names);

}  // namespace vwsim
