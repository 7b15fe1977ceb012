#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vwsim {

// Signal names are shown uppercased in all output; lookups ignore case.
std::string display_name(std::string_view name);
std::string fold_name(std::string_view name);

// One float series per signal over the whole simulation history, rows aligned
// column-for-column with the exact timeline.
struct SimulationRecord {
    std::vector<std::string> names;  // display form, in output order
    std::vector<std::vector<double>> rows;

    // Registers a new empty series; -1 when the folded name is already taken.
    int add_row(std::string_view name);
    int row_of(std::string_view name) const;  // -1 when absent
    std::size_t columns() const { return rows.empty() ? 0 : rows[0].size(); }
    bool rectangular() const;

private:
    std::unordered_map<std::string, int> index_;
};

}  // namespace vwsim
