#include "vwsim/record.hpp"

namespace vwsim {

std::string display_name(std::string_view name) {
    std::string s(name);
    for (char& c : s)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return s;
}

std::string fold_name(std::string_view name) {
    std::string s(name);
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

int SimulationRecord::add_row(std::string_view name) {
    auto [it, fresh] = index_.emplace(fold_name(name), static_cast<int>(names.size()));
    if (!fresh) return -1;
    names.push_back(display_name(name));
    rows.emplace_back();
    return it->second;
}

int SimulationRecord::row_of(std::string_view name) const {
    auto it = index_.find(fold_name(name));
    return it == index_.end() ? -1 : it->second;
}

bool SimulationRecord::rectangular() const {
    for (const auto& r : rows)
        if (r.size() != rows[0].size()) return false;
    return true;
}

}  // namespace vwsim
