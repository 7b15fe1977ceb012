#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vwsim {

// Runtime failures (singular matrix, evaluation faults, bad state files) are thrown;
// structural problems found while checking inputs are collected as diagnostics so a
// single run reports everything wrong with a netlist.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : SimError {
    using SimError::SimError;
};

enum class Severity { warning, error };

struct Diagnostic {
    Severity severity = Severity::error;
    std::string where;    // module producing the diagnostic ("netlist", "elab", ...)
    std::string message;
    int line = 0;         // 0 when no source location applies
};

using Diagnostics = std::vector<Diagnostic>;

inline void diag_error(Diagnostics& ds, std::string where, std::string msg, int line = 0) {
    ds.push_back({Severity::error, std::move(where), std::move(msg), line});
}

inline void diag_warning(Diagnostics& ds, std::string where, std::string msg, int line = 0) {
    ds.push_back({Severity::warning, std::move(where), std::move(msg), line});
}

inline bool has_errors(const Diagnostics& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::error) return true;
    return false;
}

inline std::string format_diagnostic(const Diagnostic& d) {
    std::string s = d.severity == Severity::error ? "error: " : "warning: ";
    s += d.where;
    s += ": ";
    s += d.message;
    if (d.line > 0) {
        s += " (line ";
        s += std::to_string(d.line);
        s += ")";
    }
    return s;
}

}  // namespace vwsim
