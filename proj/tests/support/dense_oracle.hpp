#pragma once

#include <optional>
#include <vector>

namespace vwsim::test {

// Textbook Gaussian elimination with partial pivoting on the augmented dense
// matrix, back-substitution at the end. Written as the independent reference
// for the sparse solver; keep it boring. Returns nullopt on a singular system.
std::optional<std::vector<double>> dense_solve(std::vector<std::vector<double>> a,
                                               std::vector<double> b);

}  // namespace vwsim::test
