#include "dense_oracle.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

namespace vwsim::test {

std::optional<std::vector<double>> dense_solve(std::vector<std::vector<double>> a,
                                               std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t best = j;
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::fabs(a[i][j]) > std::fabs(a[best][j])) best = i;
        if (a[best][j] == 0.0) return std::nullopt;
        if (best != j) {
            std::swap(a[best], a[j]);
            std::swap(b[best], b[j]);
        }
        for (std::size_t i = j + 1; i < n; ++i) {
            double m = a[i][j] / a[j][j];
            if (m == 0.0) continue;
            for (std::size_t k = j; k < n; ++k) a[i][k] -= m * a[j][k];
            b[i] -= m * b[j];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t j = n; j-- > 0;) {
        double s = b[j];
        for (std::size_t k = j + 1; k < n; ++k) s -= a[j][k] * x[k];
        x[j] = s / a[j][j];
    }
    return x;
}

}  // namespace vwsim::test
