// Timing harness for the sparse solver: factor once, then replay the plan for
// many right-hand sides, against matrices like the ones transient runs build.
// Emits a CSV of (n, nnz, factor_ms, solve_ms, solves_per_factor_break_even).

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "vwsim/solver.hpp"

using namespace vwsim;

namespace {

SparseMatrix random_system(int n, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    SparseMatrix m;
    m.n = n;
    m.rows.resize(n);
    for (int r = 0; r < n; ++r) {
        double diag = 0.0;
        for (int c = 0; c < n; ++c) {
            if (c == r) continue;
            if (pick(rng) < density) {
                double v = val(rng);
                m.rows[r].push_back({c, v});
                diag += std::abs(v);
            }
        }
        // strict diagonal dominance keeps the run pivot-stable
        m.rows[r].push_back({r, diag + 1.0});
        std::sort(m.rows[r].begin(), m.rows[r].end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
    }
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    int solves = argc > 1 ? std::atoi(argv[1]) : 100;
    std::mt19937_64 rng(20260816);
    double sink = 0.0;
    std::printf("n,nnz,factor_ms,solve_ms,break_even\n");
    for (int n : {50, 200, 500, 1000, 2000}) {
        double density = 4.0 / n;  // a few entries per row, like MNA stamps
        SparseMatrix m = random_system(n, density, rng);
        std::size_t nnz = 0;
        for (const auto& row : m.rows) nnz += row.size();

        auto t0 = std::chrono::steady_clock::now();
        SolvePlan plan = factor(m);
        auto t1 = std::chrono::steady_clock::now();

        std::uniform_real_distribution<double> val(-1.0, 1.0);
        std::vector<double> b(n);
        auto t2 = std::chrono::steady_clock::now();
        for (int s = 0; s < solves; ++s) {
            for (auto& v : b) v = val(rng);
            sink += solve_with_plan(plan, b)[0];
        }
        auto t3 = std::chrono::steady_clock::now();

        double fms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        double sms = std::chrono::duration<double, std::milli>(t3 - t2).count() / solves;
        std::printf("%d,%zu,%.3f,%.4f,%.1f\n", n, nnz, fms, sms, sms > 0 ? fms / sms : 0.0);
    }
    return sink == 12345.0 ? 1 : 0;  // keep the loop from optimizing away
}
