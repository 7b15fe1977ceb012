#include "vwsim/solver.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

namespace vwsim {

namespace {

std::vector<int> row_gaps(const std::vector<SparseEntry>& row, int n) {
    std::vector<int> g;
    g.reserve(row.size());
    for (std::size_t k = 0; k + 1 < row.size(); ++k)
        g.push_back(row[k + 1].col - row[k].col - 1);
    if (!row.empty()) g.push_back(n - row.back().col - 1);
    return g;
}

// out = x minus m*y, both starting past their shared leading entry, which
// cancels by construction. Exact zeros produced by the subtraction are not
// stored. The gap mirror for the result is built in the same pass.
void eliminate_row(const std::vector<SparseEntry>& x, const std::vector<SparseEntry>& y,
                   double m, int n, std::vector<SparseEntry>& out, std::vector<int>& gaps) {
    out.clear();
    gaps.clear();
    std::size_t i = 1, j = 1;
    auto emit = [&](int col, double val) {
        if (val == 0.0) return;
        if (!out.empty()) gaps.push_back(col - out.back().col - 1);
        out.push_back({col, val});
    };
    while (i < x.size() && j < y.size()) {
        if (x[i].col < y[j].col) {
            emit(x[i].col, x[i].val);
            ++i;
        } else if (x[i].col > y[j].col) {
            emit(y[j].col, -m * y[j].val);
            ++j;
        } else {
            emit(x[i].col, x[i].val - m * y[j].val);
            ++i;
            ++j;
        }
    }
    for (; i < x.size(); ++i) emit(x[i].col, x[i].val);
    for (; j < y.size(); ++j) emit(y[j].col, -m * y[j].val);
    if (!out.empty()) gaps.push_back(n - out.back().col - 1);
}

}  // namespace

ZeroGapIndex build_gap_index(const SparseMatrix& m) {
    ZeroGapIndex z;
    z.reserve(m.rows.size());
    for (const auto& row : m.rows) z.push_back(row_gaps(row, m.n));
    return z;
}

bool gap_index_consistent(const SparseMatrix& m, const ZeroGapIndex& z) {
    if (z.size() != m.rows.size()) return false;
    for (std::size_t r = 0; r < m.rows.size(); ++r)
        if (z[r] != row_gaps(m.rows[r], m.n)) return false;
    return true;
}

SolvePlan factor(const SparseMatrix& a, const FactorOptions& opts) {
    int n = a.n;
    SolvePlan plan;
    plan.n = n;
    plan.perm.assign(n, -1);
    plan.triangular.n = n;
    plan.triangular.rows.resize(n);
    plan.gaps.resize(n);
    plan.back.resize(n);

    std::vector<std::vector<SparseEntry>> w(a.rows);
    std::vector<std::vector<int>> gaps;
    gaps.reserve(n);
    for (const auto& row : w) gaps.push_back(row_gaps(row, n));

    // Largest original magnitude per column scales the singularity threshold.
    std::vector<double> colmax(n, 0.0);
    for (const auto& row : a.rows)
        for (const auto& e : row) colmax[e.col] = std::max(colmax[e.col], std::fabs(e.val));

    // bucket[c]: rows whose leading entry currently sits in column c. Entries
    // go stale when a row is eliminated; staleness is filtered on read.
    std::vector<std::vector<int>> bucket(n);
    for (int r = 0; r < static_cast<int>(w.size()); ++r)
        if (!w[r].empty()) bucket[w[r].front().col].push_back(r);
    std::vector<char> used(w.size(), 0);

    std::vector<int> cands;
    std::vector<SparseEntry> scratch_row;
    std::vector<int> scratch_gaps;
    for (int j = 0; j < n; ++j) {
        cands.clear();
        for (int r : bucket[j])
            if (!used[r] && !w[r].empty() && w[r].front().col == j) cands.push_back(r);

        int pivot_row = -1;
        double pivot_abs = 0.0;
        for (int r : cands) {
            double av = std::fabs(w[r].front().val);
            if (av > pivot_abs || (av == pivot_abs && pivot_row != -1 && r < pivot_row)) {
                pivot_abs = av;
                pivot_row = r;
            }
        }
        if (pivot_row < 0 || pivot_abs == 0.0 || pivot_abs < 1e-12 * colmax[j])
            throw SingularError(j);

        used[pivot_row] = 1;
        plan.perm[j] = pivot_row;
        double pivot = w[pivot_row].front().val;

        for (int r : cands) {
            if (r == pivot_row) continue;
            double m = w[r].front().val / pivot;
            plan.program.push_back({r, pivot_row, -m});
            eliminate_row(w[r], w[pivot_row], m, n, scratch_row, scratch_gaps);
            w[r].swap(scratch_row);
            gaps[r].swap(scratch_gaps);
            if (opts.check_gaps && gaps[r] != row_gaps(w[r], n))
                throw SimError("internal: gap mirror out of step at row " + std::to_string(r));
            if (!w[r].empty()) bucket[w[r].front().col].push_back(r);
        }

        plan.back[j].row = pivot_row;
        plan.back[j].pivot = pivot;
        plan.back[j].tail.assign(w[pivot_row].begin() + 1, w[pivot_row].end());
        plan.triangular.rows[j] = std::move(w[pivot_row]);
        plan.gaps[j] = std::move(gaps[pivot_row]);
    }
    return plan;
}

std::vector<double> solve_with_plan(const SolvePlan& plan, std::vector<double> b) {
    if (static_cast<int>(b.size()) != plan.n)
        throw SimError("right-hand side has length " + std::to_string(b.size()) +
                       ", expected " + std::to_string(plan.n));
    for (const auto& s : plan.program) b[s.target] += s.coeff * b[s.source];
    std::vector<double> x(plan.n, 0.0);
    for (int j = plan.n; j-- > 0;) {
        const BackStep& s = plan.back[j];
        double acc = b[s.row];
        for (const auto& e : s.tail) acc -= e.val * x[e.col];
        x[j] = acc / s.pivot;
    }
    return x;
}

}  // namespace vwsim
