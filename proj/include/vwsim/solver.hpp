#pragma once

#include <vector>

#include "vwsim/diagnostics.hpp"

namespace vwsim {

struct SparseEntry {
    int col;
    double val;
};

// Rows are ordered (column, coefficient) pairs, ascending column, no stored zeros.
struct SparseMatrix {
    int n = 0;
    std::vector<std::vector<SparseEntry>> rows;
};

// Mirror of a matrix: per stored entry, how many zero columns sit between it and
// the next stored entry in its row (the last entry counts up to column n). The
// elimination keeps this in lockstep with every row it rewrites.
using ZeroGapIndex = std::vector<std::vector<int>>;

ZeroGapIndex build_gap_index(const SparseMatrix& m);
bool gap_index_consistent(const SparseMatrix& m, const ZeroGapIndex& z);

struct SingularError : SimError {
    int column;
    explicit SingularError(int col)
        : SimError("matrix is singular (no usable pivot in column " + std::to_string(col) +
                   ")"),
          column(col) {}
};

// b[target] += coeff * b[source], replayed in order during forward elimination.
struct ElimStep {
    int target;
    int source;
    double coeff;
};

// x[k] = (b[row] - sum(tail.val * x[tail.col])) / pivot, for the step solving
// column k; executed from the last column back to the first.
struct BackStep {
    int row;
    double pivot;
    std::vector<SparseEntry> tail;
};

struct SolvePlan {
    int n = 0;
    std::vector<int> perm;          // perm[k] = original row picked as column k's pivot
    std::vector<ElimStep> program;
    std::vector<BackStep> back;     // index k solves column k
    SparseMatrix triangular;        // row k = eliminated pivot row of column k
    ZeroGapIndex gaps;              // mirror of `triangular`
};

struct FactorOptions {
    bool check_gaps = false;  // re-verify the gap mirror after every row rewrite
};

// Partial pivoting by largest leading coefficient; a pivot smaller than
// 1e-12 times the column's largest original entry counts as no pivot at all.
SolvePlan factor(const SparseMatrix& a, const FactorOptions& opts = {});

std::vector<double> solve_with_plan(const SolvePlan& plan, std::vector<double> b);

}  // namespace vwsim
