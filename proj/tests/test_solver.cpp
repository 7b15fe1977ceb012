#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "vwsim/solver.hpp"

using namespace vwsim;
using vwsim::test::dense_solve;
using vwsim::test::random_sparse;
using vwsim::test::random_vector;
using vwsim::test::to_dense;

namespace {

std::vector<double> matvec(const SparseMatrix& m, const std::vector<double>& x) {
    std::vector<double> y(m.n, 0.0);
    for (int r = 0; r < m.n; ++r)
        for (const auto& e : m.rows[r]) y[r] += e.val * x[e.col];
    return y;
}

double residual_inf(const SparseMatrix& m, const std::vector<double>& x,
                    const std::vector<double>& b) {
    auto ax = matvec(m, x);
    double worst = 0.0;
    for (int i = 0; i < m.n; ++i) worst = std::max(worst, std::fabs(ax[i] - b[i]));
    return worst;
}

double inf_norm(const std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n = std::max(n, std::fabs(x));
    return n;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i]))
            return false;
    return true;
}

SparseMatrix from_dense(const std::vector<std::vector<double>>& d) {
    SparseMatrix m;
    m.n = static_cast<int>(d.size());
    m.rows.resize(m.n);
    for (int r = 0; r < m.n; ++r)
        for (int c = 0; c < m.n; ++c)
            if (d[r][c] != 0.0) m.rows[r].push_back({c, d[r][c]});
    return m;
}

}  // namespace

TEST_CASE("identity replay returns b unchanged") {
    SparseMatrix eye = from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    SolvePlan plan = factor(eye);
    std::vector<double> b = {5.0, 6.0, -2.5};
    CHECK(solve_with_plan(plan, b) == b);
}

TEST_CASE("a swapped pair forces a pivot") {
    SparseMatrix a = from_dense({{0, 1}, {1, 0}});
    SolvePlan plan = factor(a);
    auto x = solve_with_plan(plan, {2.0, 3.0});
    CHECK(x[0] == 3.0);
    CHECK(x[1] == 2.0);
}

TEST_CASE("dense reference solver sanity") {
    auto x = dense_solve({{2, 0}, {0, 4}}, {2, 4});
    REQUIRE(x.has_value());
    CHECK((*x)[0] == 1.0);
    CHECK((*x)[1] == 1.0);

    // Hilbert-like: ill-ish conditioned but solvable at 3x3.
    std::vector<std::vector<double>> h = {
        {1.0, 1.0 / 2, 1.0 / 3}, {1.0 / 2, 1.0 / 3, 1.0 / 4}, {1.0 / 3, 1.0 / 4, 1.0 / 5}};
    std::vector<double> b = {1.0, 0.0, -1.0};
    auto xs = dense_solve(h, b);
    REQUIRE(xs.has_value());
    double worst = 0.0;
    for (int r = 0; r < 3; ++r) {
        double ax = 0.0;
        for (int c = 0; c < 3; ++c) ax += h[r][c] * (*xs)[c];
        worst = std::max(worst, std::fabs(ax - b[r]));
    }
    CHECK(worst <= 1e-8);

    CHECK(!dense_solve({{1, 2}, {2, 4}}, {1, 1}).has_value());
}

TEST_CASE("sparse factor+solve matches the dense reference") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> size(2, 120);
        int n = size(rng);
        std::uniform_real_distribution<double> dens(0.01, 0.10);
        bool permute = trial % 3 == 0;
        SparseMatrix a = random_sparse(n, dens(rng), rng, permute);
        std::vector<double> b = random_vector(n, rng);

        FactorOptions opts;
        opts.check_gaps = trial % 7 == 0;
        SolvePlan plan = factor(a, opts);
        auto x = solve_with_plan(plan, b);
        auto xd = dense_solve(to_dense(a), b);
        REQUIRE(xd.has_value());

        double scale = 1.0 + inf_norm(b);
        CHECK(residual_inf(a, x, b) <= 1e-9 * scale);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) diff = std::max(diff, std::fabs(x[i] - (*xd)[i]));
        CHECK(diff <= 1e-7 * (1.0 + inf_norm(*xd)));
    }
}

TEST_CASE("plan reuse is bitwise identical to fresh factoring") {
    std::mt19937_64 rng(7);
    SparseMatrix a = random_sparse(60, 0.08, rng, true);
    SolvePlan plan = factor(a);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> b = random_vector(60, rng);
        auto reused = solve_with_plan(plan, b);
        auto fresh = solve_with_plan(factor(a), b);
        CHECK(bitwise_equal(reused, fresh));
    }
}

TEST_CASE("replay determinism") {
    std::mt19937_64 rng(8);
    SparseMatrix a = random_sparse(40, 0.1, rng, false);
    std::vector<double> b = random_vector(40, rng);
    auto x1 = solve_with_plan(factor(a), b);
    auto x2 = solve_with_plan(factor(a), b);
    CHECK(bitwise_equal(x1, x2));
}

TEST_CASE("singular matrices report the stuck column") {
    // Column 1 is identically zero.
    SparseMatrix a = from_dense({{1, 0, 2}, {3, 0, 4}, {5, 0, 6}});
    try {
        factor(a);
        FAIL("expected a singularity");
    } catch (const SingularError& e) {
        CHECK(e.column == 1);
        CHECK(std::string(e.what()).find("singular") != std::string::npos);
    }

    // Second row is a multiple of the first: elimination empties it.
    SparseMatrix dep = from_dense({{1, 2}, {2, 4}});
    CHECK_THROWS_AS(factor(dep), SingularError);

    // Relative threshold: a pivot candidate twelve orders below the column's
    // largest original entry counts as no pivot at all.
    SparseMatrix tiny = from_dense({{1e30, 1.0}, {1.0, 1e-14}});
    try {
        factor(tiny);
        FAIL("expected a singularity");
    } catch (const SingularError& e) {
        CHECK(e.column == 1);
    }
}

TEST_CASE("rhs length is checked") {
    SparseMatrix eye = from_dense({{1, 0}, {0, 1}});
    SolvePlan plan = factor(eye);
    CHECK_THROWS_AS(solve_with_plan(plan, {1.0}), SimError);
}

TEST_CASE("zero-gap mirror stays consistent with the rows") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> size(2, 60);
        int n = size(rng);
        SparseMatrix a = random_sparse(n, 0.1, rng, trial % 2 == 0);
        ZeroGapIndex z = build_gap_index(a);
        CHECK(gap_index_consistent(a, z));

        // check_gaps re-verifies the mirror after every elimination rewrite.
        FactorOptions opts;
        opts.check_gaps = true;
        SolvePlan plan = factor(a, opts);
        CHECK(gap_index_consistent(plan.triangular, plan.gaps));
    }
}

TEST_CASE("gap counts match their definition on a hand case") {
    // Row 0: entries at columns 0 and 5 of an 8-column matrix.
    SparseMatrix m;
    m.n = 8;
    m.rows.resize(8);
    m.rows[0] = {{0, 1.0}, {5, 2.0}};
    for (int r = 1; r < 8; ++r) m.rows[r] = {{r, 1.0}};
    ZeroGapIndex z = build_gap_index(m);
    REQUIRE(z[0].size() == 2);
    CHECK(z[0][0] == 4);  // columns 1..4 are empty
    CHECK(z[0][1] == 2);  // columns 6..7 are empty
    CHECK(gap_index_consistent(m, z));
}
