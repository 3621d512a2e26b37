#include "test_util.hpp"

#include "trackfuse/assignment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

using namespace trackfuse;
using namespace tftest;

namespace {

double brute_force_square(const Matrix& c)
{
    std::vector<int> perm(static_cast<std::size_t>(c.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += c(static_cast<Eigen::Index>(i), perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exhaustive gated assignment: every row is matched to an unused admissible
// column or left unmatched at cost `gate`.
double brute_force_gated(const Matrix& c, double gate, Eigen::Index row, std::vector<bool>& used)
{
    if (row == c.rows()) {
        const auto free_cols = std::count(used.begin(), used.end(), false);
        return gate * static_cast<double>(free_cols);
    }
    double best = gate + brute_force_gated(c, gate, row + 1, used);
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj] || !(c(row, j) <= gate)) continue;
        used[uj] = true;
        best = std::min(best, c(row, j) + brute_force_gated(c, gate, row + 1, used));
        used[uj] = false;
    }
    return best;
}

Matrix random_cost(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::uniform_real_distribution<double> u(0.0, 10.0);
    Matrix c(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) c(i, j) = u(rng);
    return c;
}

double matched_cost(const Matrix& c, const std::vector<int>& row_to_col)
{
    double s = 0.0;
    for (std::size_t i = 0; i < row_to_col.size(); ++i)
        if (row_to_col[i] >= 0) s += c(static_cast<Eigen::Index>(i), row_to_col[i]);
    return s;
}

} // namespace

TEST(T2tCost, ScalarExample)
{
    const GaussianEstimate g = scalar(0.0, 1.0);
    const GaussianEstimate l = scalar(2.0, 1.0);
    EXPECT_DOUBLE_EQ(t2t_cost(g, l), 2.0);
    EXPECT_DOUBLE_EQ(t2t_cost(l, g), 2.0);
}

TEST(T2tCost, SymmetricInTwoDimensions)
{
    EXPECT_NEAR(t2t_cost(pair_p1(), pair_p2()), t2t_cost(pair_p2(), pair_p1()), 1e-12);
    EXPECT_DOUBLE_EQ(t2t_cost(pair_p1(), pair_p1()), 0.0);
}

TEST(Hungarian, TwoByTwo)
{
    const Matrix c = mat({1.0, 10.0, 10.0, 1.0});
    const std::vector<int> a = hungarian(c);
    EXPECT_EQ(a, (std::vector<int>{0, 1}));
    const Matching m = solve_assignment(AssignmentProblem{c});
    EXPECT_DOUBLE_EQ(m.total, 2.0);
}

TEST(Hungarian, MatchesBruteForceOnRandomSquares)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        const Matrix c = random_cost(rng, n, n);
        const std::vector<int> a = hungarian(c);
        std::vector<int> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], static_cast<int>(i));
        EXPECT_NEAR(matched_cost(c, a), brute_force_square(c), 1e-9) << "trial " << trial;
    }
}

TEST(SolveAssignment, RectangularWithoutGate)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix c = random_cost(rng, 3, 5);
        const Matching m = solve_assignment(AssignmentProblem{c});
        int matched = 0;
        for (int j : m.row_to_col) matched += j >= 0;
        EXPECT_EQ(matched, 3);
        // pad to square with zero-cost dummy rows
        Matrix sq = Matrix::Zero(5, 5);
        sq.topRows(3) = c;
        EXPECT_NEAR(matched_cost(c, m.row_to_col), brute_force_square(sq), 1e-9);
    }
}

TEST(SolveAssignment, GatedMatchesBruteForce)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index rows = 1 + trial % 5;
        const Eigen::Index cols = 1 + (trial / 5) % 5;
        Matrix c = random_cost(rng, rows, cols);
        if (trial % 3 == 0) c(0, 0) = std::numeric_limits<double>::infinity();
        const double gate = 4.0;
        const Matching m = solve_assignment(AssignmentProblem{c, gate});
        std::vector<bool> used(static_cast<std::size_t>(cols), false);
        EXPECT_NEAR(m.total, brute_force_gated(c, gate, 0, used), 1e-9) << "trial " << trial;
        for (std::size_t i = 0; i < m.row_to_col.size(); ++i) {
            const int j = m.row_to_col[i];
            if (j < 0) continue;
            EXPECT_LE(c(static_cast<Eigen::Index>(i), j), gate);
            EXPECT_EQ(m.col_to_row[static_cast<std::size_t>(j)], static_cast<int>(i));
        }
    }
}

TEST(SolveAssignment, EverythingOutsideGate)
{
    const Matrix c = mat({9.0, 9.0, 9.0, 9.0});
    const Matching m = solve_assignment(AssignmentProblem{c, 1.0});
    EXPECT_EQ(m.row_to_col, (std::vector<int>{-1, -1}));
    EXPECT_DOUBLE_EQ(m.total, 4.0);
}

TEST(SolveAssignment, EmptyProblem)
{
    const Matching m = solve_assignment(AssignmentProblem{Matrix(0, 3), 1.0});
    EXPECT_TRUE(m.row_to_col.empty());
    EXPECT_EQ(m.col_to_row, (std::vector<int>{-1, -1, -1}));
}
