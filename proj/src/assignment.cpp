#include "trackfuse/assignment.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trackfuse {

double t2t_cost(const GaussianEstimate& g, const GaussianEstimate& l)
{
    if (g.dim() != l.dim()) {
        throw DimensionMismatch("track dimensions differ");
    }
    const Vector d = g.mean() - l.mean();
    return d.dot(spd_inverse(g.cov() + l.cov(), "summed track covariance") * d);
}

std::vector<int> hungarian(const Matrix& cost)
{
    if (cost.rows() != cost.cols()) {
        throw DimensionMismatch("hungarian() needs a square cost matrix");
    }
    const int n = static_cast<int>(cost.rows());
    if (n == 0) {
        return {};
    }
    const double inf = std::numeric_limits<double>::infinity();
    // potentials, 1-based with a virtual column 0
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0);
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    }
    return row_to_col;
}

Matching solve_assignment(const AssignmentProblem& prob)
{
    const auto ng = static_cast<int>(prob.cost.rows());
    const auto nl = static_cast<int>(prob.cost.cols());
    Matching m;
    m.row_to_col.assign(static_cast<std::size_t>(ng), -1);
    m.col_to_row.assign(static_cast<std::size_t>(nl), -1);
    if (ng == 0 || nl == 0) {
        if (std::isfinite(prob.gate)) {
            m.total = prob.gate * (ng + nl);
        }
        return m;
    }
    // forbidden entries become a finite penalty far above any admissible total
    double scale = 1.0;
    for (int i = 0; i < ng; ++i) {
        for (int j = 0; j < nl; ++j) {
            const double c = prob.cost(i, j);
            if (std::isnan(c) || c < 0.0) {
                throw InvalidArgument("assignment costs must be nonnegative");
            }
            if (std::isfinite(c) && (c <= prob.gate)) {
                scale = std::max(scale, c);
            }
        }
    }
    const bool gated = std::isfinite(prob.gate);
    if (gated) {
        scale = std::max(scale, prob.gate);
    }
    const double big = 1e6 * scale * (ng + nl + 1);
    auto admissible = [&](int i, int j) {
        const double c = prob.cost(i, j);
        return std::isfinite(c) && c <= prob.gate;
    };

    Matrix a;
    if (gated) {
        // rows: globals then one dummy per local; cols: locals then one dummy per global
        const int n = ng + nl;
        a = Matrix::Constant(n, n, big);
        for (int i = 0; i < ng; ++i) {
            for (int j = 0; j < nl; ++j) {
                if (admissible(i, j)) {
                    a(i, j) = prob.cost(i, j);
                }
            }
            a(i, nl + i) = prob.gate;
        }
        for (int j = 0; j < nl; ++j) {
            a(ng + j, j) = prob.gate;
        }
        a.bottomRightCorner(nl, ng).setZero();
    } else {
        const int n = std::max(ng, nl);
        a = Matrix::Zero(n, n);
        for (int i = 0; i < ng; ++i) {
            for (int j = 0; j < nl; ++j) {
                a(i, j) = std::isfinite(prob.cost(i, j)) ? prob.cost(i, j) : big;
            }
        }
    }

    const std::vector<int> sol = hungarian(a);
    for (int i = 0; i < ng; ++i) {
        const int j = sol[static_cast<std::size_t>(i)];
        if (j < nl && admissible(i, j)) {
            m.row_to_col[static_cast<std::size_t>(i)] = j;
            m.col_to_row[static_cast<std::size_t>(j)] = i;
            m.total += prob.cost(i, j);
        }
    }
    if (gated) {
        for (int i = 0; i < ng; ++i) {
            if (m.row_to_col[static_cast<std::size_t>(i)] < 0) m.total += prob.gate;
        }
        for (int j = 0; j < nl; ++j) {
            if (m.col_to_row[static_cast<std::size_t>(j)] < 0) m.total += prob.gate;
        }
    }
    return m;
}

} // namespace trackfuse
