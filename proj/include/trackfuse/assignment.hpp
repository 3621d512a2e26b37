#pragma once

// Track-to-track association by optimal 2-D assignment.

#include "trackfuse/gaussian.hpp"

#include <limits>
#include <vector>

namespace trackfuse {

/// Mahalanobis distance (xg - xl)^T (Gg + Gl)^-1 (xg - xl); cross-covariance
/// between the tracks is unknown and ignored.
[[nodiscard]] double t2t_cost(const GaussianEstimate& g, const GaussianEstimate& l);

struct AssignmentProblem {
    Matrix cost;  // rows: global tracks, cols: local tracks; +inf = forbidden
    double gate = std::numeric_limits<double>::infinity();
};

struct Matching {
    std::vector<int> row_to_col;  // -1 when the row is unmatched
    std::vector<int> col_to_row;  // -1 when the column is unmatched
    double total = 0.0;           // sum of matched costs + gate per unmatched row/column (finite gate only)
};

/// Optimal assignment. With a finite gate, pairs costing more than the gate
/// are never matched and leaving a row or column unmatched costs `gate`;
/// with an infinite gate, min(rows, cols) pairs are matched.
[[nodiscard]] Matching solve_assignment(const AssignmentProblem& p);

/// Minimum-cost perfect matching of a square matrix (Hungarian method).
/// Returns the column assigned to each row.
[[nodiscard]] std::vector<int> hungarian(const Matrix& cost);

} // namespace trackfuse
