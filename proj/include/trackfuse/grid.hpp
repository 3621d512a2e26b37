#pragma once

// Dense-grid density engine (1-D and 2-D) used as a numerical oracle for
// normalization constants, fused moments and divergence integrals.

#include "trackfuse/gaussian.hpp"

#include <utility>
#include <vector>

namespace trackfuse {

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    int points = 401;

    [[nodiscard]] double step() const { return (hi - lo) / (points - 1); }
    [[nodiscard]] double at(int i) const { return lo + step() * i; }
};

/// Nonnegative density values on a tensor grid. Values are stored with the
/// last axis varying fastest.
class GridDensity {
public:
    GridDensity(std::vector<GridAxis> axes, Eigen::ArrayXd values);

    [[nodiscard]] const std::vector<GridAxis>& axes() const noexcept { return axes_; }
    [[nodiscard]] const Eigen::ArrayXd& values() const noexcept { return values_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(axes_.size()); }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

    /// Coordinates of the flat index k.
    [[nodiscard]] Vector point(Eigen::Index k) const;
    /// Trapezoid quadrature weights, one per grid point.
    [[nodiscard]] const Eigen::ArrayXd& quadrature() const noexcept { return quad_; }

    [[nodiscard]] double integral() const;
    /// Copy scaled to unit integral. Throws DegenerateOverlap on zero mass.
    [[nodiscard]] GridDensity normalized() const;

    [[nodiscard]] Vector mean() const;
    [[nodiscard]] Matrix cov() const;
    [[nodiscard]] GaussianEstimate moments() const;

    [[nodiscard]] bool same_grid(const GridDensity& other) const;

private:
    std::vector<GridAxis> axes_;
    Eigen::ArrayXd values_;
    Eigen::ArrayXd quad_;
};

/// Per-axis bounds covering mean +- k sigma of every input estimate.
[[nodiscard]] std::vector<GridAxis> envelope_axes(const std::vector<GaussianEstimate>& inputs,
                                                  int points = 401, double k_sigma = 6.0);

[[nodiscard]] GridDensity grid_eval(const GaussianEstimate& density, const std::vector<GridAxis>& axes);
[[nodiscard]] GridDensity grid_eval(const GaussianMixture& density, const std::vector<GridAxis>& axes);

struct GridFusion {
    GridDensity density;  // normalized
    double zeta = 0.0;    // integral of the unnormalized fused density
};

/// p_f proportional to p1 p2 / ((1 - w) p1 + w p2).
[[nodiscard]] GridFusion grid_hmd(const GridDensity& p1, const GridDensity& p2, double omega);

/// Unnormalized harmonic mean values (before normalization), for bound checks.
[[nodiscard]] Eigen::ArrayXd grid_hmd_unnormalized(const GridDensity& p1, const GridDensity& p2, double omega);

/// p_f proportional to p1^w p2^(1 - w).
[[nodiscard]] GridFusion grid_gmd(const GridDensity& p1, const GridDensity& p2, double omega);

/// Normalized product p1 p2 (naive fusion of densities).
[[nodiscard]] GridFusion grid_product(const GridDensity& p1, const GridDensity& p2);

/// Weighted average Pearson divergence
///   w * 0.5 * int (q - p1)^2 / p1 + (1 - w) * 0.5 * int (q - p2)^2 / p2,
/// skipping points where the reference density vanishes.
[[nodiscard]] double pearson_objective(const Eigen::ArrayXd& q, const GridDensity& p1, const GridDensity& p2,
                                       double omega);

} // namespace trackfuse
