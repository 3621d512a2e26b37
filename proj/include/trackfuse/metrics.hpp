#pragma once

#include "trackfuse/fusion.hpp"
#include "trackfuse/gaussian.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace trackfuse {

/// sqrt(mean ||e||^2) over the given error vectors; 0 for an empty list.
[[nodiscard]] double rmse(const std::vector<Vector>& errors);

/// e^T P^-1 e.
[[nodiscard]] double nees(const Vector& error, const Matrix& cov);

struct NeesBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided bounds for the M-run average NEES of an n_x-dimensional state:
/// chi-square quantiles of M * n_x dof divided by M.
[[nodiscard]] NeesBounds nees_bounds(int runs, int state_dim, double confidence = 0.95);

struct EllipseSummary {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double a = 0.0;            // semi-major axis
    double b = 0.0;            // semi-minor axis
    double orientation = 0.0;  // angle of the major axis from the first axis, radians in (-pi/2, pi/2]
    double confidence = 0.0;
};

/// Confidence ellipse of the first two state components.
[[nodiscard]] EllipseSummary ellipse_from_cov(const GaussianEstimate& est, double confidence = 0.865);

struct BenchResult {
    std::vector<std::string> fusers;
    std::vector<double> median_ns;  // per fusion call, including weight optimization
    std::vector<double> relative;   // median / median(naive)
    std::size_t calls = 0;
};

/// Independent random estimate pairs of the given dimension for benchmarking.
[[nodiscard]] std::vector<std::pair<GaussianEstimate, GaussianEstimate>> random_estimate_pairs(std::uint64_t seed,
                                                                                              std::size_t count,
                                                                                              Eigen::Index dim);

/// Times every fuser over the same input pairs (weights optimized per call,
/// trace objective). The first fuser is the normalization reference.
[[nodiscard]] BenchResult bench_fusers(const std::vector<std::pair<GaussianEstimate, GaussianEstimate>>& pairs,
                                       const std::vector<Method>& fusers, std::size_t calls, int repeats = 5);

} // namespace trackfuse
