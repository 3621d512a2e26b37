#pragma once

// Gaussian density types and the SPD matrix utilities every fuser relies on.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trackfuse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Symmetrize (A + A^T) / 2.
[[nodiscard]] Matrix symmetrized(const Matrix& a);

/// Symmetrize and check positive definiteness. Smallest eigenvalues in
/// (-1e-10, 1e-12] receive a 1e-10 * I jitter; anything lower throws
/// NotPositiveDefinite naming `what`.
[[nodiscard]] Matrix make_spd(const Matrix& a, std::string_view what = "covariance");

/// Inverse of a symmetric positive-definite matrix via Cholesky.
/// Throws NotPositiveDefinite naming `what` when the factorization fails.
[[nodiscard]] Matrix spd_inverse(const Matrix& a, std::string_view what = "matrix");

/// Number of spd_inverse calls made on the current thread (instrumentation).
[[nodiscard]] std::uint64_t spd_inverse_count() noexcept;

/// Eigenvalues of a symmetric matrix sorted in descending order.
[[nodiscard]] Vector sorted_eigenvalues(const Matrix& a);

/// Loewner order test A <= B: smallest eigenvalue of (B - A) >= -tol.
[[nodiscard]] bool loewner_leq(const Matrix& a, const Matrix& b, double tol = 1e-9);

/// Smallest eigenvalue of a symmetric matrix.
[[nodiscard]] double min_eigenvalue(const Matrix& a);

/// Mean vector plus symmetric positive-definite covariance. Immutable.
class GaussianEstimate {
public:
    GaussianEstimate(Vector mean, const Matrix& cov);

    [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
    [[nodiscard]] const Matrix& cov() const noexcept { return cov_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return mean_.size(); }

    [[nodiscard]] double log_pdf(const Vector& x) const;
    [[nodiscard]] double pdf(const Vector& x) const;

    /// Draw one sample, with the covariance scaled by `inflation`.
    [[nodiscard]] Vector sample(Rng& rng, double inflation = 1.0) const;

private:
    Vector mean_;
    Matrix cov_;
    Matrix chol_lower_;
    double log_norm_ = 0.0;
};

struct MixtureComponent {
    double weight;
    GaussianEstimate estimate;
};

/// Weighted list of Gaussians with weights summing to one.
class GaussianMixture {
public:
    /// Weights must already sum to one (within 1e-9); they are renormalized
    /// exactly afterwards.
    explicit GaussianMixture(std::vector<MixtureComponent> components);
    /// Single-component mixture.
    explicit GaussianMixture(GaussianEstimate single);

    /// Accepts arbitrary positive weights and rescales them to sum to one.
    [[nodiscard]] static GaussianMixture normalized(std::vector<MixtureComponent> components);

    [[nodiscard]] const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return components_.front().estimate.dim(); }

    [[nodiscard]] double log_pdf(const Vector& x) const;
    [[nodiscard]] double pdf(const Vector& x) const;
    [[nodiscard]] Vector sample(Rng& rng, double inflation = 1.0) const;

private:
    std::vector<MixtureComponent> components_;
};

/// Moment-matched Gaussian of a mixture: mean = sum w_i x_i,
/// cov = sum w_i Gamma_i + sum w_i (x_i - mean)(x_i - mean)^T.
[[nodiscard]] GaussianEstimate moment_match(const GaussianMixture& mix);

/// Spread-of-means term of a mixture: sum w_i (x_i - mean)(x_i - mean)^T.
[[nodiscard]] Matrix spread_of_means(const GaussianMixture& mix);

/// Deterministic 64-bit stream seed derived from (seed, index).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Standard-normal vector of dimension n.
[[nodiscard]] Vector standard_normal(Rng& rng, Eigen::Index n);

/// Random SPD matrix A A^T / n + floor I with standard normal A.
[[nodiscard]] Matrix random_spd(Rng& rng, Eigen::Index n, double floor = 0.1);

} // namespace trackfuse
