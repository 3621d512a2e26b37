#pragma once

// Closed-form two-track fusers, fusion-weight optimization and the
// consistency diagnostics built on them.
//
// Weight convention: w1 = w, w2 = 1 - w. CI puts w on the first
// information matrix. HMD-GA uses the denominator mixture (1 - w) p1 + w p2,
// so w = 1 returns the first estimate. ICI keeps the mutual covariance
// w G1 + (1 - w) G2, so its weights are interchanged relative to HMD-GA.

#include "trackfuse/gaussian.hpp"
#include "trackfuse/kalman.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace trackfuse {

enum class Objective { trace, determinant };
enum class WeightSource { optimized, fixed };
enum class Method { naive, ci, ici, hmd_ga, centralized, known_prior };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] std::string to_string(Objective o);
/// Accepts "naive", "ci", "ici", "hmd-ga" (or "hmd_ga"), "centralized", "known-prior".
[[nodiscard]] Method parse_method(std::string_view name);
[[nodiscard]] Objective parse_objective(std::string_view name);

struct FusionWeight {
    double omega = 0.5;
    Objective objective = Objective::trace;
    WeightSource how = WeightSource::fixed;

    FusionWeight() = default;
    // implicit on purpose: a bare double is a fixed weight
    FusionWeight(double w, Objective obj = Objective::trace, WeightSource src = WeightSource::fixed);
};

struct FusedResult {
    GaussianEstimate estimate;
    FusionWeight weight;
    std::optional<GaussianEstimate> mutual;
    Method method;
};

[[nodiscard]] FusedResult naive(const GaussianEstimate& e1, const GaussianEstimate& e2);
[[nodiscard]] FusedResult ci(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w);
[[nodiscard]] FusedResult ici(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w);
[[nodiscard]] FusedResult hmd_ga(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w);

/// Mutual component used by HMD-GA: mean (1-w) x1 + w x2, covariance
/// (1-w) G1 + w G2 + w (1-w) d d^T with d = x1 - x2.
[[nodiscard]] GaussianEstimate hmd_mutual(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega);
/// Mutual component used by ICI: w x1 + (1-w) x2, w G1 + (1-w) G2.
[[nodiscard]] GaussianEstimate ici_mutual(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega);

/// Exact fusion when the common information (mutual) is known: the mutual
/// component is divided out once. nullopt means zero common information.
[[nodiscard]] FusedResult known_prior_fusion(const GaussianEstimate& e1, const GaussianEstimate& e2,
                                             const std::optional<GaussianEstimate>& mutual);

/// Sequential Kalman updates of one prior with every raw measurement.
[[nodiscard]] GaussianEstimate centralized(const GaussianEstimate& prior,
                                           const std::vector<LinearMeasurement>& measurements);

/// Golden-section search on [0, 1] after a 25-point coarse scan. The exact
/// endpoints are compared last; a flat objective returns 0.5.
[[nodiscard]] FusionWeight optimize_weight(const GaussianEstimate& e1, const GaussianEstimate& e2, Method method,
                                           Objective objective = Objective::trace);

/// Optimize the weight (for the weighted rules) and fuse.
[[nodiscard]] FusedResult fuse(Method method, const GaussianEstimate& e1, const GaussianEstimate& e2,
                               Objective objective = Objective::trace);

/// Weighted fusion with a given weight (naive ignores it).
[[nodiscard]] FusedResult fuse_with(Method method, const GaussianEstimate& e1, const GaussianEstimate& e2,
                                    FusionWeight w);

/// Scalar minimizer used by optimize_weight, exposed for testing.
[[nodiscard]] double minimize_unit_interval(const std::function<double(double)>& f, double tol = 1e-4);

// ---- diagnostics -----------------------------------------------------------

struct CorrelatedPair {
    GaussianEstimate est1;
    GaussianEstimate est2;
    Matrix cross;  // E[e1 e2^T]
};

/// w2 G1^-1 G12 Gm^-1 + w1 Gm^-1 G12 G2^-1 - G1^-1 G12 G2^-1, with Gm the
/// HMD-GA mutual covariance of the pair.
[[nodiscard]] Matrix consistency_residual_hmd(const CorrelatedPair& pair, double omega);

/// Solves the residual equation above for Gm^-1 as a Sylvester equation
/// P X + X Q = R. At exactly w = 0.5 the weight is nudged by 1e-6, since the
/// solution is only unique for w1 != w2.
[[nodiscard]] Matrix sylvester_mutual_inverse(const CorrelatedPair& pair, double omega);

struct IciStructureReport {
    Matrix mutual_cov;
    double margin_over_e1 = 0.0;   // min eig(Gm - G1)
    double margin_over_e2 = 0.0;   // min eig(Gm - G2)
    double margin_under_bound = 0.0;  // min eig(w G1 + (1-w) G2 - Gm)
    bool geq_e1 = false;
    bool geq_e2 = false;
    bool leq_bound = false;

    /// True when the lower and upper requirements cannot all hold.
    [[nodiscard]] bool contradiction() const { return !(geq_e1 && geq_e2 && leq_bound); }
};

[[nodiscard]] IciStructureReport ici_structure_check(const GaussianEstimate& e1, const GaussianEstimate& e2,
                                                     double omega, double tol = 1e-9);

/// Draws local estimate pairs whose errors follow the common/independent
/// information structure: G_i = (G_ind_i^-1 + Gm^-1)^-1, G12 = G1 Gm^-1 G2.
class CorrelatedPairGenerator {
public:
    CorrelatedPairGenerator(Matrix ind1, Matrix ind2, std::optional<Matrix> mutual);

    struct Draw {
        Vector truth;
        GaussianEstimate est1;
        GaussianEstimate est2;
        std::optional<GaussianEstimate> mutual;  // (common mean, Gm)
    };

    [[nodiscard]] Draw draw(Rng& rng, const Vector& truth) const;
    [[nodiscard]] CorrelatedPair structure() const;
    [[nodiscard]] const Matrix& cov1() const noexcept { return cov1_; }
    [[nodiscard]] const Matrix& cov2() const noexcept { return cov2_; }
    [[nodiscard]] const Matrix& cross() const noexcept { return cross_; }

private:
    Matrix ind1_, ind2_;
    std::optional<Matrix> mutual_;
    Matrix info1_, info2_, info_m_;
    Matrix chol1_, chol2_, chol_m_;
    Matrix cov1_, cov2_, cross_;
};

struct EigenComparison {
    Vector hmd;   // descending
    Vector ici;   // descending
    double omega_hmd = 0.0;
    double omega_ici = 0.0;
    bool interlaced = false;
};

/// Sorted eigenvalues of the HMD-GA covariance at w and of ICI at the same
/// mixture weights (ICI weight 1 - w), and whether
/// l_n(HMD) <= l_n(ICI) <= l_{n-1}(HMD) <= ... <= l_1(ICI) holds.
[[nodiscard]] EigenComparison hmd_vs_ici_eigen_compare(const GaussianEstimate& e1, const GaussianEstimate& e2,
                                                       double omega, double rel_tol = 1e-9);

} // namespace trackfuse
