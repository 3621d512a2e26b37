#pragma once

// HMD / GMD fusion evaluated by weighting samples drawn from the local
// densities themselves (no separate proposal density).

#include "trackfuse/gaussian.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace trackfuse {

enum class SourceRule { from_p1, from_p2, adaptive };
enum class MeanRule { hmd, gmd };

[[nodiscard]] SourceRule parse_source_rule(std::string_view name);

struct SampleFusionConfig {
    std::size_t samples = 5000;
    double inflation = 1.0;  // sampling covariance scale; weights use the original densities
    SourceRule source = SourceRule::adaptive;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Weighted draws; each column of `points` is one sample.
struct WeightedSampleSet {
    Matrix points;
    Eigen::ArrayXd weights;  // raw importance weights
    double zeta = 0.0;       // sum of raw weights / S
    std::size_t from_p1 = 0;
    std::size_t from_p2 = 0;

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
    [[nodiscard]] Eigen::ArrayXd normalized_weights() const;
    [[nodiscard]] Vector mean() const;
    /// Raw weighted second moment about the mean (no small-sample correction).
    [[nodiscard]] Matrix cov() const;
    [[nodiscard]] GaussianEstimate estimate() const;

    /// Delta-method standard errors of the self-normalized moments.
    [[nodiscard]] Vector mean_stderr() const;
    [[nodiscard]] Matrix cov_stderr() const;
    [[nodiscard]] double zeta_stderr() const;
};

/// Log importance weight of a point drawn from one of the two sources.
using LogWeight = std::function<double(const Vector&)>;

/// Draws candidates from src1 and/or src2 according to the source rule. With
/// the adaptive rule one candidate is drawn from each source per index and
/// the one with the larger weight is kept (ties keep the src1 draw).
[[nodiscard]] WeightedSampleSet draw_weighted(const GaussianMixture& src1, const GaussianMixture& src2,
                                              const LogWeight& logw1, const LogWeight& logw2, std::size_t samples,
                                              double inflation, SourceRule rule, Rng& rng);

/// Per-index selection between paired candidates given their weights.
/// Returns true where the p1 candidate is kept.
[[nodiscard]] std::vector<bool> choose_sample_source(const Eigen::ArrayXd& w_from_p1,
                                                     const Eigen::ArrayXd& w_from_p2);

/// Weighted samples of the HMD or GMD of two densities.
[[nodiscard]] WeightedSampleSet fused_samples(const GaussianMixture& p1, const GaussianMixture& p2, double omega,
                                              MeanRule rule, const SampleFusionConfig& cfg);

struct Expectation {
    Vector value;
    double zeta = 0.0;
};

/// E[f] under the fused density together with its normalization constant.
[[nodiscard]] Expectation sample_expectation(const std::function<Vector(const Vector&)>& f,
                                             const GaussianMixture& p1, const GaussianMixture& p2, double omega,
                                             MeanRule rule, const SampleFusionConfig& cfg);

[[nodiscard]] GaussianEstimate hmd_s_gaussian(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                              const SampleFusionConfig& cfg);
[[nodiscard]] GaussianEstimate gmd_s_gaussian(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                              const SampleFusionConfig& cfg);

struct MixtureFusion {
    GaussianMixture mixture;
    std::vector<double> pair_zeta;  // per (m, n) pair, row-major over m
    std::size_t dropped = 0;
};

/// Fuses two mixtures component pair by component pair. Each pair is
/// weighted with the full-mixture denominator, gets max(200, S / (M N))
/// samples and its own stream derived from (seed, pair index). Pairs with
/// zeta below 1e-12 of the largest are dropped.
[[nodiscard]] MixtureFusion hmd_s_mixture_detailed(const GaussianMixture& m1, const GaussianMixture& m2,
                                                   double omega, const SampleFusionConfig& cfg);
[[nodiscard]] GaussianMixture hmd_s_mixture(const GaussianMixture& m1, const GaussianMixture& m2, double omega,
                                            const SampleFusionConfig& cfg);

} // namespace trackfuse
