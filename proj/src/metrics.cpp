#include "trackfuse/metrics.hpp"

#include "trackfuse/error.hpp"
#include "trackfuse/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace trackfuse {

double rmse(const std::vector<Vector>& errors)
{
    if (errors.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& e : errors) {
        acc += e.squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

double nees(const Vector& error, const Matrix& cov)
{
    if (error.size() != cov.rows()) {
        throw DimensionMismatch("NEES error and covariance sizes differ");
    }
    Eigen::LLT<Matrix> llt(symmetrized(cov));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("NEES covariance is not positive definite");
    }
    return error.dot(llt.solve(error));
}

NeesBounds nees_bounds(int runs, int state_dim, double confidence)
{
    if (runs < 1 || state_dim < 1) {
        throw InvalidArgument("NEES bounds need at least one run and one state dimension");
    }
    const double dof = static_cast<double>(runs) * state_dim;
    const double tail = 0.5 * (1.0 - confidence);
    return {chi2_quantile(dof, tail) / runs, chi2_quantile(dof, 1.0 - tail) / runs};
}

EllipseSummary ellipse_from_cov(const GaussianEstimate& est, double confidence)
{
    if (est.dim() < 2) {
        throw UnsupportedDimension("ellipse needs at least two state components");
    }
    const Matrix c = est.cov().topLeftCorner(2, 2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(c));
    const double k = chi2_quantile(2.0, confidence);
    EllipseSummary out;
    out.center = est.mean().head<2>();
    out.a = std::sqrt(k * es.eigenvalues()(1));
    out.b = std::sqrt(k * es.eigenvalues()(0));
    const Vector major = es.eigenvectors().col(1);
    double ang = std::atan2(major(1), major(0));
    if (ang > std::numbers::pi / 2) ang -= std::numbers::pi;
    if (ang <= -std::numbers::pi / 2) ang += std::numbers::pi;
    out.orientation = ang;
    out.confidence = confidence;
    return out;
}

std::vector<std::pair<GaussianEstimate, GaussianEstimate>> random_estimate_pairs(std::uint64_t seed,
                                                                                std::size_t count, Eigen::Index dim)
{
    Rng rng(seed);
    std::vector<std::pair<GaussianEstimate, GaussianEstimate>> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GaussianEstimate a(standard_normal(rng, dim), random_spd(rng, dim));
        GaussianEstimate b(standard_normal(rng, dim), random_spd(rng, dim));
        pairs.emplace_back(std::move(a), std::move(b));
    }
    return pairs;
}

BenchResult bench_fusers(const std::vector<std::pair<GaussianEstimate, GaussianEstimate>>& pairs,
                         const std::vector<Method>& fusers, std::size_t calls, int repeats)
{
    if (pairs.empty() || fusers.empty() || calls == 0) {
        throw InvalidArgument("benchmark needs input pairs, fusers and a positive call count");
    }
    using clock = std::chrono::steady_clock;
    BenchResult out;
    out.calls = calls;
    double sink = 0.0;
    auto time_once = [&](Method m, std::size_t n) {
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& pr = pairs[i % pairs.size()];
            sink += fuse(m, pr.first, pr.second).estimate.cov()(0, 0);
        }
        return std::chrono::duration<double, std::nano>(clock::now() - t0).count() / static_cast<double>(n);
    };
    for (Method m : fusers) {
        (void)time_once(m, std::max<std::size_t>(calls / 10, 1));  // warm-up
    }
    std::vector<std::vector<double>> samples(fusers.size());
    // interleave fusers so slow drifts in machine load hit all of them alike
    for (int r = 0; r < repeats; ++r) {
        for (std::size_t f = 0; f < fusers.size(); ++f) {
            samples[f].push_back(time_once(fusers[f], calls));
        }
    }
    for (std::size_t f = 0; f < fusers.size(); ++f) {
        auto& s = samples[f];
        std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
        out.fusers.push_back(to_string(fusers[f]));
        out.median_ns.push_back(s[s.size() / 2]);
    }
    for (double t : out.median_ns) {
        out.relative.push_back(t / out.median_ns.front());
    }
    if (!std::isfinite(sink)) {
        throw Error("benchmark produced non-finite output");
    }
    return out;
}

} // namespace trackfuse
