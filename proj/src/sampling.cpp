#include "trackfuse/sampling.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trackfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b)
{
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double safe_log(double w)
{
    return w > 0.0 ? std::log(w) : kNegInf;
}

double weight_of(double logw)
{
    return std::isnan(logw) ? 0.0 : std::exp(logw);
}

struct PairWeights {
    LogWeight from1;
    LogWeight from2;
};

// Weights for a target proportional to a1(x) b2(x) / den(x) (HMD) or
// a1^w b2^(1-w) (GMD), with samples drawn from a1 or from b2. For HMD the
// denominator den = (1-w) p1 + w p2 uses the full densities p1, p2.
PairWeights pair_weights(const GaussianMixture& a1, const GaussianMixture& b2, const GaussianMixture& p1,
                         const GaussianMixture& p2, double omega, MeanRule rule)
{
    if (rule == MeanRule::gmd) {
        return {
            [&a1, &b2, omega](const Vector& x) { return (1.0 - omega) * (b2.log_pdf(x) - a1.log_pdf(x)); },
            [&a1, &b2, omega](const Vector& x) { return omega * (a1.log_pdf(x) - b2.log_pdf(x)); },
        };
    }
    const double l1 = safe_log(1.0 - omega);
    const double l2 = safe_log(omega);
    auto log_den = [&p1, &p2, l1, l2](const Vector& x) { return log_add(l1 + p1.log_pdf(x), l2 + p2.log_pdf(x)); };
    return {
        [&b2, log_den](const Vector& x) { return b2.log_pdf(x) - log_den(x); },
        [&a1, log_den](const Vector& x) { return a1.log_pdf(x) - log_den(x); },
    };
}

void check_omega(double omega)
{
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw InvalidArgument("fusion weight must lie in [0, 1], got " + std::to_string(omega));
    }
}

WeightedSampleSet run_pair(const GaussianMixture& a1, const GaussianMixture& b2, const GaussianMixture& p1,
                           const GaussianMixture& p2, double omega, MeanRule rule, std::size_t samples,
                           const SampleFusionConfig& cfg, std::uint64_t stream)
{
    const PairWeights w = pair_weights(a1, b2, p1, p2, omega, rule);
    Rng rng(derive_seed(cfg.seed, stream));
    return draw_weighted(a1, b2, w.from1, w.from2, samples, cfg.inflation, cfg.source, rng);
}

} // namespace

SourceRule parse_source_rule(std::string_view name)
{
    if (name == "from_p1" || name == "p1") return SourceRule::from_p1;
    if (name == "from_p2" || name == "p2") return SourceRule::from_p2;
    if (name == "adaptive") return SourceRule::adaptive;
    throw InvalidArgument("unknown sample source rule '" + std::string(name) + "'");
}

void SampleFusionConfig::validate() const
{
    if (samples < 100) {
        throw InvalidArgument("sample count must be at least 100, got " + std::to_string(samples));
    }
    if (!(inflation >= 1.0) || !std::isfinite(inflation)) {
        throw InvalidArgument("inflation factor must be >= 1, got " + std::to_string(inflation));
    }
}

Eigen::ArrayXd WeightedSampleSet::normalized_weights() const
{
    return weights / weights.sum();
}

Vector WeightedSampleSet::mean() const
{
    return points * normalized_weights().matrix();
}

Matrix WeightedSampleSet::cov() const
{
    const Vector mu = mean();
    const Matrix centered = points.colwise() - mu;
    return symmetrized(centered * normalized_weights().matrix().asDiagonal() * centered.transpose());
}

GaussianEstimate WeightedSampleSet::estimate() const
{
    return GaussianEstimate(mean(), cov());
}

Vector WeightedSampleSet::mean_stderr() const
{
    const Eigen::ArrayXd w = normalized_weights();
    const Matrix centered = points.colwise() - mean();
    Vector se(points.rows());
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        se(j) = std::sqrt((w.square() * centered.row(j).transpose().array().square()).sum());
    }
    return se;
}

Matrix WeightedSampleSet::cov_stderr() const
{
    const Eigen::ArrayXd w = normalized_weights();
    const Matrix centered = points.colwise() - mean();
    const Matrix c = cov();
    const Eigen::Index n = points.rows();
    Matrix se(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::ArrayXd dev =
                centered.row(j).transpose().array() * centered.row(k).transpose().array() - c(j, k);
            se(j, k) = std::sqrt((w.square() * dev.square()).sum());
        }
    }
    return se;
}

double WeightedSampleSet::zeta_stderr() const
{
    const double s = static_cast<double>(weights.size());
    const double mu = weights.mean();
    const double var = (weights - mu).square().sum() / (s - 1.0);
    return std::sqrt(var / s);
}

std::vector<bool> choose_sample_source(const Eigen::ArrayXd& w_from_p1, const Eigen::ArrayXd& w_from_p2)
{
    if (w_from_p1.size() != w_from_p2.size()) {
        throw DimensionMismatch("candidate weight lists differ in length");
    }
    std::vector<bool> keep1(static_cast<std::size_t>(w_from_p1.size()));
    for (Eigen::Index i = 0; i < w_from_p1.size(); ++i) {
        keep1[static_cast<std::size_t>(i)] = w_from_p1(i) >= w_from_p2(i);
    }
    return keep1;
}

WeightedSampleSet draw_weighted(const GaussianMixture& src1, const GaussianMixture& src2, const LogWeight& logw1,
                                const LogWeight& logw2, std::size_t samples, double inflation, SourceRule rule,
                                Rng& rng)
{
    if (src1.dim() != src2.dim()) {
        throw DimensionMismatch("sampling sources differ in dimension");
    }
    const auto s = static_cast<Eigen::Index>(samples);
    WeightedSampleSet out;
    out.points.resize(src1.dim(), s);
    out.weights.resize(s);

    if (rule == SourceRule::adaptive) {
        Matrix c1(src1.dim(), s);
        Matrix c2(src1.dim(), s);
        Eigen::ArrayXd w1(s);
        Eigen::ArrayXd w2(s);
        for (Eigen::Index i = 0; i < s; ++i) {
            c1.col(i) = src1.sample(rng, inflation);
            c2.col(i) = src2.sample(rng, inflation);
        }
        for (Eigen::Index i = 0; i < s; ++i) {
            w1(i) = weight_of(logw1(c1.col(i)));
            w2(i) = weight_of(logw2(c2.col(i)));
        }
        const std::vector<bool> keep1 = choose_sample_source(w1, w2);
        for (Eigen::Index i = 0; i < s; ++i) {
            if (keep1[static_cast<std::size_t>(i)]) {
                out.points.col(i) = c1.col(i);
                out.weights(i) = w1(i);
                ++out.from_p1;
            } else {
                out.points.col(i) = c2.col(i);
                out.weights(i) = w2(i);
                ++out.from_p2;
            }
        }
    } else {
        const bool first = rule == SourceRule::from_p1;
        const GaussianMixture& src = first ? src1 : src2;
        const LogWeight& lw = first ? logw1 : logw2;
        for (Eigen::Index i = 0; i < s; ++i) {
            out.points.col(i) = src.sample(rng, inflation);
        }
        for (Eigen::Index i = 0; i < s; ++i) {
            out.weights(i) = weight_of(lw(out.points.col(i)));
        }
        (first ? out.from_p1 : out.from_p2) = samples;
    }

    if (!out.weights.allFinite()) {
        throw DegenerateOverlap("importance weights are not finite");
    }
    const double total = out.weights.sum();
    if (!(total > 0.0)) {
        throw DegenerateOverlap("all importance weights vanished: the densities do not overlap at the "
                                "resolution of the drawn samples");
    }
    out.zeta = total / static_cast<double>(samples);
    return out;
}

WeightedSampleSet fused_samples(const GaussianMixture& p1, const GaussianMixture& p2, double omega, MeanRule rule,
                                const SampleFusionConfig& cfg)
{
    cfg.validate();
    check_omega(omega);
    return run_pair(p1, p2, p1, p2, omega, rule, cfg.samples, cfg, 0);
}

Expectation sample_expectation(const std::function<Vector(const Vector&)>& f, const GaussianMixture& p1,
                               const GaussianMixture& p2, double omega, MeanRule rule,
                               const SampleFusionConfig& cfg)
{
    const WeightedSampleSet set = fused_samples(p1, p2, omega, rule, cfg);
    const Eigen::ArrayXd w = set.normalized_weights();
    Vector acc;
    for (Eigen::Index i = 0; i < set.points.cols(); ++i) {
        const Vector v = f(set.points.col(i));
        if (i == 0) {
            acc = Vector::Zero(v.size());
        }
        acc += w(i) * v;
    }
    return Expectation{acc, set.zeta};
}

GaussianEstimate hmd_s_gaussian(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                const SampleFusionConfig& cfg)
{
    return fused_samples(GaussianMixture(e1), GaussianMixture(e2), omega, MeanRule::hmd, cfg).estimate();
}

GaussianEstimate gmd_s_gaussian(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                const SampleFusionConfig& cfg)
{
    return fused_samples(GaussianMixture(e1), GaussianMixture(e2), omega, MeanRule::gmd, cfg).estimate();
}

MixtureFusion hmd_s_mixture_detailed(const GaussianMixture& m1, const GaussianMixture& m2, double omega,
                                     const SampleFusionConfig& cfg)
{
    cfg.validate();
    check_omega(omega);
    if (m1.dim() != m2.dim()) {
        throw DimensionMismatch("mixtures differ in dimension");
    }
    const std::size_t pairs = m1.size() * m2.size();
    const std::size_t per_pair = std::max<std::size_t>(200, cfg.samples / pairs);

    std::vector<double> zeta(pairs, 0.0);
    std::vector<double> prior(pairs, 0.0);
    std::vector<GaussianEstimate> comps;
    comps.reserve(pairs);
    for (std::size_t m = 0; m < m1.size(); ++m) {
        for (std::size_t n = 0; n < m2.size(); ++n) {
            const std::size_t k = m * m2.size() + n;
            const auto& c1 = m1.components()[m];
            const auto& c2 = m2.components()[n];
            const GaussianMixture a(c1.estimate);
            const GaussianMixture b(c2.estimate);
            const WeightedSampleSet set = run_pair(a, b, m1, m2, omega, MeanRule::hmd, per_pair, cfg, k);
            zeta[k] = set.zeta;
            prior[k] = c1.weight * c2.weight;
            comps.push_back(set.estimate());
        }
    }

    const double zmax = *std::max_element(zeta.begin(), zeta.end());
    std::vector<MixtureComponent> kept;
    std::size_t dropped = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
        if (zeta[k] < 1e-12 * zmax) {
            ++dropped;
            continue;
        }
        kept.push_back(MixtureComponent{prior[k] * zeta[k], comps[k]});
    }
    return MixtureFusion{GaussianMixture::normalized(std::move(kept)), std::move(zeta), dropped};
}

GaussianMixture hmd_s_mixture(const GaussianMixture& m1, const GaussianMixture& m2, double omega,
                              const SampleFusionConfig& cfg)
{
    return hmd_s_mixture_detailed(m1, m2, omega, cfg).mixture;
}

} // namespace trackfuse
