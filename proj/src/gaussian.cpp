#include "trackfuse/gaussian.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace trackfuse {

namespace {

thread_local std::uint64_t g_inverse_count = 0;

constexpr double kJitterFloor = -1e-10;
constexpr double kJitterCeil = 1e-12;
constexpr double kJitter = 1e-10;

} // namespace

Matrix symmetrized(const Matrix& a)
{
    return 0.5 * (a + a.transpose());
}

double min_eigenvalue(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix make_spd(const Matrix& a, std::string_view what)
{
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionMismatch(std::string(what) + " must be a non-empty square matrix");
    }
    if (!a.allFinite()) {
        throw NotPositiveDefinite(std::string(what) + " has non-finite entries");
    }
    Matrix s = symmetrized(a);
    const double lo = min_eigenvalue(s);
    if (lo > kJitterCeil) {
        return s;
    }
    if (lo > kJitterFloor) {
        s.diagonal().array() += kJitter;
        return s;
    }
    throw NotPositiveDefinite(std::string(what) + " is not positive definite (min eigenvalue "
                              + std::to_string(lo) + ")");
}

Matrix spd_inverse(const Matrix& a, std::string_view what)
{
    ++g_inverse_count;
    Eigen::LLT<Matrix> llt(symmetrized(a));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cannot invert " + std::string(what) + ": not positive definite");
    }
    Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
    return symmetrized(inv);
}

std::uint64_t spd_inverse_count() noexcept
{
    return g_inverse_count;
}

Vector sorted_eigenvalues(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

bool loewner_leq(const Matrix& a, const Matrix& b, double tol)
{
    return min_eigenvalue(b - a) >= -tol;
}

GaussianEstimate::GaussianEstimate(Vector mean, const Matrix& cov)
    : mean_(std::move(mean))
{
    if (cov.rows() != mean_.size()) {
        throw DimensionMismatch("covariance size " + std::to_string(cov.rows())
                                + " does not match mean size " + std::to_string(mean_.size()));
    }
    if (!mean_.allFinite()) {
        throw InvalidArgument("mean has non-finite entries");
    }
    cov_ = make_spd(cov);
    Eigen::LLT<Matrix> llt(cov_);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("covariance Cholesky factorization failed");
    }
    chol_lower_ = llt.matrixL();
    const double log_det = 2.0 * chol_lower_.diagonal().array().log().sum();
    log_norm_ = -0.5 * (static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) + log_det);
}

double GaussianEstimate::log_pdf(const Vector& x) const
{
    const Vector z = chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
    return log_norm_ - 0.5 * z.squaredNorm();
}

double GaussianEstimate::pdf(const Vector& x) const
{
    return std::exp(log_pdf(x));
}

Vector GaussianEstimate::sample(Rng& rng, double inflation) const
{
    return mean_ + std::sqrt(inflation) * (chol_lower_ * standard_normal(rng, dim()));
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components))
{
    if (components_.empty()) {
        throw InvalidArgument("mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0) || c.weight > 1.0 + 1e-12) {
            throw InvalidArgument("mixture weights must lie in (0, 1]");
        }
        if (c.estimate.dim() != components_.front().estimate.dim()) {
            throw DimensionMismatch("mixture components have different dimensions");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("mixture weights sum to " + std::to_string(total) + ", expected 1");
    }
    for (auto& c : components_) {
        c.weight /= total;
    }
}

GaussianMixture::GaussianMixture(GaussianEstimate single)
    : components_{MixtureComponent{1.0, std::move(single)}}
{
}

GaussianMixture GaussianMixture::normalized(std::vector<MixtureComponent> components)
{
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw InvalidArgument("mixture weights must be positive and finite");
        }
        total += c.weight;
    }
    for (auto& c : components) {
        c.weight /= total;
    }
    return GaussianMixture(std::move(components));
}

double GaussianMixture::log_pdf(const Vector& x) const
{
    // log-sum-exp over components
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(components_.size());
    for (const auto& c : components_) {
        terms.push_back(std::log(c.weight) + c.estimate.log_pdf(x));
        best = std::max(best, terms.back());
    }
    if (!std::isfinite(best)) {
        return best;
    }
    double acc = 0.0;
    for (double t : terms) {
        acc += std::exp(t - best);
    }
    return best + std::log(acc);
}

double GaussianMixture::pdf(const Vector& x) const
{
    double acc = 0.0;
    for (const auto& c : components_) {
        acc += c.weight * c.estimate.pdf(x);
    }
    return acc;
}

Vector GaussianMixture::sample(Rng& rng, double inflation) const
{
    if (components_.size() == 1) {
        return components_.front().estimate.sample(rng, inflation);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double pick = u(rng);
    for (const auto& c : components_) {
        pick -= c.weight;
        if (pick <= 0.0) {
            return c.estimate.sample(rng, inflation);
        }
    }
    return components_.back().estimate.sample(rng, inflation);
}

Matrix spread_of_means(const GaussianMixture& mix)
{
    const Eigen::Index n = mix.dim();
    Vector mean = Vector::Zero(n);
    for (const auto& c : mix.components()) {
        mean += c.weight * c.estimate.mean();
    }
    Matrix spread = Matrix::Zero(n, n);
    for (const auto& c : mix.components()) {
        const Vector d = c.estimate.mean() - mean;
        spread += c.weight * d * d.transpose();
    }
    return spread;
}

GaussianEstimate moment_match(const GaussianMixture& mix)
{
    if (mix.size() == 1) {
        return mix.components().front().estimate;
    }
    const Eigen::Index n = mix.dim();
    Vector mean = Vector::Zero(n);
    Matrix cov = Matrix::Zero(n, n);
    for (const auto& c : mix.components()) {
        mean += c.weight * c.estimate.mean();
        cov += c.weight * c.estimate.cov();
    }
    cov += spread_of_means(mix);
    return GaussianEstimate(std::move(mean), cov);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    // splitmix64 over the combined key
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Vector standard_normal(Rng& rng, Eigen::Index n)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = nd(rng);
    }
    return v;
}

Matrix random_spd(Rng& rng, Eigen::Index n, double floor)
{
    Matrix a(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        a.col(c) = standard_normal(rng, n);
    }
    return symmetrized(a * a.transpose() / static_cast<double>(n)) + floor * Matrix::Identity(n, n);
}

} // namespace trackfuse
