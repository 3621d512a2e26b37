#include "trackfuse/fusion.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace trackfuse {

namespace {

void check_pair(const GaussianEstimate& e1, const GaussianEstimate& e2)
{
    if (e1.dim() != e2.dim()) {
        throw DimensionMismatch("cannot fuse estimates of dimension " + std::to_string(e1.dim()) + " and "
                                + std::to_string(e2.dim()));
    }
}

void check_omega(double omega)
{
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw InvalidArgument("fusion weight must lie in [0, 1], got " + std::to_string(omega));
    }
}

double score(const Matrix& m, Objective obj)
{
    return obj == Objective::trace ? m.trace() : m.determinant();
}

std::string eig_list(const Matrix& m)
{
    std::ostringstream os;
    os << sorted_eigenvalues(m).transpose();
    return os.str();
}

// Information-form fusion with one mutual component subtracted.
GaussianEstimate subtract_mutual(const Matrix& i1, const Vector& x1, const Matrix& i2, const Vector& x2,
                                 const Matrix& im, const Vector& gm, std::string_view who)
{
    const Matrix info = i1 + i2 - im;
    Matrix cov;
    try {
        cov = spd_inverse(info, std::string(who) + " fused information");
    } catch (const NotPositiveDefinite&) {
        throw NotPositiveDefinite(std::string(who) + ": fused information matrix is not positive definite "
                                  "(eigenvalues " + eig_list(info) + ")");
    }
    return GaussianEstimate(cov * (i1 * x1 + i2 * x2 - im * gm), cov);
}

} // namespace

FusionWeight::FusionWeight(double w, Objective obj, WeightSource src)
    : omega(w)
    , objective(obj)
    , how(src)
{
    check_omega(w);
}

std::string to_string(Method m)
{
    switch (m) {
    case Method::naive: return "naive";
    case Method::ci: return "ci";
    case Method::ici: return "ici";
    case Method::hmd_ga: return "hmd-ga";
    case Method::centralized: return "centralized";
    case Method::known_prior: return "known-prior";
    }
    return "unknown";
}

std::string to_string(Objective o)
{
    return o == Objective::trace ? "trace" : "determinant";
}

Method parse_method(std::string_view name)
{
    if (name == "naive") return Method::naive;
    if (name == "ci") return Method::ci;
    if (name == "ici") return Method::ici;
    if (name == "hmd-ga" || name == "hmd_ga") return Method::hmd_ga;
    if (name == "centralized") return Method::centralized;
    if (name == "known-prior" || name == "known_prior") return Method::known_prior;
    throw InvalidArgument("unknown fuser '" + std::string(name) + "'");
}

Objective parse_objective(std::string_view name)
{
    if (name == "trace") return Objective::trace;
    if (name == "determinant" || name == "det") return Objective::determinant;
    throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

FusedResult naive(const GaussianEstimate& e1, const GaussianEstimate& e2)
{
    check_pair(e1, e2);
    const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
    const Matrix cov = spd_inverse(i1 + i2, "naive information");
    return {GaussianEstimate(cov * (i1 * e1.mean() + i2 * e2.mean()), cov), FusionWeight(0.5), std::nullopt,
            Method::naive};
}

FusedResult ci(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w)
{
    check_pair(e1, e2);
    if (w.omega == 1.0) {
        return {e1, w, std::nullopt, Method::ci};
    }
    if (w.omega == 0.0) {
        return {e2, w, std::nullopt, Method::ci};
    }
    const Matrix i1 = w.omega * spd_inverse(e1.cov(), "first covariance");
    const Matrix i2 = (1.0 - w.omega) * spd_inverse(e2.cov(), "second covariance");
    const Matrix cov = spd_inverse(i1 + i2, "CI information");
    return {GaussianEstimate(cov * (i1 * e1.mean() + i2 * e2.mean()), cov), w, std::nullopt, Method::ci};
}

GaussianEstimate hmd_mutual(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega)
{
    check_pair(e1, e2);
    check_omega(omega);
    const Vector d = e1.mean() - e2.mean();
    const Matrix cov = (1.0 - omega) * e1.cov() + omega * e2.cov() + omega * (1.0 - omega) * d * d.transpose();
    return GaussianEstimate((1.0 - omega) * e1.mean() + omega * e2.mean(), cov);
}

GaussianEstimate ici_mutual(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega)
{
    check_pair(e1, e2);
    check_omega(omega);
    return GaussianEstimate(omega * e1.mean() + (1.0 - omega) * e2.mean(),
                            omega * e1.cov() + (1.0 - omega) * e2.cov());
}

FusedResult ici(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w)
{
    GaussianEstimate m = ici_mutual(e1, e2, w.omega);
    const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
    const Matrix im = spd_inverse(m.cov(), "ICI mutual covariance");
    GaussianEstimate f = subtract_mutual(i1, e1.mean(), i2, e2.mean(), im, m.mean(), "ICI");
    return {std::move(f), w, std::move(m), Method::ici};
}

FusedResult hmd_ga(const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w)
{
    GaussianEstimate m = hmd_mutual(e1, e2, w.omega);
    const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
    const Matrix im = spd_inverse(m.cov(), "HMD-GA mutual covariance");
    try {
        GaussianEstimate f = subtract_mutual(i1, e1.mean(), i2, e2.mean(), im, m.mean(), "HMD-GA");
        return {std::move(f), w, std::move(m), Method::hmd_ga};
    } catch (const NotPositiveDefinite& ex) {
        throw NotPositiveDefinite(std::string(ex.what()) + "; mutual covariance eigenvalues "
                                  + eig_list(m.cov()));
    }
}

FusedResult known_prior_fusion(const GaussianEstimate& e1, const GaussianEstimate& e2,
                               const std::optional<GaussianEstimate>& mutual)
{
    check_pair(e1, e2);
    const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
    const Eigen::Index n = e1.dim();
    Matrix im = Matrix::Zero(n, n);
    Vector gm = Vector::Zero(n);
    if (mutual) {
        if (mutual->dim() != n) {
            throw DimensionMismatch("mutual component dimension does not match the estimates");
        }
        im = spd_inverse(mutual->cov(), "mutual covariance");
        gm = mutual->mean();
    }
    GaussianEstimate f = subtract_mutual(i1, e1.mean(), i2, e2.mean(), im, gm, "known-prior fusion");
    return {std::move(f), FusionWeight(0.5), mutual, Method::known_prior};
}

GaussianEstimate centralized(const GaussianEstimate& prior, const std::vector<LinearMeasurement>& measurements)
{
    GaussianEstimate est = prior;
    for (const auto& m : measurements) {
        est = kf_update(est, m);
    }
    return est;
}

double minimize_unit_interval(const std::function<double(double)>& f, double tol)
{
    constexpr int kScan = 25;
    std::array<double, kScan> xs{};
    std::array<double, kScan> fs{};
    for (int i = 0; i < kScan; ++i) {
        xs[i] = i == kScan - 1 ? 1.0 : static_cast<double>(i) / (kScan - 1);
        fs[i] = f(xs[i]);
    }
    const auto [lo_it, hi_it] = std::minmax_element(fs.begin(), fs.end());
    if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*lo_it))) {
        return 0.5;
    }
    const auto best_i = static_cast<int>(lo_it - fs.begin());
    double a = xs[std::max(best_i - 1, 0)];
    double b = xs[std::min(best_i + 1, kScan - 1)];

    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    double x = 0.5 * (a + b);
    double fx = f(x);
    // coarse-scan points include the exact endpoints, which is where the
    // degenerate scalar cases end up
    for (int i = 0; i < kScan; ++i) {
        if (fs[i] < fx) {
            fx = fs[i];
            x = xs[i];
        }
    }
    return x;
}

FusionWeight optimize_weight(const GaussianEstimate& e1, const GaussianEstimate& e2, Method method,
                             Objective objective)
{
    check_pair(e1, e2);
    std::function<double(double)> cost;
    switch (method) {
    case Method::hmd_ga: {
        const Vector d = e1.mean() - e2.mean();
        const Matrix spread = d * d.transpose();
        cost = [&e1, &e2, spread, objective](double w) {
            const Matrix gm = (1.0 - w) * e1.cov() + w * e2.cov() + w * (1.0 - w) * spread;
            return score(spd_inverse(gm, "HMD-GA mutual covariance"), objective);
        };
        break;
    }
    case Method::ci: {
        const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
        const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
        cost = [i1, i2, objective](double w) {
            return score(spd_inverse(w * i1 + (1.0 - w) * i2, "CI information"), objective);
        };
        break;
    }
    case Method::ici: {
        const Matrix i1 = spd_inverse(e1.cov(), "first covariance");
        const Matrix i2 = spd_inverse(e2.cov(), "second covariance");
        cost = [&e1, &e2, i1, i2, objective](double w) {
            const Matrix im = spd_inverse(w * e1.cov() + (1.0 - w) * e2.cov(), "ICI mutual covariance");
            return score(spd_inverse(i1 + i2 - im, "ICI information"), objective);
        };
        break;
    }
    default:
        return FusionWeight(0.5, objective, WeightSource::fixed);
    }
    return FusionWeight(minimize_unit_interval(cost), objective, WeightSource::optimized);
}

FusedResult fuse_with(Method method, const GaussianEstimate& e1, const GaussianEstimate& e2, FusionWeight w)
{
    switch (method) {
    case Method::naive: return naive(e1, e2);
    case Method::ci: return ci(e1, e2, w);
    case Method::ici: return ici(e1, e2, w);
    case Method::hmd_ga: return hmd_ga(e1, e2, w);
    default:
        throw InvalidArgument("fuser '" + to_string(method) + "' is not a two-track rule");
    }
}

FusedResult fuse(Method method, const GaussianEstimate& e1, const GaussianEstimate& e2, Objective objective)
{
    return fuse_with(method, e1, e2, optimize_weight(e1, e2, method, objective));
}

Matrix consistency_residual_hmd(const CorrelatedPair& pair, double omega)
{
    const GaussianEstimate m = hmd_mutual(pair.est1, pair.est2, omega);
    const Matrix i1 = spd_inverse(pair.est1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(pair.est2.cov(), "second covariance");
    const Matrix im = spd_inverse(m.cov(), "HMD-GA mutual covariance");
    const Matrix& c = pair.cross;
    return (1.0 - omega) * i1 * c * im + omega * im * c * i2 - i1 * c * i2;
}

Matrix sylvester_mutual_inverse(const CorrelatedPair& pair, double omega)
{
    check_omega(omega);
    if (omega == 0.5) {
        omega += 1e-6;
    }
    const Eigen::Index n = pair.est1.dim();
    const Matrix i1 = spd_inverse(pair.est1.cov(), "first covariance");
    const Matrix i2 = spd_inverse(pair.est2.cov(), "second covariance");
    const Matrix p = (1.0 - omega) * i1 * pair.cross;
    const Matrix q = omega * pair.cross * i2;
    const Matrix r = i1 * pair.cross * i2;
    const Matrix eye = Matrix::Identity(n, n);
    Matrix a = Matrix::Zero(n * n, n * n);
    // column-major vec: vec(P X) = (I kron P) vec X, vec(X Q) = (Q^T kron I) vec X
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a.block(i * n, j * n, n, n) = eye(i, j) * p + q(j, i) * eye;
        }
    }
    const Vector rhs = Eigen::Map<const Vector>(r.data(), n * n);
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
        throw SingularGeometry("Sylvester system is singular: spectra of P and -Q overlap");
    }
    const Vector x = lu.solve(rhs);
    return Eigen::Map<const Matrix>(x.data(), n, n);
}

IciStructureReport ici_structure_check(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                       double tol)
{
    const GaussianEstimate m = ici_mutual(e1, e2, omega);
    IciStructureReport rep;
    rep.mutual_cov = m.cov();
    rep.margin_over_e1 = min_eigenvalue(m.cov() - e1.cov());
    rep.margin_over_e2 = min_eigenvalue(m.cov() - e2.cov());
    rep.margin_under_bound = min_eigenvalue(omega * e1.cov() + (1.0 - omega) * e2.cov() - m.cov());
    rep.geq_e1 = rep.margin_over_e1 >= -tol;
    rep.geq_e2 = rep.margin_over_e2 >= -tol;
    rep.leq_bound = rep.margin_under_bound >= -tol;
    return rep;
}

CorrelatedPairGenerator::CorrelatedPairGenerator(Matrix ind1, Matrix ind2, std::optional<Matrix> mutual)
    : ind1_(make_spd(ind1, "first independent covariance"))
    , ind2_(make_spd(ind2, "second independent covariance"))
{
    if (ind1_.rows() != ind2_.rows()) {
        throw DimensionMismatch("independent covariances differ in size");
    }
    const Eigen::Index n = ind1_.rows();
    info1_ = spd_inverse(ind1_, "first independent covariance");
    info2_ = spd_inverse(ind2_, "second independent covariance");
    info_m_ = Matrix::Zero(n, n);
    if (mutual) {
        if (mutual->rows() != n) {
            throw DimensionMismatch("mutual covariance differs in size");
        }
        mutual_ = make_spd(*mutual, "mutual covariance");
        info_m_ = spd_inverse(*mutual_, "mutual covariance");
        chol_m_ = Eigen::LLT<Matrix>(*mutual_).matrixL();
    }
    chol1_ = Eigen::LLT<Matrix>(ind1_).matrixL();
    chol2_ = Eigen::LLT<Matrix>(ind2_).matrixL();
    cov1_ = spd_inverse(info1_ + info_m_, "first local information");
    cov2_ = spd_inverse(info2_ + info_m_, "second local information");
    cross_ = cov1_ * info_m_ * cov2_;
}

CorrelatedPairGenerator::Draw CorrelatedPairGenerator::draw(Rng& rng, const Vector& truth) const
{
    const Eigen::Index n = ind1_.rows();
    if (truth.size() != n) {
        throw DimensionMismatch("truth dimension does not match the generator");
    }
    const Vector a1 = truth + chol1_ * standard_normal(rng, n);
    const Vector a2 = truth + chol2_ * standard_normal(rng, n);
    Vector common = Vector::Zero(n);
    std::optional<GaussianEstimate> m;
    if (mutual_) {
        common = truth + chol_m_ * standard_normal(rng, n);
        m.emplace(common, *mutual_);
    }
    Vector x1 = cov1_ * (info1_ * a1 + info_m_ * common);
    Vector x2 = cov2_ * (info2_ * a2 + info_m_ * common);
    return Draw{truth, GaussianEstimate(std::move(x1), cov1_), GaussianEstimate(std::move(x2), cov2_), std::move(m)};
}

CorrelatedPair CorrelatedPairGenerator::structure() const
{
    const Eigen::Index n = ind1_.rows();
    return CorrelatedPair{GaussianEstimate(Vector::Zero(n), cov1_), GaussianEstimate(Vector::Zero(n), cov2_), cross_};
}

EigenComparison hmd_vs_ici_eigen_compare(const GaussianEstimate& e1, const GaussianEstimate& e2, double omega,
                                         double rel_tol)
{
    EigenComparison out;
    out.omega_hmd = omega;
    out.omega_ici = 1.0 - omega;
    out.hmd = sorted_eigenvalues(hmd_ga(e1, e2, out.omega_hmd).estimate.cov());
    out.ici = sorted_eigenvalues(ici(e1, e2, out.omega_ici).estimate.cov());
    const double tol = rel_tol * std::max(std::abs(out.ici(0)), std::abs(out.hmd(0)));
    bool ok = true;
    for (Eigen::Index i = 0; i < out.hmd.size(); ++i) {
        ok = ok && out.hmd(i) <= out.ici(i) + tol;
        if (i > 0) {
            ok = ok && out.ici(i) <= out.hmd(i - 1) + tol;
        }
    }
    out.interlaced = ok;
    return out;
}

} // namespace trackfuse
