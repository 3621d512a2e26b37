#include "trackfuse/grid.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trackfuse {

namespace {

Eigen::ArrayXd axis_weights(const GridAxis& ax)
{
    Eigen::ArrayXd w = Eigen::ArrayXd::Constant(ax.points, ax.step());
    w(0) *= 0.5;
    w(ax.points - 1) *= 0.5;
    return w;
}

void check_omega(double omega)
{
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw InvalidArgument("fusion weight must lie in [0, 1], got " + std::to_string(omega));
    }
}

void check_pair(const GridDensity& p1, const GridDensity& p2)
{
    if (!p1.same_grid(p2)) {
        throw DimensionMismatch("grid densities are defined on different grids");
    }
}

template <class Density>
GridDensity eval_on(const Density& density, const std::vector<GridAxis>& axes)
{
    if (density.dim() != static_cast<Eigen::Index>(axes.size())) {
        throw DimensionMismatch("grid has " + std::to_string(axes.size()) + " axes, density has dimension "
                                + std::to_string(density.dim()));
    }
    Eigen::Index total = 1;
    for (const auto& ax : axes) {
        total *= ax.points;
    }
    GridDensity shape(axes, Eigen::ArrayXd::Zero(total));
    Eigen::ArrayXd values(total);
    for (Eigen::Index k = 0; k < total; ++k) {
        values(k) = density.pdf(shape.point(k));
    }
    return GridDensity(axes, std::move(values));
}

GridFusion finish(const GridDensity& like, Eigen::ArrayXd values)
{
    GridDensity raw(like.axes(), std::move(values));
    const double zeta = raw.integral();
    return GridFusion{raw.normalized(), zeta};
}

} // namespace

GridDensity::GridDensity(std::vector<GridAxis> axes, Eigen::ArrayXd values)
    : axes_(std::move(axes))
    , values_(std::move(values))
{
    if (axes_.empty() || axes_.size() > 2) {
        throw UnsupportedDimension("grid oracle supports 1-D and 2-D densities only, got "
                                   + std::to_string(axes_.size()) + "-D");
    }
    Eigen::Index total = 1;
    for (const auto& ax : axes_) {
        if (ax.points < 2 || !(ax.hi > ax.lo)) {
            throw InvalidArgument("grid axis needs at least 2 points and hi > lo");
        }
        total *= ax.points;
    }
    if (values_.size() != total) {
        throw DimensionMismatch("grid value count does not match axes");
    }
    if ((values_ < 0.0).any() || !values_.allFinite()) {
        throw InvalidArgument("grid density values must be finite and nonnegative");
    }
    if (axes_.size() == 1) {
        quad_ = axis_weights(axes_[0]);
    } else {
        const Eigen::ArrayXd wx = axis_weights(axes_[0]);
        const Eigen::ArrayXd wy = axis_weights(axes_[1]);
        quad_.resize(total);
        for (int i = 0; i < axes_[0].points; ++i) {
            quad_.segment(static_cast<Eigen::Index>(i) * axes_[1].points, axes_[1].points) = wx(i) * wy;
        }
    }
}

Vector GridDensity::point(Eigen::Index k) const
{
    Vector x(dim());
    if (dim() == 1) {
        x(0) = axes_[0].at(static_cast<int>(k));
    } else {
        const int ny = axes_[1].points;
        x(0) = axes_[0].at(static_cast<int>(k / ny));
        x(1) = axes_[1].at(static_cast<int>(k % ny));
    }
    return x;
}

double GridDensity::integral() const
{
    return (values_ * quad_).sum();
}

GridDensity GridDensity::normalized() const
{
    const double mass = integral();
    if (!(mass > 0.0)) {
        throw DegenerateOverlap("grid density has zero mass");
    }
    return GridDensity(axes_, values_ / mass);
}

Vector GridDensity::mean() const
{
    const double mass = integral();
    Vector m = Vector::Zero(dim());
    for (Eigen::Index k = 0; k < size(); ++k) {
        m += (values_(k) * quad_(k)) * point(k);
    }
    return m / mass;
}

Matrix GridDensity::cov() const
{
    const double mass = integral();
    const Vector m = mean();
    Matrix c = Matrix::Zero(dim(), dim());
    for (Eigen::Index k = 0; k < size(); ++k) {
        const Vector d = point(k) - m;
        c += (values_(k) * quad_(k)) * d * d.transpose();
    }
    return symmetrized(c / mass);
}

GaussianEstimate GridDensity::moments() const
{
    return GaussianEstimate(mean(), cov());
}

bool GridDensity::same_grid(const GridDensity& other) const
{
    if (axes_.size() != other.axes_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        const auto& b = other.axes_[i];
        if (a.lo != b.lo || a.hi != b.hi || a.points != b.points) {
            return false;
        }
    }
    return true;
}

std::vector<GridAxis> envelope_axes(const std::vector<GaussianEstimate>& inputs, int points, double k_sigma)
{
    if (inputs.empty()) {
        throw InvalidArgument("envelope needs at least one density");
    }
    const Eigen::Index n = inputs.front().dim();
    if (n > 2) {
        throw UnsupportedDimension("grid oracle supports 1-D and 2-D densities only");
    }
    std::vector<GridAxis> axes(static_cast<std::size_t>(n));
    for (Eigen::Index d = 0; d < n; ++d) {
        double lo = inputs.front().mean()(d);
        double hi = lo;
        for (const auto& e : inputs) {
            const double s = std::sqrt(e.cov()(d, d));
            lo = std::min(lo, e.mean()(d) - k_sigma * s);
            hi = std::max(hi, e.mean()(d) + k_sigma * s);
        }
        axes[static_cast<std::size_t>(d)] = GridAxis{lo, hi, points};
    }
    return axes;
}

GridDensity grid_eval(const GaussianEstimate& density, const std::vector<GridAxis>& axes)
{
    if (density.dim() > 2) {
        throw UnsupportedDimension("grid oracle supports 1-D and 2-D densities only");
    }
    return eval_on(density, axes);
}

GridDensity grid_eval(const GaussianMixture& density, const std::vector<GridAxis>& axes)
{
    if (density.dim() > 2) {
        throw UnsupportedDimension("grid oracle supports 1-D and 2-D densities only");
    }
    return eval_on(density, axes);
}

Eigen::ArrayXd grid_hmd_unnormalized(const GridDensity& p1, const GridDensity& p2, double omega)
{
    check_omega(omega);
    check_pair(p1, p2);
    const Eigen::ArrayXd& a = p1.values();
    const Eigen::ArrayXd& b = p2.values();
    Eigen::ArrayXd out(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double num = a(k) * b(k);
        const double den = (1.0 - omega) * a(k) + omega * b(k);
        out(k) = num > 0.0 ? num / den : 0.0;
    }
    return out;
}

GridFusion grid_hmd(const GridDensity& p1, const GridDensity& p2, double omega)
{
    return finish(p1, grid_hmd_unnormalized(p1, p2, omega));
}

GridFusion grid_gmd(const GridDensity& p1, const GridDensity& p2, double omega)
{
    check_omega(omega);
    check_pair(p1, p2);
    const Eigen::ArrayXd& a = p1.values();
    const Eigen::ArrayXd& b = p2.values();
    Eigen::ArrayXd out(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        // pow(0, 0) == 1 keeps the degenerate exponents exact
        out(k) = std::pow(a(k), omega) * std::pow(b(k), 1.0 - omega);
    }
    return finish(p1, std::move(out));
}

GridFusion grid_product(const GridDensity& p1, const GridDensity& p2)
{
    check_pair(p1, p2);
    return finish(p1, p1.values() * p2.values());
}

double pearson_objective(const Eigen::ArrayXd& q, const GridDensity& p1, const GridDensity& p2, double omega)
{
    check_omega(omega);
    check_pair(p1, p2);
    if (q.size() != p1.size()) {
        throw DimensionMismatch("candidate density size does not match grid");
    }
    const Eigen::ArrayXd& w = p1.quadrature();
    double j1 = 0.0;
    double j2 = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        const double a = p1.values()(k);
        const double b = p2.values()(k);
        if (a > 0.0) {
            j1 += w(k) * (q(k) - a) * (q(k) - a) / a;
        }
        if (b > 0.0) {
            j2 += w(k) * (q(k) - b) * (q(k) - b) / b;
        }
    }
    return 0.5 * (omega * j1 + (1.0 - omega) * j2);
}

} // namespace trackfuse
