#include "trackfuse/tracker.hpp"

#include "trackfuse/error.hpp"
#include "trackfuse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace trackfuse {

namespace {

constexpr double kPi = std::numbers::pi;

Vector innovation(const Vector& z, const Vector& zhat)
{
    Vector nu = z - zhat;
    nu(1) = wrap_angle(nu(1));
    return nu;
}

} // namespace

Matrix RangeBearingSensor::R() const
{
    Matrix r = Matrix::Zero(2, 2);
    r(0, 0) = sigma_r * sigma_r;
    r(1, 1) = sigma_theta * sigma_theta;
    return r;
}

bool RangeBearingSensor::covers(const Eigen::Vector2d& p) const
{
    return (p - position).norm() <= coverage;
}

double RangeBearingSensor::expected_clutter() const
{
    return clutter_density * coverage * 2.0 * kPi;
}

void RangeBearingSensor::validate() const
{
    if (!(sigma_r > 0.0) || !(sigma_theta > 0.0)) {
        throw InvalidArgument("sensor noise standard deviations must be positive");
    }
    if (!(p_detect > 0.0 && p_detect <= 1.0)) {
        throw InvalidArgument("detection probability must lie in (0, 1]");
    }
    if (!(coverage > 0.0) || clutter_density < 0.0) {
        throw InvalidArgument("coverage must be positive and clutter density nonnegative");
    }
}

double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi);
    return a <= -kPi ? a + 2.0 * kPi : a;
}

Vector range_bearing(const Vector& state, const RangeBearingSensor& sensor)
{
    const double dx = state(0) - sensor.position.x();
    const double dy = state(1) - sensor.position.y();
    Vector z(2);
    z << std::hypot(dx, dy), std::atan2(dy, dx);
    return z;
}

Matrix range_bearing_jacobian(const Vector& state, const RangeBearingSensor& sensor)
{
    const double dx = state(0) - sensor.position.x();
    const double dy = state(1) - sensor.position.y();
    const double r2 = dx * dx + dy * dy;
    const double r = std::sqrt(r2);
    if (r < 1.0) {
        throw SingularGeometry("predicted position within 1 m of the sensor");
    }
    Matrix h = Matrix::Zero(2, state.size());
    h(0, 0) = dx / r;
    h(0, 1) = dy / r;
    h(1, 0) = -dy / r2;
    h(1, 1) = dx / r2;
    return h;
}

GaussianEstimate polar_to_cartesian(const Vector& z, const RangeBearingSensor& sensor)
{
    const double c = std::cos(z(1));
    const double s = std::sin(z(1));
    Vector p(2);
    p << sensor.position.x() + z(0) * c, sensor.position.y() + z(0) * s;
    Matrix j(2, 2);
    j << c, -z(0) * s, s, z(0) * c;
    return GaussianEstimate(std::move(p), j * sensor.R() * j.transpose());
}

GaussianEstimate ekf_update_range_bearing(const GaussianEstimate& predicted, const Vector& z,
                                          const RangeBearingSensor& sensor)
{
    const Matrix h = range_bearing_jacobian(predicted.mean(), sensor);
    const Matrix& p = predicted.cov();
    const Matrix r = sensor.R();
    const Matrix s = h * p * h.transpose() + r;
    const Matrix k = p * h.transpose() * spd_inverse(s, "innovation covariance");
    const Vector nu = innovation(z, range_bearing(predicted.mean(), sensor));
    const Matrix ikh = Matrix::Identity(p.rows(), p.cols()) - k * h;
    return GaussianEstimate(predicted.mean() + k * nu, ikh * p * ikh.transpose() + k * r * k.transpose());
}

PdaOutcome pda_update(const GaussianEstimate& predicted, const std::vector<Vector>& measurements,
                      const RangeBearingSensor& sensor, double gate_mass)
{
    const double gamma = chi2_quantile(2.0, gate_mass);
    const Matrix h = range_bearing_jacobian(predicted.mean(), sensor);
    const Matrix& p = predicted.cov();
    const Matrix s = h * p * h.transpose() + sensor.R();
    const Matrix s_inv = spd_inverse(s, "innovation covariance");
    const Vector zhat = range_bearing(predicted.mean(), sensor);

    PdaOutcome out{predicted, {}, {}, 1.0};
    std::vector<Vector> nus;
    std::vector<double> lik;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const Vector nu = innovation(measurements[i], zhat);
        const double d2 = nu.dot(s_inv * nu);
        if (d2 <= gamma) {
            out.gated.push_back(i);
            nus.push_back(nu);
            lik.push_back(std::exp(-0.5 * d2));
        }
    }
    if (out.gated.empty()) {
        return out;
    }

    const double pd = sensor.p_detect;
    const double pg = gate_mass;
    const double b = sensor.clutter_density * 2.0 * kPi * std::sqrt(s.determinant()) * (1.0 - pd * pg) / pd;
    double total = b;
    for (double l : lik) {
        total += l;
    }
    out.beta0 = b / total;
    Vector nu_c = Vector::Zero(2);
    Matrix spread = Matrix::Zero(2, 2);
    out.beta.resize(lik.size());
    for (std::size_t i = 0; i < lik.size(); ++i) {
        out.beta[i] = lik[i] / total;
        nu_c += out.beta[i] * nus[i];
        spread += out.beta[i] * nus[i] * nus[i].transpose();
    }
    spread -= nu_c * nu_c.transpose();

    const Matrix k = p * h.transpose() * s_inv;
    const Matrix pc = p - k * s * k.transpose();
    const Matrix pn = out.beta0 * p + (1.0 - out.beta0) * pc + k * spread * k.transpose();
    out.estimate = GaussianEstimate(predicted.mean() + k * nu_c, pn);
    return out;
}

void Track::record_scan(bool hit, double t, const LifecycleConfig& cfg)
{
    if (status == TrackStatus::deleted) {
        return;
    }
    if (hit) {
        miss_count = 0;
        last_update = t;
        if (status == TrackStatus::tentative) {
            status = TrackStatus::confirmed;
        }
        return;
    }
    ++miss_count;
    if (status == TrackStatus::tentative) {
        if (++tentative_scans >= cfg.tentative_window) {
            status = TrackStatus::deleted;
        }
    } else if (miss_count >= cfg.confirmed_max_misses) {
        status = TrackStatus::deleted;
    }
}

LocalTracker::LocalTracker(RangeBearingSensor sensor, TrackerConfig cfg, std::uint64_t id_base)
    : sensor_(std::move(sensor))
    , cfg_(std::move(cfg))
    , next_id_(id_base)
{
    sensor_.validate();
}

void LocalTracker::process_scan(double t, const std::vector<Vector>& measurements)
{
    std::vector<bool> used(measurements.size(), false);
    if (last_time_ >= 0.0) {
        const double dt = t - last_time_;
        const MotionModel m = dt == cfg_.model.dt ? cfg_.model : MotionModel::ncv(dt, cfg_.model.q);
        for (auto& tr : tracks_) {
            tr.estimate = kf_predict(tr.estimate, m.F, m.Q);
        }
    }
    for (auto& tr : tracks_) {
        const Eigen::Vector2d pos = tr.estimate.mean().head<2>();
        if ((pos - sensor_.position).norm() < 1.0) {
            tr.status = TrackStatus::deleted;
            continue;
        }
        const PdaOutcome pda = pda_update(tr.estimate, measurements, sensor_, cfg_.gate_mass);
        tr.estimate = pda.estimate;
        for (std::size_t i : pda.gated) {
            used[i] = true;
        }
        tr.record_scan(!pda.gated.empty(), t, cfg_.lifecycle);
    }

    // drop deleted tracks, then the younger of two tracks that have merged
    std::erase_if(tracks_, [](const Track& tr) { return !tr.alive(); });
    const double merge_gate = chi2_quantile(2.0, 0.5);
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        for (std::size_t j = i + 1; j < tracks_.size(); ++j) {
            if (!tracks_[i].alive() || !tracks_[j].alive()) {
                continue;
            }
            const Vector d = tracks_[i].estimate.mean().head(2) - tracks_[j].estimate.mean().head(2);
            const Matrix c = tracks_[i].estimate.cov().topLeftCorner(2, 2) + tracks_[j].estimate.cov().topLeftCorner(2, 2);
            if (d.dot(spd_inverse(c, "track separation") * d) < merge_gate) {
                Track& young = tracks_[i].id > tracks_[j].id ? tracks_[i] : tracks_[j];
                Track& old = tracks_[i].id > tracks_[j].id ? tracks_[j] : tracks_[i];
                // keep whichever is confirmed; the older one on a tie
                if (young.status == TrackStatus::confirmed && old.status != TrackStatus::confirmed) {
                    old.status = TrackStatus::deleted;
                } else {
                    young.status = TrackStatus::deleted;
                }
            }
        }
    }
    std::erase_if(tracks_, [](const Track& tr) { return !tr.alive(); });

    std::vector<Vector> unused;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        if (!used[i]) {
            unused.push_back(measurements[i]);
        }
    }
    initiate(t, unused);
    last_time_ = t;
}

void LocalTracker::initiate(double t, const std::vector<Vector>& unused)
{
    std::vector<GaussianEstimate> now;
    now.reserve(unused.size());
    for (const auto& z : unused) {
        now.push_back(polar_to_cartesian(z, sensor_));
    }
    std::vector<bool> consumed(now.size(), false);

    if (pending_time_ >= 0.0 && !pending_.empty()) {
        const double dt = t - pending_time_;
        const double gate = chi2_quantile(2.0, cfg_.init_gate_mass);
        const double reach = cfg_.max_speed * dt;
        std::vector<GaussianEstimate> before;
        before.reserve(pending_.size());
        for (const auto& z : pending_) {
            before.push_back(polar_to_cartesian(z, sensor_));
        }
        std::vector<bool> taken(before.size(), false);
        for (std::size_t i = 0; i < now.size(); ++i) {
            double best = gate;
            std::size_t best_j = before.size();
            for (std::size_t j = 0; j < before.size(); ++j) {
                if (taken[j]) {
                    continue;
                }
                const Vector d = now[i].mean() - before[j].mean();
                const Matrix c = now[i].cov() + before[j].cov() + reach * reach * Matrix::Identity(2, 2);
                const double d2 = d.dot(spd_inverse(c, "initiation gate") * d);
                if (d2 <= best) {
                    best = d2;
                    best_j = j;
                }
            }
            if (best_j == before.size()) {
                continue;
            }
            taken[best_j] = true;
            consumed[i] = true;
            Vector v = (now[i].mean() - before[best_j].mean()) / dt;
            if (v.norm() > cfg_.max_speed) {
                v *= cfg_.max_speed / v.norm();
            }
            Vector x(4);
            x << now[i].mean(), v;
            Matrix p = Matrix::Zero(4, 4);
            p.topLeftCorner(2, 2) = now[i].cov();
            p.bottomRightCorner(2, 2) = cfg_.max_speed * cfg_.max_speed * Matrix::Identity(2, 2);
            Track tr;
            tr.id = next_id_++;
            tr.estimate = GaussianEstimate(std::move(x), p);
            tr.status = TrackStatus::tentative;
            tr.last_update = t;
            tracks_.push_back(std::move(tr));
        }
    }

    pending_.clear();
    for (std::size_t i = 0; i < unused.size(); ++i) {
        if (!consumed[i]) {
            pending_.push_back(unused[i]);
        }
    }
    pending_time_ = t;
}

std::vector<Track> LocalTracker::confirmed() const
{
    std::vector<Track> out;
    for (const auto& tr : tracks_) {
        if (tr.status == TrackStatus::confirmed) {
            out.push_back(tr);
        }
    }
    return out;
}

} // namespace trackfuse
