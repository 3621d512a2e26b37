#pragma once

// Local-node tracking: range-bearing EKF, PDA with gating, and a per-sensor
// tracker with two-point initiation and M/N track management.

#include "trackfuse/gaussian.hpp"
#include "trackfuse/kalman.hpp"

#include <cstdint>
#include <vector>

namespace trackfuse {

/// Monostatic 2-D radar measuring range and bearing (bearing = atan2(dy, dx)).
struct RangeBearingSensor {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    double sigma_r = 50.0;          // m
    double sigma_theta = 0.0349066; // rad (2 deg)
    double coverage = 300000.0;     // m
    double p_detect = 0.99;
    double clutter_density = 1e-5;  // expected false alarms per (m * rad)

    [[nodiscard]] Matrix R() const;
    [[nodiscard]] bool covers(const Eigen::Vector2d& p) const;
    /// Expected clutter count per scan over the full polar field of view.
    [[nodiscard]] double expected_clutter() const;
    void validate() const;
};

/// Angle wrapped to (-pi, pi].
[[nodiscard]] double wrap_angle(double a);

/// Noise-free (r, theta) of the state's position [x, y, ...].
[[nodiscard]] Vector range_bearing(const Vector& state, const RangeBearingSensor& sensor);
/// 2 x n Jacobian of range_bearing. Throws SingularGeometry when r < 1 m.
[[nodiscard]] Matrix range_bearing_jacobian(const Vector& state, const RangeBearingSensor& sensor);

/// Cartesian position of a polar measurement and its covariance.
[[nodiscard]] GaussianEstimate polar_to_cartesian(const Vector& z, const RangeBearingSensor& sensor);

[[nodiscard]] GaussianEstimate ekf_update_range_bearing(const GaussianEstimate& predicted, const Vector& z,
                                                        const RangeBearingSensor& sensor);

struct PdaOutcome {
    GaussianEstimate estimate;
    std::vector<std::size_t> gated;  // indices into the measurement list
    std::vector<double> beta;        // association probabilities of the gated measurements
    double beta0 = 1.0;              // probability that none is target-originated
};

/// Probabilistic data association update. Measurements are gated with the
/// chi-square(2) quantile at gate_mass; clutter is Poisson with the sensor's
/// density. With an empty gate the prediction is returned unchanged.
[[nodiscard]] PdaOutcome pda_update(const GaussianEstimate& predicted, const std::vector<Vector>& measurements,
                                    const RangeBearingSensor& sensor, double gate_mass);

enum class TrackStatus { tentative, confirmed, deleted };

struct LifecycleConfig {
    int confirmed_max_misses = 6;  // consecutive misses before a confirmed track is deleted
    int tentative_window = 2;      // scans a tentative track has to get one more hit
};

struct Track {
    std::uint64_t id = 0;
    GaussianEstimate estimate{Vector::Zero(4), Matrix::Identity(4, 4)};
    TrackStatus status = TrackStatus::tentative;
    int miss_count = 0;        // consecutive misses
    int tentative_scans = 0;   // scans spent tentative since initiation
    double last_update = 0.0;

    /// Advances the track-management automaton by one scan.
    void record_scan(bool hit, double t, const LifecycleConfig& cfg);
    [[nodiscard]] bool alive() const { return status != TrackStatus::deleted; }
};

struct TrackerConfig {
    MotionModel model = MotionModel::ncv(2.0, 0.15);
    double gate_mass = 0.95;
    double init_gate_mass = 0.99;
    double max_speed = 30.0;
    LifecycleConfig lifecycle;
};

/// Single-sensor multi-target tracker: independent PDA per track, two-point
/// differencing initiation from detections no track gated.
class LocalTracker {
public:
    LocalTracker(RangeBearingSensor sensor, TrackerConfig cfg, std::uint64_t id_base = 0);

    /// Processes one synchronous scan taken at time t (uniform scan period).
    void process_scan(double t, const std::vector<Vector>& measurements);

    [[nodiscard]] const std::vector<Track>& tracks() const noexcept { return tracks_; }
    [[nodiscard]] std::vector<Track> confirmed() const;
    [[nodiscard]] const RangeBearingSensor& sensor() const noexcept { return sensor_; }

private:
    RangeBearingSensor sensor_;
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    std::vector<Vector> pending_;
    double pending_time_ = -1.0;
    double last_time_ = -1.0;
    std::uint64_t next_id_;

    void initiate(double t, const std::vector<Vector>& unused);
};

} // namespace trackfuse
