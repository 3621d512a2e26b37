#pragma once

#include "trackfuse/gaussian.hpp"

namespace trackfuse {

/// Linear measurement z = H x + v, v ~ N(0, R).
struct LinearMeasurement {
    Vector z;
    Matrix H;
    Matrix R;
};

/// Nearly-constant-velocity model on the state [x, y, vx, vy].
struct MotionModel {
    Matrix F;
    Matrix Q;
    double dt = 0.0;
    double q = 0.0;

    [[nodiscard]] static MotionModel ncv(double dt, double q);
};

[[nodiscard]] GaussianEstimate kf_predict(const GaussianEstimate& est, const Matrix& F, const Matrix& Q);

/// Kalman update in Joseph form.
[[nodiscard]] GaussianEstimate kf_update(const GaussianEstimate& est, const Vector& z, const Matrix& H,
                                         const Matrix& R);

[[nodiscard]] inline GaussianEstimate kf_update(const GaussianEstimate& est, const LinearMeasurement& m)
{
    return kf_update(est, m.z, m.H, m.R);
}

} // namespace trackfuse
