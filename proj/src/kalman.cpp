#include "trackfuse/kalman.hpp"

#include "trackfuse/error.hpp"

#include <string>

namespace trackfuse {

MotionModel MotionModel::ncv(double dt, double q)
{
    if (!(dt > 0.0) || q < 0.0) {
        throw InvalidArgument("NCV model needs dt > 0 and q >= 0");
    }
    const Matrix i2 = Matrix::Identity(2, 2);
    MotionModel m;
    m.dt = dt;
    m.q = q;
    m.F = Matrix::Identity(4, 4);
    m.F.block(0, 2, 2, 2) = dt * i2;
    m.Q.resize(4, 4);
    m.Q << dt * dt * dt / 3.0 * i2, dt * dt / 2.0 * i2, dt * dt / 2.0 * i2, dt * i2;
    m.Q *= q;
    return m;
}

GaussianEstimate kf_predict(const GaussianEstimate& est, const Matrix& F, const Matrix& Q)
{
    if (F.rows() != est.dim() || F.cols() != est.dim() || Q.rows() != est.dim()) {
        throw DimensionMismatch("prediction model does not match state dimension");
    }
    return GaussianEstimate(F * est.mean(), F * est.cov() * F.transpose() + Q);
}

GaussianEstimate kf_update(const GaussianEstimate& est, const Vector& z, const Matrix& H, const Matrix& R)
{
    if (H.cols() != est.dim() || H.rows() != z.size() || R.rows() != z.size() || R.cols() != z.size()) {
        throw DimensionMismatch("measurement model does not match state (" + std::to_string(est.dim())
                                + ") or measurement (" + std::to_string(z.size()) + ") dimension");
    }
    const Matrix& P = est.cov();
    const Matrix S = H * P * H.transpose() + R;
    const Matrix K = P * H.transpose() * spd_inverse(S, "innovation covariance");
    const Matrix ikh = Matrix::Identity(est.dim(), est.dim()) - K * H;
    const Matrix Pn = ikh * P * ikh.transpose() + K * R * K.transpose();
    return GaussianEstimate(est.mean() + K * (z - H * est.mean()), Pn);
}

} // namespace trackfuse
