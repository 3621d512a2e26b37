#include "trackfuse/geodetic.hpp"

#include "trackfuse/error.hpp"

#include <cmath>
#include <numbers>

namespace trackfuse {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_lat(double lat_deg)
{
    if (!(std::abs(lat_deg) < 89.9)) {
        throw SingularGeometry("latitude too close to a pole for local east-north conversion");
    }
}

} // namespace

Eigen::Vector3d geodetic_to_ecef(const Geodetic& p, double h)
{
    const double lat = p.lat_deg * kDeg;
    const double lon = p.lon_deg * kDeg;
    const double s = std::sin(lat);
    const double n = wgs84::a / std::sqrt(1.0 - wgs84::e2 * s * s);
    return {(n + h) * std::cos(lat) * std::cos(lon), (n + h) * std::cos(lat) * std::sin(lon),
            (n * (1.0 - wgs84::e2) + h) * s};
}

Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef)
{
    const double lon = std::atan2(ecef.y(), ecef.x());
    const double p = std::hypot(ecef.x(), ecef.y());
    double lat = std::atan2(ecef.z(), p * (1.0 - wgs84::e2));
    for (int i = 0; i < 8; ++i) {
        const double s = std::sin(lat);
        const double n = wgs84::a / std::sqrt(1.0 - wgs84::e2 * s * s);
        lat = std::atan2(ecef.z() + wgs84::e2 * n * s, p);
    }
    return {lat / kDeg, lon / kDeg};
}

Eigen::Vector3d ecef_to_enu(const Eigen::Vector3d& ecef, const Geodetic& origin)
{
    check_lat(origin.lat_deg);
    const double lat = origin.lat_deg * kDeg;
    const double lon = origin.lon_deg * kDeg;
    const Eigen::Vector3d d = ecef - geodetic_to_ecef(origin);
    const double sl = std::sin(lat);
    const double cl = std::cos(lat);
    const double so = std::sin(lon);
    const double co = std::cos(lon);
    return {-so * d.x() + co * d.y(), -sl * co * d.x() - sl * so * d.y() + cl * d.z(),
            cl * co * d.x() + cl * so * d.y() + sl * d.z()};
}

Eigen::Vector2d geodetic_to_enu(const Geodetic& p, const Geodetic& origin)
{
    check_lat(p.lat_deg);
    return ecef_to_enu(geodetic_to_ecef(p), origin).head<2>();
}

Geodetic enu_to_geodetic(const Eigen::Vector2d& en, const Geodetic& origin)
{
    check_lat(origin.lat_deg);
    // rough spherical start, then Newton on (lat, lon) with a numeric Jacobian
    const double r = wgs84::a;
    Eigen::Vector2d g(origin.lat_deg + en.y() / r / kDeg,
                      origin.lon_deg + en.x() / (r * std::cos(origin.lat_deg * kDeg)) / kDeg);
    for (int it = 0; it < 30; ++it) {
        const Eigen::Vector2d f = geodetic_to_enu({g(0), g(1)}, origin) - en;
        if (f.norm() < 1e-9) {
            break;
        }
        constexpr double h = 1e-7;
        Eigen::Matrix2d j;
        j.col(0) = (geodetic_to_enu({g(0) + h, g(1)}, origin) - geodetic_to_enu({g(0) - h, g(1)}, origin)) / (2 * h);
        j.col(1) = (geodetic_to_enu({g(0), g(1) + h}, origin) - geodetic_to_enu({g(0), g(1) - h}, origin)) / (2 * h);
        g -= j.partialPivLu().solve(f);
    }
    return {g(0), g(1)};
}

} // namespace trackfuse
