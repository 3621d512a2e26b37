#pragma once

// WGS84 geodetic <-> local east-north conversion on the ellipsoid surface.

#include <Eigen/Dense>

namespace trackfuse {

struct Geodetic {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

namespace wgs84 {
inline constexpr double a = 6378137.0;
inline constexpr double f = 1.0 / 298.257223563;
inline constexpr double e2 = f * (2.0 - f);
} // namespace wgs84

/// Earth-centred earth-fixed coordinates of a point at height h.
[[nodiscard]] Eigen::Vector3d geodetic_to_ecef(const Geodetic& p, double h = 0.0);

/// ECEF point (on or near the surface) to geodetic latitude/longitude.
[[nodiscard]] Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef);

/// East-north-up coordinates of an ECEF point relative to the origin.
[[nodiscard]] Eigen::Vector3d ecef_to_enu(const Eigen::Vector3d& ecef, const Geodetic& origin);

/// East/north components (metres) of a surface point relative to origin.
[[nodiscard]] Eigen::Vector2d geodetic_to_enu(const Geodetic& p, const Geodetic& origin);

/// Surface point whose east/north components relative to origin are (e, n).
/// Newton iteration; round trip error well below a micrometre within 300 km.
[[nodiscard]] Geodetic enu_to_geodetic(const Eigen::Vector2d& en, const Geodetic& origin);

} // namespace trackfuse
