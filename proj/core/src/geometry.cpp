#include "splatgaze/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace splatgaze {

Vec3 gaze_angles_to_vector(double pitch, double yaw) {
    const double cp = std::cos(pitch);
    return Vec3(cp * std::sin(yaw), std::sin(pitch), cp * std::cos(yaw));
}

Vec2 gaze_vector_to_angles(const Vec3& dir) {
    const double y = std::clamp(dir.y(), -1.0, 1.0);
    return Vec2(std::asin(y), std::atan2(dir.x(), dir.z()));
}

Mat3 pitch_yaw_rotation(double pitch, double yaw) {
    Mat3 ry, rx;
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    ry << cy, 0.0, sy,
          0.0, 1.0, 0.0,
          -sy, 0.0, cy;
    // R_x(-pitch)
    rx << 1.0, 0.0, 0.0,
          0.0, cp, sp,
          0.0, -sp, cp;
    return ry * rx;
}

} // namespace splatgaze
