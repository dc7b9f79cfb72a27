#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace splatgaze {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

// Gaze conventions. The head frame is right-handed with +z forward (the
// rest gaze), +y up, +x right. Angles are (pitch, yaw) in radians:
//
//   direction(pitch, yaw) = (cos p * sin y, sin p, cos p * cos y)
//
// so pitch > 0 looks up and yaw > 0 looks toward +x. The inverse uses
// pitch = asin(d_y), yaw = atan2(d_x, d_z).
Vec3 gaze_angles_to_vector(double pitch, double yaw);
Vec2 gaze_vector_to_angles(const Vec3& dir);

// Rotation taking +z through yaw about +y, then pitch about the rotated
// right axis, matching gaze_angles_to_vector: R = R_y(yaw) * R_x(-pitch).
Mat3 pitch_yaw_rotation(double pitch, double yaw);

inline double deg_to_rad(double deg) { return deg * (M_PI / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / M_PI); }

} // namespace splatgaze
