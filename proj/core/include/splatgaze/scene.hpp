#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splatgaze/geometry.hpp"

namespace splatgaze {

// A splat cloud. Scales and opacities are linear (the PLY interchange form
// stores log-scales and logit-opacities; conversion happens at the I/O
// boundary). Colors are view-independent N-channel values, row-major
// count x channels; the first three channels are the RGB the PNG writer
// and image losses see.
struct GaussianSet {
    std::vector<Vec3> positions;
    std::vector<Quat> orientations; // unit, stored (w, x, y, z)
    std::vector<Vec3> scales;       // per-axis stddev, strictly positive
    std::vector<double> opacities;  // in [0, 1]
    std::vector<double> colors;     // count * channels, row-major
    int channels = 3;

    std::size_t count() const { return positions.size(); }

    std::span<const double> color_row(std::size_t i) const {
        return {colors.data() + i * static_cast<std::size_t>(channels),
                static_cast<std::size_t>(channels)};
    }
    std::span<double> color_row(std::size_t i) {
        return {colors.data() + i * static_cast<std::size_t>(channels),
                static_cast<std::size_t>(channels)};
    }
};

enum class EyeSide { left, right };

const char* to_string(EyeSide side);

// Contiguous [begin, end) index range into the eye GaussianSet.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
};

// Rigid eyeball sub-structure: the Gaussians in `gaussian_range` rotate as a
// unit about `center`. `kappa` is the per-eye (pitch, yaw) offset between the
// visual axis (requested gaze) and the optical axis the rig actually rotates.
struct EyeballRig {
    EyeSide side = EyeSide::left;
    Vec3 center = Vec3::Zero();
    Vec3 rest_direction = Vec3(0, 0, 1); // iris-forward at rest, unit
    Vec2 kappa = Vec2::Zero();           // (pitch, yaw) radians
    IndexRange gaussian_range;
};

enum class LandmarkKind { facial, eye };

struct LandmarkSet {
    std::vector<Vec3> points;
    LandmarkKind kind = LandmarkKind::facial;
};

// Influence thresholds (meters): (t1, t2) bound the expression ramp,
// (t3, t4) the gaze ramp.
struct InfluenceParams {
    double t1 = 0.15;
    double t2 = 0.25;
    double t3 = 0.075;
    double t4 = 0.125;
};

struct HeadScene {
    GaussianSet facial;
    GaussianSet eyes;
    EyeballRig left_rig;
    EyeballRig right_rig;
    LandmarkSet facial_landmarks; // excludes the eyes
    LandmarkSet eye_landmarks;
    InfluenceParams influence;
    int channel_count = 3;
    int expression_dim = 0;
    int pose_dim = 0;

    const EyeballRig& rig(EyeSide side) const {
        return side == EyeSide::left ? left_rig : right_rig;
    }

    // Eye landmarks split by side: each point goes to the rig whose center
    // is nearer (ties to left). The manifest ships one eye landmark file;
    // per-side gaze influence needs per-side subsets.
    LandmarkSet eye_landmarks_for(EyeSide side) const;
};

// Per-frame animation inputs. Gaze is stored as unit vectors; use
// gaze_angles_to_vector for the (pitch, yaw) parameterization.
struct AvatarState {
    Eigen::VectorXd expression; // theta
    Eigen::VectorXd pose;       // beta
    Vec3 left_gaze = Vec3(0, 0, 1);
    Vec3 right_gaze = Vec3(0, 0, 1);

    const Vec3& gaze(EyeSide side) const {
        return side == EyeSide::left ? left_gaze : right_gaze;
    }
};

// Pinhole camera, axes x-right / y-down / z-forward.
struct Camera {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    Mat4 world_to_camera = Mat4::Identity();

    Mat3 rotation() const { return world_to_camera.block<3, 3>(0, 0); }
    Vec3 translation() const { return world_to_camera.block<3, 1>(0, 3); }

    // Rescales intrinsics for a different output resolution.
    Camera resized(int new_width, int new_height) const;
};

// One invariant violation; `index` is the offending element (or -1 when the
// violation is not per-element).
struct Violation {
    std::string type_name;
    std::string field;
    std::ptrdiff_t index = -1;
    std::string message;
};

std::string to_string(const Violation& v);

std::vector<Violation> validate(const GaussianSet& set, const std::string& name = "GaussianSet");
std::vector<Violation> validate(const Camera& camera);
std::vector<Violation> validate(const HeadScene& scene);

// Throws InputError listing every violation; no-op when the list is empty.
void require_valid(const HeadScene& scene);
void require_valid(const Camera& camera);

} // namespace splatgaze
