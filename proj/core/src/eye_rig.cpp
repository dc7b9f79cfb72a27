#include "splatgaze/eye_rig.hpp"

#include <cmath>

#include "splatgaze/common.hpp"

namespace splatgaze {

namespace {

void require_unit(const Vec3& v, const char* what) {
    if (std::abs(v.norm() - 1.0) > 1e-6)
        throw InputError(std::string(what) + " must be unit length");
}

} // namespace

Quat rotation_from_gaze(const Vec3& target, const Vec3& rest) {
    require_unit(target, "rotation_from_gaze target");
    require_unit(rest, "rotation_from_gaze rest");

    const double dot = rest.dot(target);
    if (dot < -1.0 + 1e-9) {
        // 180 degrees about a deterministic axis orthogonal to rest.
        for (int i = 0; i < 3; ++i) {
            Vec3 axis = rest.cross(Vec3::Unit(i));
            const double n = axis.norm();
            if (n > 1e-9)
                return Quat(0.0, axis.x() / n, axis.y() / n, axis.z() / n);
        }
        throw ComputeError("degenerate rest direction");
    }

    // Half-angle form: q = normalize(1 + dot, rest x target).
    const Vec3 axis = rest.cross(target);
    Quat q(1.0 + dot, axis.x(), axis.y(), axis.z());
    q.normalize();
    return q;
}

Vec3 apply_kappa(const Vec3& optical_gaze, const Vec2& kappa) {
    if (kappa.x() == 0.0 && kappa.y() == 0.0)
        return optical_gaze;
    return pitch_yaw_rotation(kappa.x(), kappa.y()) * optical_gaze;
}

EyePose pose_eye(const EyeballRig& rig, const AvatarState& state,
                 const DeformationProvider& offset_provider) {
    EyePose pose;

    if (!offset_provider.is_zero()) {
        Eigen::VectorXd cond(state.expression.size() + state.pose.size());
        cond << state.expression, state.pose;
        const Eigen::VectorXd offset = eval_provider(
            offset_provider, {cond.data(), static_cast<std::size_t>(cond.size())}, {});
        if (offset.size() != 3)
            throw InputError("eye offset provider output must be 3-dimensional");
        pose.center_offset = Vec3(offset[0], offset[1], offset[2]);
    }

    const Vec3 corrected = apply_kappa(state.gaze(rig.side), rig.kappa);
    pose.rotation = rotation_from_gaze(corrected, rig.rest_direction);
    pose.effective_center = rig.center + pose.center_offset;
    return pose;
}

GaussianSet transform_eye_gaussians(const GaussianSet& eyes, const EyeballRig& rig,
                                    const EyePose& pose) {
    if (rig.gaussian_range.end > eyes.count())
        throw InputError("rig gaussian_range out of bounds");

    GaussianSet out = eyes;
    if (pose.is_identity())
        return out;

    const Mat3 rot = pose.rotation.toRotationMatrix();
    for (std::size_t i = rig.gaussian_range.begin; i < rig.gaussian_range.end; ++i) {
        out.positions[i] = rot * (eyes.positions[i] - rig.center) + rig.center +
                           pose.center_offset;
        Quat q = pose.rotation * eyes.orientations[i];
        q.normalize();
        out.orientations[i] = q;
    }
    return out;
}

GaussianSet transform_both_eyes(const HeadScene& scene, const AvatarState& state,
                                const DeformationProvider& offset_provider) {
    const EyePose left = pose_eye(scene.left_rig, state, offset_provider);
    const EyePose right = pose_eye(scene.right_rig, state, offset_provider);
    GaussianSet out = transform_eye_gaussians(scene.eyes, scene.left_rig, left);
    out = transform_eye_gaussians(out, scene.right_rig, right);
    return out;
}

} // namespace splatgaze
