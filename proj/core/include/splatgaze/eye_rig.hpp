#pragma once

#include "splatgaze/deformation.hpp"
#include "splatgaze/scene.hpp"

namespace splatgaze {

// One eye's rigid placement for a frame: rotation about the rig center plus
// an expression/pose-driven translation of that center.
struct EyePose {
    Quat rotation = Quat::Identity();  // rest -> target
    Vec3 center_offset = Vec3::Zero(); // displacement of the eyeball center
    Vec3 effective_center = Vec3::Zero(); // rig.center + center_offset

    bool is_identity() const {
        return rotation.w() == 1.0 && rotation.x() == 0.0 && rotation.y() == 0.0 &&
               rotation.z() == 0.0 && center_offset.x() == 0.0 && center_offset.y() == 0.0 &&
               center_offset.z() == 0.0;
    }
};

// Minimal-angle rotation taking `rest` onto `target` (axis rest x target).
// Antiparallel inputs (dot < -1 + 1e-9) get a 180-degree turn about the
// first axis e_i (smallest i) not parallel to rest, so the degenerate case
// is deterministic.
Quat rotation_from_gaze(const Vec3& target, const Vec3& rest);

// Visual -> optical axis correction: yaw about the head-frame up axis, then
// pitch about the rotated right axis (signs matching gaze_angles_to_vector,
// so apply_kappa(+z, k) == gaze_angles_to_vector(k)).
Vec3 apply_kappa(const Vec3& optical_gaze, const Vec2& kappa);

// Combines the kappa-corrected gaze rotation with the offset provider's
// center displacement (conditioned on expression ++ pose).
EyePose pose_eye(const EyeballRig& rig, const AvatarState& state,
                 const DeformationProvider& offset_provider);

// Rigidly transforms the rig's Gaussians:
//   position' = R (position - rig.center) + rig.center + center_offset
//   orientation' = R * orientation (renormalized)
// Scales, opacities, colors are untouched; Gaussians outside the range are
// copied bitwise, as is everything under an exact identity pose.
GaussianSet transform_eye_gaussians(const GaussianSet& eyes, const EyeballRig& rig,
                                    const EyePose& pose);

// Both rigs applied to the scene's eye stream.
GaussianSet transform_both_eyes(const HeadScene& scene, const AvatarState& state,
                                const DeformationProvider& offset_provider);

} // namespace splatgaze
