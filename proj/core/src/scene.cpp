#include "splatgaze/scene.hpp"

#include <cmath>
#include <sstream>

#include "splatgaze/common.hpp"

namespace splatgaze {

namespace {

bool finite3(const Vec3& v) {
    return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

void check_landmarks(const LandmarkSet& set, const std::string& name,
                     std::vector<Violation>& out) {
    if (set.points.empty())
        out.push_back({name, "points", -1, "landmark set is empty"});
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        if (!finite3(set.points[i]))
            out.push_back({name, "points", static_cast<std::ptrdiff_t>(i),
                           "non-finite landmark coordinates"});
    }
}

} // namespace

const char* to_string(EyeSide side) {
    return side == EyeSide::left ? "left" : "right";
}

LandmarkSet HeadScene::eye_landmarks_for(EyeSide side) const {
    LandmarkSet subset;
    subset.kind = LandmarkKind::eye;
    for (const Vec3& p : eye_landmarks.points) {
        const double dl = (p - left_rig.center).norm();
        const double dr = (p - right_rig.center).norm();
        const EyeSide nearest = (dl <= dr) ? EyeSide::left : EyeSide::right;
        if (nearest == side)
            subset.points.push_back(p);
    }
    return subset;
}

Camera Camera::resized(int new_width, int new_height) const {
    Camera out = *this;
    const double sx = static_cast<double>(new_width) / width;
    const double sy = static_cast<double>(new_height) / height;
    out.fx *= sx;
    out.cx *= sx;
    out.fy *= sy;
    out.cy *= sy;
    out.width = new_width;
    out.height = new_height;
    return out;
}

std::string to_string(const Violation& v) {
    std::ostringstream os;
    os << v.type_name << "." << v.field;
    if (v.index >= 0)
        os << "[" << v.index << "]";
    os << ": " << v.message;
    return os.str();
}

std::vector<Violation> validate(const GaussianSet& set, const std::string& name) {
    std::vector<Violation> out;
    const std::size_t n = set.count();
    if (set.orientations.size() != n)
        out.push_back({name, "orientations", -1, "count mismatch with positions"});
    if (set.scales.size() != n)
        out.push_back({name, "scales", -1, "count mismatch with positions"});
    if (set.opacities.size() != n)
        out.push_back({name, "opacities", -1, "count mismatch with positions"});
    if (set.channels < 1)
        out.push_back({name, "channels", -1, "channel count must be >= 1"});
    if (set.colors.size() != n * static_cast<std::size_t>(set.channels))
        out.push_back({name, "colors", -1, "count mismatch with positions"});
    if (!out.empty())
        return out; // per-element checks need consistent array sizes

    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::ptrdiff_t>(i);
        if (!finite3(set.positions[i]))
            out.push_back({name, "positions", idx, "non-finite position"});
        const double qn = set.orientations[i].norm();
        if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-6)
            out.push_back({name, "orientations", idx, "quaternion norm deviates from 1"});
        const Vec3& s = set.scales[i];
        if (!finite3(s) || s.minCoeff() <= 0.0)
            out.push_back({name, "scales", idx, "scale component not strictly positive"});
        const double a = set.opacities[i];
        if (!std::isfinite(a) || a < 0.0 || a > 1.0)
            out.push_back({name, "opacities", idx, "opacity out of range [0, 1]"});
        for (int c = 0; c < set.channels; ++c) {
            if (!std::isfinite(set.color_row(i)[c])) {
                out.push_back({name, "colors", idx, "non-finite color value"});
                break;
            }
        }
    }
    return out;
}

std::vector<Violation> validate(const Camera& camera) {
    std::vector<Violation> out;
    if (!(camera.fx > 0.0) || !(camera.fy > 0.0))
        out.push_back({"Camera", "focal", -1, "fx and fy must be positive"});
    if (camera.width < 1 || camera.height < 1)
        out.push_back({"Camera", "size", -1, "width and height must be positive"});
    const Mat3 r = camera.rotation();
    if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
        out.push_back({"Camera", "world_to_camera", -1, "rotation block not orthonormal"});
    else if (r.determinant() < 0.0)
        out.push_back({"Camera", "world_to_camera", -1, "rotation determinant must be +1"});
    const Eigen::RowVector4d bottom = camera.world_to_camera.row(3);
    if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
        out.push_back({"Camera", "world_to_camera", -1, "bottom row must be (0,0,0,1)"});
    return out;
}

std::vector<Violation> validate(const HeadScene& scene) {
    std::vector<Violation> out = validate(scene.facial, "HeadScene.facial");
    auto eye_violations = validate(scene.eyes, "HeadScene.eyes");
    out.insert(out.end(), eye_violations.begin(), eye_violations.end());

    if (scene.facial.channels != scene.channel_count)
        out.push_back({"HeadScene", "facial.channels", -1, "channel count differs from scene"});
    if (scene.eyes.channels != scene.channel_count)
        out.push_back({"HeadScene", "eyes.channels", -1, "channel count differs from scene"});

    for (const EyeballRig* rig : {&scene.left_rig, &scene.right_rig}) {
        const std::string name = std::string("EyeballRig.") + to_string(rig->side);
        if (std::abs(rig->rest_direction.norm() - 1.0) > 1e-9)
            out.push_back({name, "rest_direction", -1, "must be unit length"});
        if (!finite3(rig->center))
            out.push_back({name, "center", -1, "non-finite center"});
        if (rig->gaussian_range.begin > rig->gaussian_range.end ||
            rig->gaussian_range.end > scene.eyes.count())
            out.push_back({name, "gaussian_range", -1, "range out of bounds"});
    }

    const IndexRange& l = scene.left_rig.gaussian_range;
    const IndexRange& r = scene.right_rig.gaussian_range;
    const bool overlap = l.begin < r.end && r.begin < l.end && l.size() > 0 && r.size() > 0;
    if (overlap)
        out.push_back({"HeadScene", "rigs", -1, "overlapping rig ranges"});
    else if (l.size() + r.size() != scene.eyes.count())
        out.push_back({"HeadScene", "rigs", -1, "rig ranges do not partition the eye set"});

    check_landmarks(scene.facial_landmarks, "HeadScene.facial_landmarks", out);
    check_landmarks(scene.eye_landmarks, "HeadScene.eye_landmarks", out);

    const InfluenceParams& inf = scene.influence;
    if (!(inf.t1 > 0.0 && inf.t1 < inf.t2))
        out.push_back({"InfluenceParams", "t1/t2", -1, "need 0 < t1 < t2"});
    if (!(inf.t3 > 0.0 && inf.t3 < inf.t4))
        out.push_back({"InfluenceParams", "t3/t4", -1, "need 0 < t3 < t4"});

    if (scene.expression_dim < 0)
        out.push_back({"HeadScene", "expression_dim", -1, "must be non-negative"});
    if (scene.pose_dim < 0)
        out.push_back({"HeadScene", "pose_dim", -1, "must be non-negative"});
    return out;
}

namespace {

template <typename T>
void require_valid_impl(const T& value, const char* what) {
    auto violations = validate(value);
    if (violations.empty())
        return;
    std::ostringstream os;
    os << what << " failed validation:";
    for (const auto& v : violations)
        os << "\n  - " << to_string(v);
    throw InputError(os.str());
}

} // namespace

void require_valid(const HeadScene& scene) { require_valid_impl(scene, "scene"); }
void require_valid(const Camera& camera) { require_valid_impl(camera, "camera"); }

} // namespace splatgaze
