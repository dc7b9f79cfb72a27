#include <doctest.h>

#include <cstring>

#include "fixtures.hpp"
#include "splatgaze/common.hpp"
#include "splatgaze/eye_rig.hpp"

using namespace splatgaze;
namespace fx = splatgaze::fixtures;

TEST_CASE("rotation_from_gaze returns the exact identity for equal vectors") {
    const Quat q = rotation_from_gaze(Vec3(0, 0, 1), Vec3(0, 0, 1));
    CHECK(q.w() == 1.0);
    CHECK(q.x() == 0.0);
    CHECK(q.y() == 0.0);
    CHECK(q.z() == 0.0);
}

TEST_CASE("rotation_from_gaze maps rest onto target") {
    SUBCASE("quarter turn") {
        const Quat q = rotation_from_gaze(Vec3(1, 0, 0), Vec3(0, 0, 1));
        CHECK((q * Vec3(0, 0, 1) - Vec3(1, 0, 0)).norm() < 1e-9);
        // Minimal rotation: axis parallel to rest x target = +y.
        CHECK(std::abs(q.x()) < 1e-12);
        CHECK(std::abs(q.z()) < 1e-12);
    }
    SUBCASE("random pairs") {
        std::mt19937_64 rng(21);
        for (int i = 0; i < 100; ++i) {
            const Vec3 rest = fx::random_unit_vector(rng);
            const Vec3 target = fx::random_unit_vector(rng);
            if (rest.dot(target) < -1.0 + 1e-9)
                continue;
            const Quat q = rotation_from_gaze(target, rest);
            CHECK(std::abs(q.norm() - 1.0) < 1e-12);
            CHECK((q * rest - target).norm() < 1e-9);
        }
    }
}

TEST_CASE("rotation_from_gaze antiparallel branch is deterministic") {
    const Vec3 rest(0, 0, 1);
    const Quat q1 = rotation_from_gaze(Vec3(0, 0, -1), rest);
    const Quat q2 = rotation_from_gaze(Vec3(0, 0, -1), rest);
    CHECK(q1.w() == q2.w());
    CHECK(q1.x() == q2.x());
    CHECK(q1.y() == q2.y());
    CHECK(q1.z() == q2.z());
    // Angle pi and an axis orthogonal to rest.
    CHECK(std::abs(q1.w()) < 1e-12);
    CHECK(std::abs(Vec3(q1.x(), q1.y(), q1.z()).dot(rest)) < 1e-12);
    CHECK((q1 * rest - Vec3(0, 0, -1)).norm() < 1e-9);
}

TEST_CASE("rotation_from_gaze rejects non-unit input") {
    CHECK_THROWS_AS(rotation_from_gaze(Vec3(0, 0, 2), Vec3(0, 0, 1)), InputError);
}

TEST_CASE("apply_kappa") {
    SUBCASE("zero kappa is the exact identity") {
        const Vec3 d(0.3, -0.2, std::sqrt(1.0 - 0.09 - 0.04));
        const Vec3 out = apply_kappa(d, Vec2::Zero());
        CHECK(out.x() == d.x());
        CHECK(out.y() == d.y());
        CHECK(out.z() == d.z());
    }
    SUBCASE("quarter-turn yaw takes +z to +x") {
        const Vec3 out = apply_kappa(Vec3(0, 0, 1), Vec2(0.0, M_PI / 2));
        CHECK((out - Vec3(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("kappa on +z agrees with the gaze angle map") {
        std::mt19937_64 rng(4);
        for (int i = 0; i < 20; ++i) {
            const double p = fx::uniform(rng, -0.8, 0.8);
            const double y = fx::uniform(rng, -0.8, 0.8);
            const Vec3 via_kappa = apply_kappa(Vec3(0, 0, 1), Vec2(p, y));
            const Vec3 via_angles = gaze_angles_to_vector(p, y);
            CHECK((via_kappa - via_angles).norm() < 1e-12);
        }
    }
    SUBCASE("inverse composition restores the input") {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 20; ++i) {
            const Vec3 d = fx::random_unit_vector(rng);
            const Vec2 kappa(fx::uniform(rng, -0.5, 0.5), fx::uniform(rng, -0.5, 0.5));
            const Vec3 forward = apply_kappa(d, kappa);
            // Undo in reverse order: yaw part first, then pitch part.
            const Vec3 back =
                apply_kappa(apply_kappa(forward, Vec2(0.0, -kappa.y())),
                            Vec2(-kappa.x(), 0.0));
            CHECK((back - d).norm() < 1e-9);
            CHECK(std::abs(forward.norm() - 1.0) < 1e-12);
        }
    }
}

namespace {

EyeballRig basic_rig() {
    EyeballRig rig;
    rig.center = Vec3(0.01, -0.02, 0.04);
    rig.rest_direction = Vec3(0, 0, 1);
    rig.gaussian_range = {0, 10};
    return rig;
}

AvatarState state_with_gaze(const Vec3& left, const Vec3& right) {
    AvatarState state;
    state.expression = Eigen::VectorXd::Zero(0);
    state.pose = Eigen::VectorXd::Zero(0);
    state.left_gaze = left;
    state.right_gaze = right;
    return state;
}

} // namespace

TEST_CASE("pose_eye") {
    const EyeballRig rig = basic_rig();
    const auto zero_offset = DeformationProvider::zero(0, 0, 3);

    SUBCASE("rest gaze, zero kappa, zero provider gives the identity pose") {
        const AvatarState state = state_with_gaze(Vec3(0, 0, 1), Vec3(0, 0, 1));
        const EyePose pose = pose_eye(rig, state, zero_offset);
        CHECK(pose.is_identity());
        CHECK(pose.effective_center == rig.center);
    }
    SUBCASE("independent eyes produce different rotations") {
        EyeballRig right = rig;
        right.side = EyeSide::right;
        const AvatarState state =
            state_with_gaze(gaze_angles_to_vector(0.0, 0.3), gaze_angles_to_vector(0.0, -0.3));
        const EyePose lp = pose_eye(rig, state, zero_offset);
        const EyePose rp = pose_eye(right, state, zero_offset);
        CHECK(lp.rotation.angularDistance(rp.rotation) > 0.1);
    }
    SUBCASE("constant offset shifts the effective center exactly") {
        const Eigen::Vector3d delta(0.001, 0.0, 0.0);
        const auto provider = DeformationProvider::constant(delta, 0, 0);
        const AvatarState state = state_with_gaze(Vec3(0, 0, 1), Vec3(0, 0, 1));
        const EyePose pose = pose_eye(rig, state, provider);
        CHECK(pose.center_offset == Vec3(0.001, 0.0, 0.0));
        CHECK(pose.effective_center == rig.center + Vec3(0.001, 0.0, 0.0));
    }
    SUBCASE("kappa feeds the rotation") {
        EyeballRig with_kappa = rig;
        with_kappa.kappa = Vec2(0.0, 0.1);
        const AvatarState state = state_with_gaze(Vec3(0, 0, 1), Vec3(0, 0, 1));
        const EyePose pose = pose_eye(with_kappa, state, zero_offset);
        CHECK((pose.rotation * rig.rest_direction - gaze_angles_to_vector(0.0, 0.1)).norm() <
              1e-9);
    }
}

TEST_CASE("transform_eye_gaussians") {
    std::mt19937_64 rng(31);
    fx::EyeballOptions options;
    options.center = Vec3(0.01, -0.02, 0.04);
    options.count = 60;
    const fx::EyeFixture eye = fx::make_eyeball(rng, options);

    SUBCASE("identity pose copies the input bitwise") {
        const GaussianSet out = transform_eye_gaussians(eye.gaussians, eye.rig, EyePose{});
        CHECK(std::memcmp(out.positions.data(), eye.gaussians.positions.data(),
                          out.count() * sizeof(Vec3)) == 0);
        CHECK(std::memcmp(out.orientations.data(), eye.gaussians.orientations.data(),
                          out.count() * sizeof(Quat)) == 0);
        CHECK(out.colors == eye.gaussians.colors);
    }

    SUBCASE("a splat at the rig center is a fixed point of any rotation") {
        GaussianSet set = eye.gaussians;
        set.positions[0] = eye.rig.center;
        for (int trial = 0; trial < 10; ++trial) {
            EyePose pose;
            pose.rotation = rotation_from_gaze(fx::random_unit_vector(rng), Vec3(0, 0, 1));
            pose.effective_center = eye.rig.center;
            const GaussianSet out = transform_eye_gaussians(set, eye.rig, pose);
            CHECK(out.positions[0] == eye.rig.center);
        }
    }

    SUBCASE("rigidity: pairwise distances and scales survive random rotations") {
        std::vector<double> rest_distances;
        const auto& p = eye.gaussians.positions;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j)
                rest_distances.push_back((p[i] - p[j]).norm());

        for (int trial = 0; trial < 25; ++trial) {
            EyePose pose;
            pose.rotation = rotation_from_gaze(fx::random_unit_vector(rng), Vec3(0, 0, 1));
            pose.effective_center = eye.rig.center;
            const GaussianSet out = transform_eye_gaussians(eye.gaussians, eye.rig, pose);
            std::size_t k = 0;
            double worst = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                for (std::size_t j = i + 1; j < p.size(); ++j)
                    worst = std::max(worst, std::abs((out.positions[i] - out.positions[j]).norm() -
                                                     rest_distances[k++]));
            CHECK(worst < 1e-9);
            CHECK(std::memcmp(out.scales.data(), eye.gaussians.scales.data(),
                              out.count() * sizeof(Vec3)) == 0);
        }
    }

    SUBCASE("composition matches the quaternion product") {
        const Quat q1 = rotation_from_gaze(gaze_angles_to_vector(0.2, -0.1), Vec3(0, 0, 1));
        const Quat q2 = rotation_from_gaze(gaze_angles_to_vector(-0.15, 0.3), Vec3(0, 0, 1));
        EyePose pose1, pose2, pose12;
        pose1.rotation = q1;
        pose1.effective_center = eye.rig.center;
        pose2.rotation = q2;
        pose2.effective_center = eye.rig.center;
        pose12.rotation = q2 * q1;
        pose12.effective_center = eye.rig.center;

        const GaussianSet stepwise =
            transform_eye_gaussians(transform_eye_gaussians(eye.gaussians, eye.rig, pose1),
                                    eye.rig, pose2);
        const GaussianSet direct = transform_eye_gaussians(eye.gaussians, eye.rig, pose12);
        for (std::size_t i = 0; i < stepwise.count(); ++i) {
            CHECK((stepwise.positions[i] - direct.positions[i]).norm() < 1e-9);
            CHECK(stepwise.orientations[i].angularDistance(direct.orientations[i]) < 1e-9);
        }
    }

    SUBCASE("splats outside the range are untouched bitwise") {
        GaussianSet set = eye.gaussians;
        EyeballRig partial = eye.rig;
        partial.gaussian_range = {0, 30};
        EyePose pose;
        pose.rotation = rotation_from_gaze(gaze_angles_to_vector(0.3, 0.2), Vec3(0, 0, 1));
        pose.center_offset = Vec3(0.002, 0, 0);
        pose.effective_center = partial.center + pose.center_offset;
        const GaussianSet out = transform_eye_gaussians(set, partial, pose);
        for (std::size_t i = 30; i < set.count(); ++i) {
            CHECK(std::memcmp(&out.positions[i], &set.positions[i], sizeof(Vec3)) == 0);
            CHECK(std::memcmp(&out.orientations[i], &set.orientations[i], sizeof(Quat)) == 0);
        }
        // And the in-range part did move.
        CHECK((out.positions[0] - set.positions[0]).norm() > 1e-6);
    }

    SUBCASE("determinism: identical inputs give bitwise identical outputs") {
        EyePose pose;
        pose.rotation = rotation_from_gaze(gaze_angles_to_vector(0.1, 0.45), Vec3(0, 0, 1));
        pose.effective_center = eye.rig.center;
        const GaussianSet a = transform_eye_gaussians(eye.gaussians, eye.rig, pose);
        const GaussianSet b = transform_eye_gaussians(eye.gaussians, eye.rig, pose);
        CHECK(std::memcmp(a.positions.data(), b.positions.data(), a.count() * sizeof(Vec3)) ==
              0);
        CHECK(std::memcmp(a.orientations.data(), b.orientations.data(),
                          a.count() * sizeof(Quat)) == 0);
    }
}
