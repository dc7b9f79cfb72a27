#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "splatgaze/rasterizer.hpp"
#include "splatgaze/scene.hpp"

// Deterministic synthetic scenes for tests and benchmarks. Everything is
// derived from the caller's RNG; identical seeds give identical fixtures.
namespace splatgaze::fixtures {

double uniform(std::mt19937_64& rng, double lo, double hi);
Vec3 random_unit_vector(std::mt19937_64& rng);
Quat random_unit_quaternion(std::mt19937_64& rng);

// A generic valid splat set: positions in a centered box, random unit
// orientations, scales in [scale_lo, scale_hi], opacities in [0.05, 0.95].
GaussianSet random_gaussian_set(std::mt19937_64& rng, std::size_t count, int channels,
                                double box_half_width = 0.1, double scale_lo = 0.002,
                                double scale_hi = 0.01);

// Camera on the +z side of the origin looking back at it (world +y maps to
// image up).
Camera frontal_camera(int width, int height, double focal_px, double distance_m);

// Scene engineered so render() and brute_force_render() take identical
// arithmetic paths: every splat's footprint covers the whole viewport, alpha
// never dips below the skip threshold inside it, and depths are tie-free.
struct OracleScene {
    GaussianSet set;
    Camera camera;
    std::vector<float> background;
};
OracleScene cutoff_free_scene(std::mt19937_64& rng, std::size_t count, int channels);

// Textured synthetic eyeball: splats on a sphere with a dense, distinctly
// colored iris cap (and dark pupil) facing rest_direction, so gaze is
// observable from pixels.
struct EyeballOptions {
    Vec3 center = Vec3::Zero();
    double radius = 0.012;
    std::size_t count = 160;
    int channels = 3;
    double iris_fraction = 0.65;     // fraction of splats in the iris cap
    double iris_half_angle = 0.45;   // radians
    double pupil_half_angle = 0.14;  // radians
};

struct EyeFixture {
    GaussianSet gaussians;
    EyeballRig rig;
    LandmarkSet landmarks; // ring around the eye, LandmarkKind::eye
};

EyeFixture make_eyeball(std::mt19937_64& rng, const EyeballOptions& options,
                        EyeSide side = EyeSide::left);

// Two-eye head scene with a facial splat cloud and landmark sets. Influence
// thresholds are desk-scale (1.5 / 2.5 / 0.75 / 1.25 cm) so both ramp
// regions exist inside the fixture's geometry.
struct HeadSceneOptions {
    int channels = 3;
    std::size_t eye_count_per_side = 140;
    std::size_t facial_count = 200;
    double eye_separation = 0.064;
    Vec3 eye_mid = Vec3(0.0, 0.0, 0.04);
    Vec2 left_kappa = Vec2::Zero();
    Vec2 right_kappa = Vec2::Zero();
    InfluenceParams influence{0.015, 0.025, 0.0075, 0.0125};
    // When set, every facial splat is rejection-sampled to sit farther than
    // 1.2 * t4 from all eye landmarks (for gaze-locality checks).
    bool facial_far_only = false;
};

HeadScene make_head_scene(std::mt19937_64& rng, const HeadSceneOptions& options = {});

// Single-eye scene (right rig holds an empty range) for fit round-trips.
HeadScene make_single_eye_scene(std::mt19937_64& rng, int channels = 3);

Camera head_scene_camera(int width = 64, int height = 64);
Camera single_eye_camera(int width = 64, int height = 64);

// FNV-1a 64-bit over a file's bytes, as a hex string. Golden checksums for
// regression tests, not cryptography.
std::string hash_file(const std::filesystem::path& path);

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace splatgaze::fixtures
