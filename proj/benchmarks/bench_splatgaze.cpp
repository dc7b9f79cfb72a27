#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "splatgaze/deformation.hpp"
#include "splatgaze/eye_rig.hpp"
#include "splatgaze/losses.hpp"
#include "splatgaze/rasterizer.hpp"

namespace sg = splatgaze;
namespace fx = splatgaze::fixtures;

namespace {

sg::AvatarState neutral_state() {
    sg::AvatarState state;
    state.expression = Eigen::VectorXd::Zero(0);
    state.pose = Eigen::VectorXd::Zero(0);
    return state;
}

void BM_RenderHeadScene(benchmark::State& state) {
    std::mt19937_64 rng(1);
    fx::HeadSceneOptions options;
    options.facial_count = static_cast<std::size_t>(state.range(0));
    const sg::HeadScene scene = fx::make_head_scene(rng, options);
    const sg::Camera cam = fx::head_scene_camera(static_cast<int>(state.range(1)),
                                                 static_cast<int>(state.range(1)));
    const sg::GaussianSet combined = sg::concatenate(scene.facial, scene.eyes);
    const std::vector<float> bg = {0.f, 0.f, 0.f};
    for (auto _ : state)
        benchmark::DoNotOptimize(sg::render(combined, cam, bg));
}
BENCHMARK(BM_RenderHeadScene)->Args({200, 64})->Args({200, 256})->Args({1000, 256})
    ->Unit(benchmark::kMillisecond);

void BM_BruteForceRender(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto scene = fx::cutoff_free_scene(rng, static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sg::brute_force_render(scene.set, scene.camera, scene.background));
}
BENCHMARK(BM_BruteForceRender)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FaceDeformation(benchmark::State& state) {
    std::mt19937_64 rng(3);
    fx::HeadSceneOptions options;
    options.facial_count = static_cast<std::size_t>(state.range(0));
    const sg::HeadScene scene = fx::make_head_scene(rng, options);

    sg::RadialParams params;
    params.center = scene.left_rig.center;
    params.length_scale = 0.02;
    params.amplitude = Eigen::VectorXd::Constant(3, 0.002);
    params.cond_gain = 1.0;
    sg::ProviderSet providers = sg::ProviderSet::zeros(scene.channel_count, 0, 0);
    providers.displacement.left_gaze = sg::DeformationProvider::radial(params, 3, 3);
    providers.displacement.right_gaze = sg::DeformationProvider::radial(params, 3, 3);

    const sg::AvatarState st = neutral_state();
    for (auto _ : state)
        benchmark::DoNotOptimize(sg::apply_face_deformation(scene, providers, st));
}
BENCHMARK(BM_FaceDeformation)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_EyeTransform(benchmark::State& state) {
    std::mt19937_64 rng(4);
    fx::EyeballOptions options;
    options.count = static_cast<std::size_t>(state.range(0));
    const fx::EyeFixture eye = fx::make_eyeball(rng, options);
    sg::EyePose pose;
    pose.rotation = sg::rotation_from_gaze(sg::gaze_angles_to_vector(0.2, -0.1),
                                           sg::Vec3(0, 0, 1));
    pose.effective_center = eye.rig.center;
    for (auto _ : state)
        benchmark::DoNotOptimize(sg::transform_eye_gaussians(eye.gaussians, eye.rig, pose));
}
BENCHMARK(BM_EyeTransform)->Arg(160)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_Ssim(benchmark::State& state) {
    std::mt19937_64 rng(5);
    const auto scene = fx::cutoff_free_scene(rng, 60, 3);
    const sg::RenderTarget a = sg::render(scene.set, scene.camera, scene.background);
    sg::RenderTarget b = a;
    b.data[0] += 0.01f;
    for (auto _ : state)
        benchmark::DoNotOptimize(sg::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
