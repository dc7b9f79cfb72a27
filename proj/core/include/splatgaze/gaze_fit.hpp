#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "splatgaze/losses.hpp"

namespace splatgaze {

// The free parameters of the inverse problem, all (pitch, yaw) radians.
enum class FitParam : int {
    left_gaze_pitch = 0,
    left_gaze_yaw,
    right_gaze_pitch,
    right_gaze_yaw,
    left_kappa_pitch,
    left_kappa_yaw,
    right_kappa_pitch,
    right_kappa_yaw,
    count_,
};

constexpr int kFitParamCount = static_cast<int>(FitParam::count_);

const char* to_string(FitParam p);

struct FitBounds {
    double lower = -M_PI / 2;
    double upper = M_PI / 2;
};

// Recover gaze/kappa parameters from a target image by minimizing the masked
// photometric L1 of the eyes-only stream.
struct FitProblem {
    const HeadScene* scene = nullptr;
    Camera camera;
    RenderTarget target;              // >= 3 channels, camera-sized
    EyeMask mask;
    ProviderSet providers;            // eye_offset feeds the rig translation
    AvatarState state;                // expression/pose held fixed
    std::vector<FitParam> free_params;
    std::array<FitBounds, kFitParamCount> bounds{};
    std::array<double, kFitParamCount> initial{}; // also the fixed values
    RenderOptions render_options;
};

struct FitResult {
    std::array<double, kFitParamCount> parameters{};
    double objective = 0.0;
    int iterations = 0;                 // full coordinate sweeps
    int accepted_moves = 0;
    std::vector<double> trace;          // objective at init + each accepted move
};

struct FitConfig {
    int max_iters = 100;
    double initial_step = deg_to_rad(4.0);
    double shrink = 0.5;
    double tolerance = deg_to_rad(0.02);
};

// Masked eyes-only photometric objective at the given parameter vector.
double objective(const FitProblem& problem, const std::array<double, kFitParamCount>& params);

// Derivative-free coordinate descent: probe +/- step per free parameter,
// accept strict improvements, shrink the step when a full sweep stalls.
// Deterministic for a fixed problem and config.
FitResult fit(const FitProblem& problem, const FitConfig& config = {});

// Fit report JSON: parameters in radians and degrees plus the trace.
std::string fit_result_json(const FitProblem& problem, const FitResult& result);

} // namespace splatgaze
