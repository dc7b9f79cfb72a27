#include "splatgaze/gaze_fit.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "splatgaze/common.hpp"
#include "splatgaze/eye_rig.hpp"

namespace splatgaze {

namespace {

// Applies a parameter vector: gaze angles go into the avatar state, kappa
// angles override the rig values.
struct Configured {
    HeadScene scene;
    AvatarState state;
};

Configured configure(const FitProblem& problem,
                     const std::array<double, kFitParamCount>& params) {
    Configured c{*problem.scene, problem.state};
    c.state.left_gaze = gaze_angles_to_vector(params[0], params[1]);
    c.state.right_gaze = gaze_angles_to_vector(params[2], params[3]);
    c.scene.left_rig.kappa = Vec2(params[4], params[5]);
    c.scene.right_rig.kappa = Vec2(params[6], params[7]);
    return c;
}

void check_problem(const FitProblem& problem) {
    if (!problem.scene)
        throw InputError("fit problem has no scene");
    if (problem.free_params.empty())
        throw InputError("fit problem has no free parameters");
    for (FitParam p : problem.free_params) {
        const int i = static_cast<int>(p);
        const FitBounds& b = problem.bounds[i];
        if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper))
            throw InputError(std::string("bad bounds for ") + to_string(p));
        if (problem.initial[i] < b.lower || problem.initial[i] > b.upper)
            throw InputError(std::string("initial point outside bounds for ") + to_string(p));
    }
    if (problem.target.width != problem.camera.width ||
        problem.target.height != problem.camera.height)
        throw InputError("fit target size does not match the camera");
}

} // namespace

const char* to_string(FitParam p) {
    switch (p) {
    case FitParam::left_gaze_pitch: return "left_gaze_pitch";
    case FitParam::left_gaze_yaw: return "left_gaze_yaw";
    case FitParam::right_gaze_pitch: return "right_gaze_pitch";
    case FitParam::right_gaze_yaw: return "right_gaze_yaw";
    case FitParam::left_kappa_pitch: return "left_kappa_pitch";
    case FitParam::left_kappa_yaw: return "left_kappa_yaw";
    case FitParam::right_kappa_pitch: return "right_kappa_pitch";
    case FitParam::right_kappa_yaw: return "right_kappa_yaw";
    default: return "invalid";
    }
}

double objective(const FitProblem& problem, const std::array<double, kFitParamCount>& params) {
    const Configured c = configure(problem, params);
    const GaussianSet eyes = transform_both_eyes(c.scene, c.state, problem.providers.eye_offset);
    std::vector<float> background(eyes.channels, 0.0f);
    const RenderTarget rendered =
        render(eyes, problem.camera, background, problem.render_options);
    const RenderTarget target3 =
        problem.target.channels == 3 ? problem.target : problem.target.first_channels(3);
    return eye_hr_loss(rendered.first_channels(3), target3, problem.mask);
}

FitResult fit(const FitProblem& problem, const FitConfig& config) {
    check_problem(problem);

    FitResult result;
    result.parameters = problem.initial;
    result.objective = objective(problem, result.parameters);
    result.trace.push_back(result.objective);

    double step = config.initial_step;
    for (int iter = 0; iter < config.max_iters && step >= config.tolerance; ++iter) {
        bool improved = false;
        for (FitParam p : problem.free_params) {
            const int i = static_cast<int>(p);
            const FitBounds& b = problem.bounds[i];
            const double base = result.parameters[i];

            double best_value = result.objective;
            double best_param = base;
            for (double candidate : {base + step, base - step}) {
                const double clamped = std::clamp(candidate, b.lower, b.upper);
                if (clamped == base)
                    continue;
                auto probe = result.parameters;
                probe[i] = clamped;
                const double value = objective(problem, probe);
                if (value < best_value) {
                    best_value = value;
                    best_param = clamped;
                }
            }
            if (best_param != base) {
                result.parameters[i] = best_param;
                result.objective = best_value;
                result.trace.push_back(best_value);
                ++result.accepted_moves;
                improved = true;
            }
        }
        ++result.iterations;
        if (!improved)
            step *= config.shrink;
    }
    return result;
}

std::string fit_result_json(const FitProblem& problem, const FitResult& result) {
    nlohmann::json params_rad, params_deg;
    for (int i = 0; i < kFitParamCount; ++i) {
        const char* name = to_string(static_cast<FitParam>(i));
        params_rad[name] = result.parameters[i];
        params_deg[name] = rad_to_deg(result.parameters[i]);
    }
    nlohmann::json free_list = nlohmann::json::array();
    for (FitParam p : problem.free_params)
        free_list.push_back(to_string(p));
    const nlohmann::json j = {{"parameters_rad", params_rad},
                              {"parameters_deg", params_deg},
                              {"free_params", free_list},
                              {"objective", result.objective},
                              {"iterations", result.iterations},
                              {"accepted_moves", result.accepted_moves},
                              {"trace", result.trace}};
    return j.dump(2);
}

} // namespace splatgaze
