// splatgaze: render, redirect, mask, metrics, and fit over Gaussian-splat
// head scenes. Exit codes: 0 success, 1 input/validation error, 2
// computation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "splatgaze/common.hpp"
#include "splatgaze/gaze_fit.hpp"
#include "splatgaze/image_io.hpp"
#include "splatgaze/losses.hpp"
#include "splatgaze/rasterizer.hpp"
#include "splatgaze/scene_io.hpp"

namespace sg = splatgaze;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GazeArg {
    double pitch_deg = 0.0;
    double yaw_deg = 0.0;
};

std::vector<double> parse_csv(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw sg::InputError(std::string(what) + ": cannot parse '" + item + "'");
        }
    }
    if (values.empty())
        throw sg::InputError(std::string(what) + ": empty value");
    return values;
}

GazeArg parse_gaze(const std::string& text, const char* what) {
    const auto v = parse_csv(text, what);
    if (v.size() != 2)
        throw sg::InputError(std::string(what) + ": expected 'pitch,yaw' in degrees");
    return {v[0], v[1]};
}

struct SceneBundle {
    sg::HeadScene scene;
    sg::Camera camera;
    std::vector<float> background;
    sg::AvatarState state;
};

// Keeps the first k channels of a splat set (for --channels on wide scenes).
sg::GaussianSet slice_channels(const sg::GaussianSet& set, int k) {
    sg::GaussianSet out = set;
    out.channels = k;
    out.colors.resize(set.count() * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < set.count(); ++i)
        for (int c = 0; c < k; ++c)
            out.colors[i * k + c] = set.color_row(i)[c];
    return out;
}

struct CommonArgs {
    std::string scene_path;
    std::string camera_path;
    std::string background = "0,0,0";
    std::string left_gaze = "0,0";
    std::string right_gaze = "0,0";
    int width = 0;
    int height = 0;
    int channels = 0;
    std::uint64_t seed = 0;
};

SceneBundle load_bundle(const CommonArgs& args) {
    SceneBundle bundle;
    bundle.scene = sg::load_scene(args.scene_path);
    bundle.camera = sg::load_camera(args.camera_path);
    if (args.width > 0 || args.height > 0) {
        const int w = args.width > 0 ? args.width : bundle.camera.width;
        const int h = args.height > 0 ? args.height : bundle.camera.height;
        bundle.camera = bundle.camera.resized(w, h);
    }
    if (args.channels > 0) {
        if (args.channels > bundle.scene.channel_count)
            throw sg::InputError("--channels exceeds the scene's channel count");
        bundle.scene.facial = slice_channels(bundle.scene.facial, args.channels);
        bundle.scene.eyes = slice_channels(bundle.scene.eyes, args.channels);
        bundle.scene.channel_count = args.channels;
    }

    auto bg = parse_csv(args.background, "--background");
    if (static_cast<int>(bg.size()) > bundle.scene.channel_count)
        throw sg::InputError("--background has more entries than the scene has channels");
    bundle.background.assign(bundle.scene.channel_count, 0.0f);
    for (std::size_t i = 0; i < bg.size(); ++i)
        bundle.background[i] = static_cast<float>(bg[i]);

    const GazeArg left = parse_gaze(args.left_gaze, "--left-gaze");
    const GazeArg right = parse_gaze(args.right_gaze, "--right-gaze");
    bundle.state.expression = Eigen::VectorXd::Zero(bundle.scene.expression_dim);
    bundle.state.pose = Eigen::VectorXd::Zero(bundle.scene.pose_dim);
    bundle.state.left_gaze =
        sg::gaze_angles_to_vector(sg::deg_to_rad(left.pitch_deg), sg::deg_to_rad(left.yaw_deg));
    bundle.state.right_gaze =
        sg::gaze_angles_to_vector(sg::deg_to_rad(right.pitch_deg), sg::deg_to_rad(right.yaw_deg));
    return bundle;
}

json avatar_state_json(const sg::AvatarState& state) {
    const sg::Vec2 left = sg::gaze_vector_to_angles(state.left_gaze);
    const sg::Vec2 right = sg::gaze_vector_to_angles(state.right_gaze);
    return {{"left_gaze_deg", {sg::rad_to_deg(left.x()), sg::rad_to_deg(left.y())}},
            {"right_gaze_deg", {sg::rad_to_deg(right.x()), sg::rad_to_deg(right.y())}},
            {"left_gaze", {state.left_gaze.x(), state.left_gaze.y(), state.left_gaze.z()}},
            {"right_gaze", {state.right_gaze.x(), state.right_gaze.y(), state.right_gaze.z()}},
            {"expression", std::vector<double>(state.expression.data(),
                                               state.expression.data() + state.expression.size())},
            {"pose", std::vector<double>(state.pose.data(),
                                         state.pose.data() + state.pose.size())}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw sg::InputError("cannot write " + path.string());
    out << text << "\n";
}

int cmd_render(const CommonArgs& args, const std::string& out_dir) {
    SceneBundle bundle = load_bundle(args);
    fs::create_directories(out_dir);

    const auto providers = sg::ProviderSet::zeros(
        bundle.scene.channel_count, bundle.scene.expression_dim, bundle.scene.pose_dim);
    const sg::StreamRenders streams = sg::render_streams(
        bundle.scene, providers, bundle.state, bundle.camera, bundle.background);

    const fs::path out(out_dir);
    sg::save_png(streams.combined, out / "combined.png");
    sg::save_png(streams.facial_only, out / "facial.png");
    sg::save_png(streams.eyes_only, out / "eyes.png");
    sg::save_splf(streams.combined, out / "combined.splf");
    sg::save_splf(streams.facial_only, out / "facial.splf");
    sg::save_splf(streams.eyes_only, out / "eyes.splf");

    json sidecar = {{"state", avatar_state_json(bundle.state)},
                    {"width", bundle.camera.width},
                    {"height", bundle.camera.height},
                    {"channels", bundle.scene.channel_count},
                    {"background", bundle.background},
                    {"seed", args.seed}};
    write_text(out / "render.json", sidecar.dump(2));
    return 0;
}

struct GridCell {
    double left_pitch_deg, left_yaw_deg, right_pitch_deg, right_yaw_deg;
};

std::vector<GridCell> parse_grid(const std::string& spec) {
    std::vector<GridCell> cells;
    if (spec.rfind("list:", 0) == 0) {
        std::stringstream ss(spec.substr(5));
        std::string item;
        while (std::getline(ss, item, ';')) {
            const auto v = parse_csv(item, "--grid list entry");
            if (v.size() != 4)
                throw sg::InputError("--grid list entries need 'lp,ly,rp,ry' degrees");
            cells.push_back({v[0], v[1], v[2], v[3]});
        }
        if (cells.empty())
            throw sg::InputError("--grid list is empty");
        return cells;
    }

    // "p0:p1:n,y0:y1:n": pitch x yaw ranges applied to both eyes.
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw sg::InputError("--grid expects 'p0:p1:n,y0:y1:n' or 'list:...'");
    auto parse_range = [](const std::string& text) {
        double lo = 0, hi = 0;
        int n = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1)
            throw sg::InputError("--grid range must be 'lo:hi:count' with count >= 1");
        std::vector<double> values;
        for (int i = 0; i < n; ++i)
            values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return values;
    };
    const auto pitches = parse_range(spec.substr(0, comma));
    const auto yaws = parse_range(spec.substr(comma + 1));
    for (double p : pitches)
        for (double y : yaws)
            cells.push_back({p, y, p, y});
    return cells;
}

std::string cell_filename(const GridCell& cell) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "L%+05.1f_%+05.1f_R%+05.1f_%+05.1f.png",
                  cell.left_pitch_deg, cell.left_yaw_deg, cell.right_pitch_deg,
                  cell.right_yaw_deg);
    return buf;
}

int cmd_redirect(const CommonArgs& args, const std::string& out_dir,
                 const std::string& grid_spec) {
    SceneBundle bundle = load_bundle(args);
    const auto cells = parse_grid(grid_spec);
    fs::create_directories(out_dir);

    const auto providers = sg::ProviderSet::zeros(
        bundle.scene.channel_count, bundle.scene.expression_dim, bundle.scene.pose_dim);

    json index = json::array();
    for (const GridCell& cell : cells) {
        sg::AvatarState state = bundle.state;
        state.left_gaze = sg::gaze_angles_to_vector(sg::deg_to_rad(cell.left_pitch_deg),
                                                    sg::deg_to_rad(cell.left_yaw_deg));
        state.right_gaze = sg::gaze_angles_to_vector(sg::deg_to_rad(cell.right_pitch_deg),
                                                     sg::deg_to_rad(cell.right_yaw_deg));
        const sg::StreamRenders streams = sg::render_streams(
            bundle.scene, providers, state, bundle.camera, bundle.background);
        const std::string name = cell_filename(cell);
        sg::save_png(streams.combined, fs::path(out_dir) / name);
        index.push_back({{"file", name},
                         {"left_pitch_deg", cell.left_pitch_deg},
                         {"left_yaw_deg", cell.left_yaw_deg},
                         {"right_pitch_deg", cell.right_pitch_deg},
                         {"right_yaw_deg", cell.right_yaw_deg}});
    }
    write_text(fs::path(out_dir) / "index.json", json{{"cells", index}}.dump(2));
    return 0;
}

int cmd_mask(const CommonArgs& args, const std::string& out_path, double threshold,
             int dilate) {
    SceneBundle bundle = load_bundle(args);
    const auto providers = sg::ProviderSet::zeros(
        bundle.scene.channel_count, bundle.scene.expression_dim, bundle.scene.pose_dim);
    const sg::EyeMask mask = sg::synthesize_eye_mask(bundle.scene, providers, bundle.state,
                                                     bundle.camera, threshold, dilate);
    if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    sg::save_image(sg::mask_to_image(mask), out_path);
    return 0;
}

sg::RenderTarget crop_image(const sg::RenderTarget& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width || y + h > img.height)
        throw sg::InputError("--crop rectangle out of bounds");
    sg::RenderTarget out;
    out.width = w;
    out.height = h;
    out.channels = img.channels;
    out.background = img.background;
    out.data.resize(static_cast<std::size_t>(w) * h * img.channels);
    out.alpha.resize(static_cast<std::size_t>(w) * h);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            for (int c = 0; c < img.channels; ++c)
                out.data[(static_cast<std::size_t>(row) * w + col) * img.channels + c] =
                    img.at(y + row, x + col, c);
            out.alpha[static_cast<std::size_t>(row) * w + col] = img.alpha_at(y + row, x + col);
        }
    }
    return out;
}

// Metrics want 3 channels: grayscale replicates, wider images slice.
sg::RenderTarget to_rgb(const sg::RenderTarget& img) {
    if (img.channels == 3)
        return img;
    if (img.channels > 3)
        return img.first_channels(3);
    sg::RenderTarget out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 3;
    out.background.assign(3, 0.0f);
    out.alpha = img.alpha;
    out.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t p = 0; p < static_cast<std::size_t>(img.width) * img.height; ++p)
        for (int c = 0; c < 3; ++c)
            out.data[p * 3 + c] = img.data[p * img.channels];
    return out;
}

int cmd_metrics(const std::string& path_a, const std::string& path_b,
                const std::string& mask_path, const std::string& crop_spec) {
    sg::RenderTarget a = sg::load_image(path_a);
    sg::RenderTarget b = sg::load_image(path_b);
    std::optional<sg::EyeMask> mask;
    if (!mask_path.empty())
        mask = sg::mask_from_image(sg::load_image(mask_path));

    if (!crop_spec.empty()) {
        const auto v = parse_csv(crop_spec, "--crop");
        if (v.size() != 4)
            throw sg::InputError("--crop expects 'x,y,w,h'");
        const int x = static_cast<int>(v[0]), y = static_cast<int>(v[1]);
        const int w = static_cast<int>(v[2]), h = static_cast<int>(v[3]);
        a = crop_image(a, x, y, w, h);
        b = crop_image(b, x, y, w, h);
        if (mask)
            mask = sg::mask_from_image(
                crop_image(sg::mask_to_image(*mask), x, y, w, h));
    }

    const sg::RenderTarget rgb_a = to_rgb(a);
    const sg::RenderTarget rgb_b = to_rgb(b);

    sg::MetricsReport report;
    report.psnr_db = sg::psnr(rgb_a, rgb_b, 1.0);
    report.ssim_value = sg::ssim(rgb_a, rgb_b);
    report.l1 = sg::l1_image(rgb_a, rgb_b);
    if (mask)
        report.masked_l1 = sg::eye_hr_loss(rgb_a, rgb_b, *mask);
    std::cout << sg::metrics_report_json(report) << "\n";
    return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& target_path,
            const std::string& mask_path, const std::string& out_path, int max_iters,
            double step_deg, double shrink, double tol_deg, double bound_deg) {
    SceneBundle bundle = load_bundle(args);

    sg::FitProblem problem;
    problem.scene = &bundle.scene;
    problem.camera = bundle.camera;
    problem.target = sg::load_image(target_path);
    problem.mask = mask_path.empty()
                       ? sg::EyeMask::ones(problem.target.width, problem.target.height)
                       : sg::mask_from_image(sg::load_image(mask_path));
    problem.providers = sg::ProviderSet::zeros(bundle.scene.channel_count,
                                               bundle.scene.expression_dim,
                                               bundle.scene.pose_dim);
    problem.state = bundle.state;
    problem.free_params = {sg::FitParam::left_gaze_pitch, sg::FitParam::left_gaze_yaw,
                           sg::FitParam::right_gaze_pitch, sg::FitParam::right_gaze_yaw};

    const sg::Vec2 left = sg::gaze_vector_to_angles(bundle.state.left_gaze);
    const sg::Vec2 right = sg::gaze_vector_to_angles(bundle.state.right_gaze);
    problem.initial = {left.x(), left.y(), right.x(), right.y(),
                       bundle.scene.left_rig.kappa.x(), bundle.scene.left_rig.kappa.y(),
                       bundle.scene.right_rig.kappa.x(), bundle.scene.right_rig.kappa.y()};
    const double bound = sg::deg_to_rad(bound_deg);
    for (int i = 0; i < sg::kFitParamCount; ++i)
        problem.bounds[i] = {problem.initial[i] - bound, problem.initial[i] + bound};

    sg::FitConfig config;
    config.max_iters = max_iters;
    config.initial_step = sg::deg_to_rad(step_deg);
    config.shrink = shrink;
    config.tolerance = sg::deg_to_rad(tol_deg);

    const sg::FitResult result = sg::fit(problem, config);
    const std::string report = sg::fit_result_json(problem, result);
    if (out_path.empty())
        std::cout << report << "\n";
    else
        write_text(out_path, report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-splat gaze redirection renderer"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string out_path;
    std::string grid_spec;
    std::string mask_path;
    std::string crop_spec;
    std::string image_a, image_b, target_path;
    double threshold = 0.5;
    int dilate = 0;
    int max_iters = 100;
    double step_deg = 4.0, shrink = 0.5, tol_deg = 0.02, bound_deg = 30.0;

    auto add_scene_flags = [&](CLI::App* cmd) {
        cmd->add_option("--scene", common.scene_path, "Scene manifest JSON")->required();
        cmd->add_option("--camera", common.camera_path, "Camera JSON")->required();
        cmd->add_option("--width", common.width, "Output width (rescales intrinsics)");
        cmd->add_option("--height", common.height, "Output height");
        cmd->add_option("--background", common.background, "Background channels, e.g. 0.2,0.2,0.2");
        cmd->add_option("--left-gaze", common.left_gaze, "Left gaze 'pitch,yaw' in degrees");
        cmd->add_option("--right-gaze", common.right_gaze, "Right gaze 'pitch,yaw' in degrees");
        cmd->add_option("--channels", common.channels, "Render only the first K channels");
        cmd->add_option("--seed", common.seed, "Deterministic seed");
    };

    CLI::App* render = app.add_subcommand("render", "Render combined/facial/eyes streams");
    add_scene_flags(render);
    render->add_option("--out", out_path, "Output directory")->required();

    CLI::App* redirect = app.add_subcommand("redirect", "Render a grid of gaze directions");
    add_scene_flags(redirect);
    redirect->add_option("--out", out_path, "Output directory")->required();
    redirect->add_option("--grid", grid_spec,
                         "'p0:p1:n,y0:y1:n' (both eyes) or 'list:lp,ly,rp,ry;...'")
        ->required();

    CLI::App* mask_cmd = app.add_subcommand("mask", "Synthesize the eye region mask");
    add_scene_flags(mask_cmd);
    mask_cmd->add_option("--out", out_path, "Output mask image (.png or .splf)")->required();
    mask_cmd->add_option("--threshold", threshold, "Eye alpha threshold in (0,1)");
    mask_cmd->add_option("--dilate", dilate, "Dilation radius in pixels");

    CLI::App* metrics = app.add_subcommand("metrics", "PSNR/SSIM/L1 between two images");
    metrics->add_option("image_a", image_a, "First image (.png or .splf)")->required();
    metrics->add_option("image_b", image_b, "Second image")->required();
    metrics->add_option("--mask", mask_path, "Eye mask image for masked losses");
    metrics->add_option("--crop", crop_spec, "Crop rectangle 'x,y,w,h' applied to both");

    CLI::App* fit = app.add_subcommand("fit", "Fit per-eye gaze to a target image");
    add_scene_flags(fit);
    fit->add_option("target", target_path, "Target image (.png or .splf)")->required();
    fit->add_option("--mask", mask_path, "Eye mask image (default: all ones)");
    fit->add_option("--out", out_path, "Report path (default: stdout)");
    fit->add_option("--max-iters", max_iters, "Coordinate-descent sweep limit");
    fit->add_option("--step", step_deg, "Initial probe step, degrees");
    fit->add_option("--shrink", shrink, "Step shrink factor on stalled sweeps");
    fit->add_option("--tol", tol_deg, "Terminal step size, degrees");
    fit->add_option("--bound", bound_deg, "Search bound around the init, degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (render->parsed())
            return cmd_render(common, out_path);
        if (redirect->parsed())
            return cmd_redirect(common, out_path, grid_spec);
        if (mask_cmd->parsed())
            return cmd_mask(common, out_path, threshold, dilate);
        if (metrics->parsed())
            return cmd_metrics(image_a, image_b, mask_path, crop_spec);
        if (fit->parsed())
            return cmd_fit(common, target_path, mask_path, out_path, max_iters, step_deg,
                           shrink, tol_deg, bound_deg);
    } catch (const sg::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sg::ComputeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
