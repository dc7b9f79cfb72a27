#include "splatgaze/scene_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splatgaze/common.hpp"
#include "splatgaze/ply_io.hpp"

namespace splatgaze {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in)
        throw InputError(std::string(what) + " file not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(std::string(what) + " " + path.string() + ": " + e.what());
    }
}

Vec3 parse_vec3(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3)
        throw InputError("manifest key '" + key + "' must be a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

EyeballRig parse_rig(const json& j, EyeSide side) {
    EyeballRig rig;
    rig.side = side;
    const std::string prefix = std::string("rigs.") + to_string(side);
    rig.center = parse_vec3(j.at("center"), prefix + ".center");
    rig.rest_direction = parse_vec3(j.at("rest_direction"), prefix + ".rest_direction");
    const json& kappa = j.at("kappa");
    if (!kappa.is_array() || kappa.size() != 2)
        throw InputError(prefix + ".kappa must be [pitch, yaw]");
    rig.kappa = Vec2(kappa[0].get<double>(), kappa[1].get<double>());
    const json& range = j.at("range");
    if (!range.is_array() || range.size() != 2)
        throw InputError(prefix + ".range must be [begin, end)");
    rig.gaussian_range = {range[0].get<std::size_t>(), range[1].get<std::size_t>()};
    return rig;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : base / p;
}

} // namespace

LandmarkSet load_landmarks(const std::filesystem::path& path, LandmarkKind kind) {
    std::ifstream in(path);
    if (!in)
        throw InputError("landmark file not found: " + path.string());
    LandmarkSet set;
    set.kind = kind;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z))
            throw InputError("landmark file " + path.string() + ": malformed line " +
                             std::to_string(line_no));
        set.points.emplace_back(x, y, z);
    }
    if (set.points.empty())
        throw InputError("landmark file " + path.string() + ": no landmarks");
    return set;
}

HeadScene load_scene(const std::filesystem::path& manifest_path) {
    const json manifest = read_json_file(manifest_path, "manifest");
    const auto base = manifest_path.parent_path();

    HeadScene scene;
    try {
        scene.facial = load_gaussians(resolve(base, manifest.at("facial_ply").get<std::string>()));
        scene.eyes = load_gaussians(resolve(base, manifest.at("eyes_ply").get<std::string>()));

        const json& rigs = manifest.at("rigs");
        scene.left_rig = parse_rig(rigs.at("left"), EyeSide::left);
        scene.right_rig = parse_rig(rigs.at("right"), EyeSide::right);

        scene.facial_landmarks = load_landmarks(
            resolve(base, manifest.at("facial_landmarks").get<std::string>()),
            LandmarkKind::facial);
        scene.eye_landmarks = load_landmarks(
            resolve(base, manifest.at("eye_landmarks").get<std::string>()), LandmarkKind::eye);

        InfluenceParams inf;
        if (manifest.contains("influence")) {
            const json& j = manifest["influence"];
            inf.t1 = j.value("t1", inf.t1);
            inf.t2 = j.value("t2", inf.t2);
            inf.t3 = j.contains("t3") ? j["t3"].get<double>() : inf.t1 * 0.5;
            inf.t4 = j.contains("t4") ? j["t4"].get<double>() : inf.t2 * 0.5;
        }
        scene.influence = inf;

        scene.channel_count = manifest.value("channels", 3);
        scene.expression_dim = manifest.value("expression_dim", 0);
        scene.pose_dim = manifest.value("pose_dim", 0);
    } catch (const json::exception& e) {
        throw InputError("manifest " + manifest_path.string() + ": " + e.what());
    }

    require_valid(scene);
    return scene;
}

void save_scene(const HeadScene& scene, const std::filesystem::path& manifest_path) {
    const auto base = manifest_path.parent_path();
    std::filesystem::create_directories(base.empty() ? "." : base);

    save_gaussians(scene.facial, base / "facial.ply");
    save_gaussians(scene.eyes, base / "eyes.ply");

    auto write_landmarks = [&](const LandmarkSet& set, const std::string& name) {
        std::ofstream out(base / name);
        out.precision(17);
        for (const Vec3& p : set.points)
            out << p.x() << " " << p.y() << " " << p.z() << "\n";
    };
    write_landmarks(scene.facial_landmarks, "facial_landmarks.txt");
    write_landmarks(scene.eye_landmarks, "eye_landmarks.txt");

    auto rig_json = [](const EyeballRig& rig) {
        return json{{"center", {rig.center.x(), rig.center.y(), rig.center.z()}},
                    {"rest_direction",
                     {rig.rest_direction.x(), rig.rest_direction.y(), rig.rest_direction.z()}},
                    {"kappa", {rig.kappa.x(), rig.kappa.y()}},
                    {"range", {rig.gaussian_range.begin, rig.gaussian_range.end}}};
    };

    json manifest = {
        {"facial_ply", "facial.ply"},
        {"eyes_ply", "eyes.ply"},
        {"rigs", {{"left", rig_json(scene.left_rig)}, {"right", rig_json(scene.right_rig)}}},
        {"facial_landmarks", "facial_landmarks.txt"},
        {"eye_landmarks", "eye_landmarks.txt"},
        {"influence",
         {{"t1", scene.influence.t1},
          {"t2", scene.influence.t2},
          {"t3", scene.influence.t3},
          {"t4", scene.influence.t4}}},
        {"channels", scene.channel_count},
        {"expression_dim", scene.expression_dim},
        {"pose_dim", scene.pose_dim},
    };
    std::ofstream out(manifest_path);
    if (!out)
        throw InputError("cannot write manifest: " + manifest_path.string());
    out << manifest.dump(2) << "\n";
}

Camera load_camera(const std::filesystem::path& path) {
    const json j = read_json_file(path, "camera");
    Camera cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        const json& m = j.at("world_to_camera");
        if (!m.is_array() || m.size() != 16)
            throw InputError("camera " + path.string() +
                             ": world_to_camera must hold 16 row-major values");
        for (int row = 0; row < 4; ++row)
            for (int col = 0; col < 4; ++col)
                cam.world_to_camera(row, col) = m[row * 4 + col].get<double>();
    } catch (const json::exception& e) {
        throw InputError("camera " + path.string() + ": " + e.what());
    }
    require_valid(cam);
    return cam;
}

void save_camera(const Camera& camera, const std::filesystem::path& path) {
    json m = json::array();
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col)
            m.push_back(camera.world_to_camera(row, col));
    const json j = {{"fx", camera.fx},       {"fy", camera.fy},
                    {"cx", camera.cx},       {"cy", camera.cy},
                    {"width", camera.width}, {"height", camera.height},
                    {"world_to_camera", m}};
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write camera: " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace splatgaze
