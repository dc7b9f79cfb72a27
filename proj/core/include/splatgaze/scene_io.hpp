#pragma once

#include <filesystem>

#include "splatgaze/scene.hpp"

namespace splatgaze {

// Scene manifest: JSON with keys `facial_ply`, `eyes_ply`, `rigs` (objects
// `left` / `right`, each with `center`, `rest_direction`, `kappa`,
// `range` = [begin, end)), `facial_landmarks`, `eye_landmarks` (paths to
// whitespace-separated x y z text), optional `influence`
// ({t1, t2, t3, t4}, defaults 0.15 / 0.25 / t1*0.5 / t2*0.5), optional
// `channels` (default 3), optional `expression_dim` / `pose_dim`.
// Relative paths resolve against the manifest's directory.
// The returned scene passed full validation.
HeadScene load_scene(const std::filesystem::path& manifest_path);

void save_scene(const HeadScene& scene, const std::filesystem::path& manifest_path);

// Whitespace-separated x y z per line; blank lines and '#' comments skipped.
LandmarkSet load_landmarks(const std::filesystem::path& path, LandmarkKind kind);

// Camera JSON: {fx, fy, cx, cy, width, height, world_to_camera: [16 row-major]}.
Camera load_camera(const std::filesystem::path& path);
void save_camera(const Camera& camera, const std::filesystem::path& path);

} // namespace splatgaze
