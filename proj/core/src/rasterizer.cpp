#include "splatgaze/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splatgaze/common.hpp"
#include "splatgaze/eye_rig.hpp"

namespace splatgaze {

namespace {

constexpr int kTileSize = 16;
constexpr double kAlphaClip = 0.99;
constexpr double kAlphaSkip = 1.0 / 255.0;
constexpr double kCovDilation = 0.3; // pixel-space low-pass
constexpr double kMaxMahalanobis = 9.0; // 3-sigma ellipse
constexpr double kMinDeterminant = 1e-12;

// Flattened per-splat state for the compositing loops.
struct Splat {
    double mean_x, mean_y;
    double inv_a, inv_b, inv_c; // inverse 2D covariance [[a, b], [b, c]]
    double opacity;
    double depth;
    std::uint32_t source;
    int x0, x1, y0, y1; // 3-sigma AABB clamped to the viewport, [x0, x1)
};

struct Prepared {
    std::vector<Splat> splats;          // depth-sorted, index tiebreak
    std::vector<float> colors;          // splat-major, channels per splat
};

Prepared prepare(const GaussianSet& set, const Camera& camera, const RenderOptions& options) {
    Prepared prep;
    const int n_channels = set.channels;
    std::vector<std::size_t> order;

    for (std::size_t i = 0; i < set.count(); ++i) {
        const auto projected = project_gaussian(i, set, camera, options.near);
        if (!projected)
            continue;
        const Mat2& cov = projected->cov2d;
        const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(0, 1);
        if (det < kMinDeterminant)
            continue; // near-singular footprint, skip

        Splat s;
        s.mean_x = projected->mean2d.x();
        s.mean_y = projected->mean2d.y();
        const double inv_det = 1.0 / det;
        s.inv_a = cov(1, 1) * inv_det;
        s.inv_b = -cov(0, 1) * inv_det;
        s.inv_c = cov(0, 0) * inv_det;
        s.opacity = projected->opacity;
        s.depth = projected->depth;
        s.source = static_cast<std::uint32_t>(i);

        const double rx = 3.0 * std::sqrt(cov(0, 0));
        const double ry = 3.0 * std::sqrt(cov(1, 1));
        s.x0 = std::clamp(static_cast<int>(std::floor(s.mean_x - rx)), 0, camera.width);
        s.x1 = std::clamp(static_cast<int>(std::ceil(s.mean_x + rx)) + 1, 0, camera.width);
        s.y0 = std::clamp(static_cast<int>(std::floor(s.mean_y - ry)), 0, camera.height);
        s.y1 = std::clamp(static_cast<int>(std::ceil(s.mean_y + ry)) + 1, 0, camera.height);

        prep.splats.push_back(s);
    }

    std::sort(prep.splats.begin(), prep.splats.end(), [](const Splat& a, const Splat& b) {
        if (a.depth != b.depth)
            return a.depth < b.depth;
        return a.source < b.source;
    });

    prep.colors.resize(prep.splats.size() * static_cast<std::size_t>(n_channels));
    for (std::size_t k = 0; k < prep.splats.size(); ++k) {
        const auto row = set.color_row(prep.splats[k].source);
        for (int c = 0; c < n_channels; ++c)
            prep.colors[k * n_channels + c] = static_cast<float>(row[c]);
    }
    return prep;
}

// Front-to-back compositing of one pixel over a splat subsequence.
// `use_cutoffs` enables the 3-sigma ellipse restriction and the 1/255
// alpha skip; the brute-force oracle runs with them off.
template <bool use_cutoffs>
void composite_pixel(double px, double py, std::span<const std::uint32_t> splat_ids,
                     const Prepared& prep, int channels, float* acc, double& out_alpha,
                     double& out_transmittance) {
    double transmittance = 1.0;
    double alpha_acc = 0.0;
    for (std::uint32_t k : splat_ids) {
        const Splat& s = prep.splats[k];
        const double dx = px - s.mean_x;
        const double dy = py - s.mean_y;
        const double m = s.inv_a * dx * dx + 2.0 * s.inv_b * dx * dy + s.inv_c * dy * dy;
        if constexpr (use_cutoffs) {
            if (m > kMaxMahalanobis)
                continue;
        }
        double alpha = s.opacity * std::exp(-0.5 * m);
        if (alpha > kAlphaClip)
            alpha = kAlphaClip;
        if constexpr (use_cutoffs) {
            if (alpha < kAlphaSkip)
                continue;
        }
        const float w = static_cast<float>(alpha * transmittance);
        const float* color = prep.colors.data() + static_cast<std::size_t>(k) * channels;
        for (int c = 0; c < channels; ++c)
            acc[c] += w * color[c];
        alpha_acc += alpha * transmittance;
        transmittance *= 1.0 - alpha;
    }
    out_alpha = alpha_acc;
    out_transmittance = transmittance;
}

void check_background(const GaussianSet& set, std::span<const float> background) {
    if (static_cast<int>(background.size()) != set.channels)
        throw InputError("background channel count mismatch: set has " +
                         std::to_string(set.channels) + " channels, background " +
                         std::to_string(background.size()));
}

} // namespace

RenderTarget RenderTarget::filled(int width, int height, std::span<const float> background) {
    RenderTarget rt;
    rt.width = width;
    rt.height = height;
    rt.channels = static_cast<int>(background.size());
    rt.background.assign(background.begin(), background.end());
    rt.data.resize(static_cast<std::size_t>(width) * height * rt.channels);
    rt.alpha.assign(static_cast<std::size_t>(width) * height, 0.0f);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < rt.channels; ++c)
                rt.data[(static_cast<std::size_t>(y) * width + x) * rt.channels + c] =
                    background[c];
    return rt;
}

RenderTarget RenderTarget::first_channels(int n) const {
    if (n > channels)
        throw InputError("first_channels: image has fewer channels than requested");
    RenderTarget out;
    out.width = width;
    out.height = height;
    out.channels = n;
    out.alpha = alpha;
    out.background.assign(background.begin(), background.begin() + n);
    out.data.resize(static_cast<std::size_t>(width) * height * n);
    for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p)
        for (int c = 0; c < n; ++c)
            out.data[p * n + c] = data[p * channels + c];
    return out;
}

std::optional<ProjectedGaussian> project_gaussian(std::size_t index, const GaussianSet& set,
                                                  const Camera& camera, double near) {
    const Mat3 w_rot = camera.rotation();
    const Vec3 p_cam = w_rot * set.positions[index] + camera.translation();
    const double z = p_cam.z();
    if (z <= near)
        return std::nullopt;

    ProjectedGaussian out;
    out.depth = z;
    out.mean2d = Vec2(camera.fx * p_cam.x() / z + camera.cx,
                      camera.fy * p_cam.y() / z + camera.cy);

    const Mat3 rot = set.orientations[index].toRotationMatrix();
    const Vec3& s = set.scales[index];
    const Mat3 cov3d = rot * s.cwiseProduct(s).asDiagonal() * rot.transpose();

    Eigen::Matrix<double, 2, 3> jacobian;
    jacobian << camera.fx / z, 0.0, -camera.fx * p_cam.x() / (z * z),
                0.0, camera.fy / z, -camera.fy * p_cam.y() / (z * z);

    const Eigen::Matrix<double, 2, 3> m = jacobian * w_rot;
    Mat2 cov2d = m * cov3d * m.transpose();
    cov2d(0, 0) += kCovDilation;
    cov2d(1, 1) += kCovDilation;
    // Symmetrize: the quadratic form is symmetric by construction, keep the
    // stored matrix exactly so.
    const double off = 0.5 * (cov2d(0, 1) + cov2d(1, 0));
    cov2d(0, 1) = off;
    cov2d(1, 0) = off;
    out.cov2d = cov2d;

    const double rx = 3.0 * std::sqrt(std::max(cov2d(0, 0), 0.0));
    const double ry = 3.0 * std::sqrt(std::max(cov2d(1, 1), 0.0));
    if (out.mean2d.x() + rx < 0.0 || out.mean2d.x() - rx > camera.width ||
        out.mean2d.y() + ry < 0.0 || out.mean2d.y() - ry > camera.height)
        return std::nullopt;

    out.opacity = set.opacities[index];
    out.source_index = index;
    return out;
}

RenderTarget render(const GaussianSet& set, const Camera& camera,
                    std::span<const float> background, const RenderOptions& options,
                    RenderStats* stats) {
    check_background(set, background);
    RenderTarget rt = RenderTarget::filled(camera.width, camera.height, background);
    if (stats) {
        stats->alpha.assign(rt.alpha.size(), 0.0);
        stats->transmittance.assign(rt.alpha.size(), 1.0);
    }

    const Prepared prep = prepare(set, camera, options);
    const int channels = set.channels;

    const int tiles_x = (camera.width + kTileSize - 1) / kTileSize;
    const int tiles_y = (camera.height + kTileSize - 1) / kTileSize;
    std::vector<std::vector<std::uint32_t>> tile_lists(
        static_cast<std::size_t>(tiles_x) * tiles_y);
    for (std::uint32_t k = 0; k < prep.splats.size(); ++k) {
        const Splat& s = prep.splats[k];
        if (s.x0 >= s.x1 || s.y0 >= s.y1)
            continue;
        const int tx0 = s.x0 / kTileSize;
        const int tx1 = (s.x1 - 1) / kTileSize;
        const int ty0 = s.y0 / kTileSize;
        const int ty1 = (s.y1 - 1) / kTileSize;
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                tile_lists[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(k);
    }

    // Tiles write disjoint pixels, so dynamic scheduling cannot change the
    // result.
    parallel_for(tile_lists.size(), [&](std::size_t tile) {
        const auto& list = tile_lists[tile];
        const int tx = static_cast<int>(tile % tiles_x);
        const int ty = static_cast<int>(tile / tiles_x);
        const int px0 = tx * kTileSize;
        const int py0 = ty * kTileSize;
        const int px1 = std::min(px0 + kTileSize, camera.width);
        const int py1 = std::min(py0 + kTileSize, camera.height);
        std::vector<float> acc(channels);
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                std::fill(acc.begin(), acc.end(), 0.0f);
                double alpha_acc = 0.0, transmittance = 1.0;
                composite_pixel<true>(x + 0.5, y + 0.5, list, prep, channels, acc.data(),
                                      alpha_acc, transmittance);
                const std::size_t pixel = static_cast<std::size_t>(y) * camera.width + x;
                const float t_f = static_cast<float>(transmittance);
                for (int c = 0; c < channels; ++c)
                    rt.data[pixel * channels + c] = acc[c] + t_f * background[c];
                rt.alpha[pixel] = static_cast<float>(alpha_acc);
                if (stats) {
                    stats->alpha[pixel] = alpha_acc;
                    stats->transmittance[pixel] = transmittance;
                }
            }
        }
    });
    return rt;
}

RenderTarget brute_force_render(const GaussianSet& set, const Camera& camera,
                                std::span<const float> background,
                                const RenderOptions& options, RenderStats* stats) {
    check_background(set, background);
    RenderTarget rt = RenderTarget::filled(camera.width, camera.height, background);
    if (stats) {
        stats->alpha.assign(rt.alpha.size(), 0.0);
        stats->transmittance.assign(rt.alpha.size(), 1.0);
    }

    const Prepared prep = prepare(set, camera, options);
    const int channels = set.channels;
    std::vector<std::uint32_t> all(prep.splats.size());
    std::iota(all.begin(), all.end(), 0u);

    std::vector<float> acc(channels);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0f);
            double alpha_acc = 0.0, transmittance = 1.0;
            composite_pixel<false>(x + 0.5, y + 0.5, all, prep, channels, acc.data(),
                                   alpha_acc, transmittance);
            const std::size_t pixel = static_cast<std::size_t>(y) * camera.width + x;
            const float t_f = static_cast<float>(transmittance);
            for (int c = 0; c < channels; ++c)
                rt.data[pixel * channels + c] = acc[c] + t_f * background[c];
            rt.alpha[pixel] = static_cast<float>(alpha_acc);
            if (stats) {
                stats->alpha[pixel] = alpha_acc;
                stats->transmittance[pixel] = transmittance;
            }
        }
    }
    return rt;
}

RenderTarget downsample(const RenderTarget& img, int factor) {
    if (factor < 1)
        throw InputError("downsample factor must be positive");
    if (img.width % factor != 0 || img.height % factor != 0)
        throw InputError("downsample factor must divide width and height");
    if (factor == 1)
        return img;

    RenderTarget out;
    out.width = img.width / factor;
    out.height = img.height / factor;
    out.channels = img.channels;
    out.background = img.background;
    out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
    out.alpha.resize(static_cast<std::size_t>(out.width) * out.height);

    const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            std::vector<double> sums(img.channels, 0.0);
            double alpha_sum = 0.0;
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) {
                    const int sy = y * factor + dy;
                    const int sx = x * factor + dx;
                    for (int c = 0; c < img.channels; ++c)
                        sums[c] += img.at(sy, sx, c);
                    alpha_sum += img.alpha_at(sy, sx);
                }
            }
            for (int c = 0; c < img.channels; ++c)
                out.data[(static_cast<std::size_t>(y) * out.width + x) * out.channels + c] =
                    static_cast<float>(sums[c] * inv_area);
            out.alpha[static_cast<std::size_t>(y) * out.width + x] =
                static_cast<float>(alpha_sum * inv_area);
        }
    }
    return out;
}

GaussianSet concatenate(const GaussianSet& a, const GaussianSet& b) {
    if (a.channels != b.channels)
        throw InputError("cannot concatenate GaussianSets with different channel counts");
    GaussianSet out = a;
    out.positions.insert(out.positions.end(), b.positions.begin(), b.positions.end());
    out.orientations.insert(out.orientations.end(), b.orientations.begin(),
                            b.orientations.end());
    out.scales.insert(out.scales.end(), b.scales.begin(), b.scales.end());
    out.opacities.insert(out.opacities.end(), b.opacities.begin(), b.opacities.end());
    out.colors.insert(out.colors.end(), b.colors.begin(), b.colors.end());
    return out;
}

StreamSets build_stream_sets(const HeadScene& scene, const ProviderSet& providers,
                             const AvatarState& state) {
    StreamSets sets;
    sets.facial = apply_face_deformation(scene, providers, state);
    sets.eyes = transform_both_eyes(scene, state, providers.eye_offset);
    sets.combined = concatenate(sets.facial, sets.eyes);
    return sets;
}

StreamRenders render_streams(const HeadScene& scene, const ProviderSet& providers,
                             const AvatarState& state, const Camera& camera,
                             std::span<const float> background, const RenderOptions& options) {
    const StreamSets sets = build_stream_sets(scene, providers, state);
    StreamRenders out;
    out.facial_only = render(sets.facial, camera, background, options);
    out.eyes_only = render(sets.eyes, camera, background, options);
    out.combined = render(sets.combined, camera, background, options);
    return out;
}

} // namespace splatgaze
