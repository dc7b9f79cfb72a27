#pragma once

#include <optional>
#include <span>
#include <vector>

#include "splatgaze/deformation.hpp"
#include "splatgaze/scene.hpp"

namespace splatgaze {

// N-channel float image with per-pixel accumulated alpha.
struct RenderTarget {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;       // height * width * channels, row-major
    std::vector<float> alpha;      // height * width, in [0, 1]
    std::vector<float> background; // channels

    static RenderTarget filled(int width, int height, std::span<const float> background);

    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float alpha_at(int y, int x) const {
        return alpha[static_cast<std::size_t>(y) * width + x];
    }

    // Copy of the first `n` channels (for the 3-channel loss/metric paths).
    RenderTarget first_channels(int n) const;
};

struct ProjectedGaussian {
    Vec2 mean2d;   // pixels
    Mat2 cov2d;    // pixel^2, symmetric
    double depth;  // camera-space z, meters
    double opacity;
    std::size_t source_index = 0;
};

struct RenderOptions {
    double near = 1e-3; // meters; splats at or before this plane are culled
};

// EWA projection of one Gaussian: Sigma_3D = R diag(s^2) R^T pushed through
// the perspective Jacobian and camera rotation, plus a 0.3-pixel low-pass
// dilation. Returns nullopt when the splat is culled (behind the near plane
// or its 3-sigma screen extent misses the viewport).
std::optional<ProjectedGaussian> project_gaussian(std::size_t index, const GaussianSet& set,
                                                  const Camera& camera, double near);

// Optional f64 compositing planes for conservation checks: per pixel,
// alpha[i] + transmittance[i] telescopes to 1.
struct RenderStats {
    std::vector<double> alpha;
    std::vector<double> transmittance;
};

// Deterministic tile-based front-to-back compositor. Per pixel, splats sorted
// by ascending depth (source index tiebreak) contribute
// color * alpha * T with alpha = opacity * exp(-m/2) clipped to 0.99,
// m the Mahalanobis distance; alpha below 1/255 is skipped and evaluation is
// restricted to the 3-sigma ellipse. Remaining transmittance multiplies the
// background. Channel accumulation is f32, weights f64. Output is bitwise
// reproducible across runs and worker counts.
RenderTarget render(const GaussianSet& set, const Camera& camera,
                    std::span<const float> background, const RenderOptions& options = {},
                    RenderStats* stats = nullptr);

// Same contract evaluated per pixel over all non-culled splats with no
// tiling, no ellipse cutoff, and no alpha-skip threshold (the 0.99 clip
// stays). O(pixels * gaussians); the test oracle for render().
RenderTarget brute_force_render(const GaussianSet& set, const Camera& camera,
                                std::span<const float> background,
                                const RenderOptions& options = {},
                                RenderStats* stats = nullptr);

// Area-average pooling of data and alpha; factor must divide both sides.
RenderTarget downsample(const RenderTarget& img, int factor);

// The two-stream pipeline: facial deformation and rigid eye transforms
// rendered separately and together, sharing camera and background.
struct StreamRenders {
    RenderTarget combined;
    RenderTarget facial_only;
    RenderTarget eyes_only;
};

StreamRenders render_streams(const HeadScene& scene, const ProviderSet& providers,
                             const AvatarState& state, const Camera& camera,
                             std::span<const float> background,
                             const RenderOptions& options = {});

// The deformed/transformed sets render_streams draws, exposed for callers
// that need the geometry (mask synthesis, locality tests).
struct StreamSets {
    GaussianSet facial;
    GaussianSet eyes;
    GaussianSet combined;
};

StreamSets build_stream_sets(const HeadScene& scene, const ProviderSet& providers,
                             const AvatarState& state);

// Concatenation used for the combined stream (facial first, then eyes).
GaussianSet concatenate(const GaussianSet& a, const GaussianSet& b);

} // namespace splatgaze
