#pragma once

#include <optional>
#include <string>

#include "splatgaze/rasterizer.hpp"

namespace splatgaze {

// Per-pixel weights in [0, 1]; fractional values are fine (downsampled or
// dilated masks have soft edges).
struct EyeMask {
    int width = 0;
    int height = 0;
    std::vector<float> weights;

    float at(int y, int x) const {
        return weights[static_cast<std::size_t>(y) * width + x];
    }

    static EyeMask zeros(int width, int height);
    static EyeMask ones(int width, int height);
};

EyeMask downsample_mask(const EyeMask& mask, int factor);

// Mean absolute difference over all pixels and channels.
double l1_image(const RenderTarget& a, const RenderTarget& b);

// || M ⊙ I_lr - M ⊙ D(I_gt) ||_1 as a mean; `factor` is the resolution ratio
// and the mask lives at the low resolution.
double eye_lr_loss(const RenderTarget& eyes_lr, const RenderTarget& gt, const EyeMask& mask,
                   int factor);

// || M ⊙ I_hr - M ⊙ I_gt ||_1 as a mean, full resolution.
double eye_hr_loss(const RenderTarget& eyes_hr, const RenderTarget& gt, const EyeMask& mask);

// || M ⊙ I_facial - M ⊙ c ||_1 against a flat color; pushes facial-stream
// pixels inside the eye mask toward an arbitrary background so the facial
// Gaussians cannot claim the eye region.
double facial_blank_loss(const RenderTarget& facial, const EyeMask& mask,
                         std::span<const float> color);

// Same, with the blank color drawn per channel from a seeded generator.
double facial_blank_loss(const RenderTarget& facial, const EyeMask& mask, std::uint64_t seed);

// Per-channel uniform [0,1) blank color from a seeded generator.
std::vector<float> random_blank_color(int channels, std::uint64_t seed);

struct LossWeights {
    double lr = 0.5;
    double hr = 0.5;
    double blank = 1.0;
};

struct LossReport {
    double rgb_l1 = 0;
    double eye_lr = 0;
    double eye_hr = 0;
    double blank = 0;
    double total = 0;
    LossWeights weights;
    // The perceptual term needs a pretrained network; reported as
    // unavailable.
    std::optional<double> vgg;
};

// The render set the combined loss consumes. `eyes_lr` is the eyes-only
// stream at 1/factor resolution; everything else is full resolution with at
// least three channels.
struct StreamImages {
    RenderTarget combined_hr;
    RenderTarget eyes_lr;
    RenderTarget eyes_hr;
    RenderTarget facial_hr;
};

// total = rgb_l1 + w_lr * eye_lr + w_hr * eye_hr + w_blank * blank, computed
// on the first three channels against a 3-channel ground truth. The mask is
// full resolution; the low-res term sees its area-averaged downsample.
LossReport total_loss(const StreamImages& streams, const RenderTarget& gt, const EyeMask& mask,
                      const LossWeights& weights, std::span<const float> blank_color);

LossReport total_loss(const StreamImages& streams, const RenderTarget& gt, const EyeMask& mask,
                      const LossWeights& weights, std::uint64_t blank_seed);

// 10 log10(max^2 / MSE) in dB; +infinity when the images are identical.
double psnr(const RenderTarget& a, const RenderTarget& b, double max_value);

// Gaussian-windowed SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, dynamic range
// 1.0), valid-region convolution, averaged over the three channels.
double ssim(const RenderTarget& a, const RenderTarget& b);

// Angle between unit vectors in degrees, in [0, 180].
double angular_error(const Vec3& a, const Vec3& b);

// Eyes-only stream alpha thresholded, then dilated with a Euclidean disk of
// the given pixel radius.
EyeMask synthesize_eye_mask(const HeadScene& scene, const ProviderSet& providers,
                            const AvatarState& state, const Camera& camera, double threshold,
                            int dilation, const RenderOptions& options = {});

EyeMask mask_from_image(const RenderTarget& img);
RenderTarget mask_to_image(const EyeMask& mask);

// JSON report; PSNR of identical images serializes as the string "inf".
struct MetricsReport {
    std::optional<double> psnr_db;
    std::optional<double> ssim_value;
    std::optional<double> gaze_error_deg;
    std::optional<double> l1;
    std::optional<double> masked_l1;
    std::optional<LossReport> losses;
};

std::string metrics_report_json(const MetricsReport& report);

} // namespace splatgaze
