#include "splatgaze/losses.hpp"

#include <array>
#include <cmath>

#include <json.hpp>

#include "splatgaze/common.hpp"
#include "splatgaze/eye_rig.hpp"

namespace splatgaze {

namespace {

void require_same_shape(const RenderTarget& a, const RenderTarget& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw InputError(std::string(what) + ": image dimensions differ (" +
                         std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                         std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + "x" + std::to_string(b.channels) + ")");
}

void require_mask_shape(const RenderTarget& img, const EyeMask& mask, const char* what) {
    if (img.width != mask.width || img.height != mask.height)
        throw InputError(std::string(what) + ": mask dimensions do not match the image");
}

double masked_l1_mean(const RenderTarget& a, const RenderTarget& b, const EyeMask* mask) {
    std::vector<double> terms(a.data.size());
    const std::size_t pixels = static_cast<std::size_t>(a.width) * a.height;
    for (std::size_t p = 0; p < pixels; ++p) {
        const double m = mask ? mask->weights[p] : 1.0;
        for (int c = 0; c < a.channels; ++c) {
            const std::size_t k = p * a.channels + c;
            terms[k] = std::abs(m * a.data[k] - m * b.data[k]);
        }
    }
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

} // namespace

EyeMask EyeMask::zeros(int width, int height) {
    return {width, height, std::vector<float>(static_cast<std::size_t>(width) * height, 0.0f)};
}

EyeMask EyeMask::ones(int width, int height) {
    return {width, height, std::vector<float>(static_cast<std::size_t>(width) * height, 1.0f)};
}

EyeMask downsample_mask(const EyeMask& mask, int factor) {
    if (factor < 1)
        throw InputError("mask downsample factor must be positive");
    if (mask.width % factor != 0 || mask.height % factor != 0)
        throw InputError("mask downsample factor must divide width and height");
    if (factor == 1)
        return mask;
    EyeMask out = EyeMask::zeros(mask.width / factor, mask.height / factor);
    const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double sum = 0.0;
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx)
                    sum += mask.at(y * factor + dy, x * factor + dx);
            out.weights[static_cast<std::size_t>(y) * out.width + x] =
                static_cast<float>(sum * inv_area);
        }
    }
    return out;
}

double l1_image(const RenderTarget& a, const RenderTarget& b) {
    require_same_shape(a, b, "l1_image");
    return masked_l1_mean(a, b, nullptr);
}

double eye_lr_loss(const RenderTarget& eyes_lr, const RenderTarget& gt, const EyeMask& mask,
                   int factor) {
    if (factor < 1 || gt.width != eyes_lr.width * factor || gt.height != eyes_lr.height * factor)
        throw InputError("eye_lr_loss: ground truth must be factor times the low-res size");
    require_mask_shape(eyes_lr, mask, "eye_lr_loss");
    const RenderTarget gt_lr = downsample(gt, factor);
    require_same_shape(eyes_lr, gt_lr, "eye_lr_loss");
    return masked_l1_mean(eyes_lr, gt_lr, &mask);
}

double eye_hr_loss(const RenderTarget& eyes_hr, const RenderTarget& gt, const EyeMask& mask) {
    require_same_shape(eyes_hr, gt, "eye_hr_loss");
    require_mask_shape(eyes_hr, mask, "eye_hr_loss");
    return masked_l1_mean(eyes_hr, gt, &mask);
}

double facial_blank_loss(const RenderTarget& facial, const EyeMask& mask,
                         std::span<const float> color) {
    if (static_cast<int>(color.size()) != facial.channels)
        throw InputError("facial_blank_loss: blank color channel count mismatch");
    require_mask_shape(facial, mask, "facial_blank_loss");

    std::vector<double> terms(facial.data.size());
    const std::size_t pixels = static_cast<std::size_t>(facial.width) * facial.height;
    for (std::size_t p = 0; p < pixels; ++p) {
        const double m = mask.weights[p];
        for (int c = 0; c < facial.channels; ++c)
            terms[p * facial.channels + c] =
                std::abs(m * facial.data[p * facial.channels + c] - m * color[c]);
    }
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double facial_blank_loss(const RenderTarget& facial, const EyeMask& mask, std::uint64_t seed) {
    return facial_blank_loss(facial, mask, random_blank_color(facial.channels, seed));
}

std::vector<float> random_blank_color(int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<float> color(channels);
    for (int c = 0; c < channels; ++c)
        color[c] = static_cast<float>(uniform01(rng));
    return color;
}

LossReport total_loss(const StreamImages& streams, const RenderTarget& gt, const EyeMask& mask,
                      const LossWeights& weights, std::span<const float> blank_color) {
    if (gt.channels != 3)
        throw InputError("total_loss: ground truth must be 3-channel");
    const int factor = streams.eyes_lr.width > 0 ? gt.width / streams.eyes_lr.width : 1;

    LossReport report;
    report.weights = weights;
    report.rgb_l1 = l1_image(streams.combined_hr.first_channels(3), gt);
    report.eye_lr = eye_lr_loss(streams.eyes_lr.first_channels(3), gt,
                                downsample_mask(mask, factor), factor);
    report.eye_hr = eye_hr_loss(streams.eyes_hr.first_channels(3), gt, mask);
    report.blank = facial_blank_loss(streams.facial_hr.first_channels(3), mask,
                                     blank_color.first(3));
    report.total = report.rgb_l1 + weights.lr * report.eye_lr + weights.hr * report.eye_hr +
                   weights.blank * report.blank;
    return report;
}

LossReport total_loss(const StreamImages& streams, const RenderTarget& gt, const EyeMask& mask,
                      const LossWeights& weights, std::uint64_t blank_seed) {
    const auto color = random_blank_color(streams.facial_hr.channels, blank_seed);
    return total_loss(streams, gt, mask, weights, color);
}

double psnr(const RenderTarget& a, const RenderTarget& b, double max_value) {
    require_same_shape(a, b, "psnr");
    if (a.channels != 3)
        throw InputError("psnr: expects 3-channel images");
    std::vector<double> terms(a.data.size());
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        const double d = static_cast<double>(a.data[k]) - b.data[k];
        terms[k] = d * d;
    }
    const double mse = pairwise_sum(terms) / static_cast<double>(terms.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value * max_value / mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::array<double, kSsimWindow> ssim_kernel() {
    std::array<double, kSsimWindow> k{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - (kSsimWindow - 1) / 2.0;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

// Separable valid-region Gaussian filter; output is (h-10) x (w-10).
std::vector<double> gaussian_filter_valid(const std::vector<double>& img, int w, int h) {
    const auto kernel = ssim_kernel();
    const int vw = w - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(vw) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += kernel[k] * img[static_cast<std::size_t>(y) * w + x + k];
            rows[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    }
    const int vh = h - kSsimWindow + 1;
    std::vector<double> out(static_cast<std::size_t>(vw) * vh);
    for (int y = 0; y < vh; ++y) {
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += kernel[k] * rows[static_cast<std::size_t>(y + k) * vw + x];
            out[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    }
    return out;
}

} // namespace

double ssim(const RenderTarget& a, const RenderTarget& b) {
    require_same_shape(a, b, "ssim");
    if (a.channels != 3)
        throw InputError("ssim: expects 3-channel images");
    if (a.width < kSsimWindow || a.height < kSsimWindow)
        throw InputError("ssim: images must be at least 11x11");

    const double c1 = kSsimK1 * kSsimK1; // dynamic range 1.0
    const double c2 = kSsimK2 * kSsimK2;
    const int w = a.width, h = a.height;
    const std::size_t pixels = static_cast<std::size_t>(w) * h;

    double channel_sum = 0.0;
    std::vector<double> xa(pixels), xb(pixels), aa(pixels), bb(pixels), ab(pixels);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t p = 0; p < pixels; ++p) {
            xa[p] = a.data[p * 3 + c];
            xb[p] = b.data[p * 3 + c];
            aa[p] = xa[p] * xa[p];
            bb[p] = xb[p] * xb[p];
            ab[p] = xa[p] * xb[p];
        }
        const auto mu1 = gaussian_filter_valid(xa, w, h);
        const auto mu2 = gaussian_filter_valid(xb, w, h);
        const auto m11 = gaussian_filter_valid(aa, w, h);
        const auto m22 = gaussian_filter_valid(bb, w, h);
        const auto m12 = gaussian_filter_valid(ab, w, h);

        std::vector<double> ssim_map(mu1.size());
        for (std::size_t p = 0; p < mu1.size(); ++p) {
            const double var1 = m11[p] - mu1[p] * mu1[p];
            const double var2 = m22[p] - mu2[p] * mu2[p];
            const double cov = m12[p] - mu1[p] * mu2[p];
            const double num = (2.0 * mu1[p] * mu2[p] + c1) * (2.0 * cov + c2);
            const double den = (mu1[p] * mu1[p] + mu2[p] * mu2[p] + c1) * (var1 + var2 + c2);
            ssim_map[p] = num / den;
        }
        channel_sum += pairwise_sum(ssim_map) / static_cast<double>(ssim_map.size());
    }
    return channel_sum / 3.0;
}

double angular_error(const Vec3& a, const Vec3& b) {
    if (std::abs(a.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6)
        throw InputError("angular_error: inputs must be unit vectors");
    const double dot = std::clamp(a.dot(b), -1.0, 1.0);
    return rad_to_deg(std::acos(dot));
}

EyeMask synthesize_eye_mask(const HeadScene& scene, const ProviderSet& providers,
                            const AvatarState& state, const Camera& camera, double threshold,
                            int dilation, const RenderOptions& options) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw InputError("mask threshold must lie in (0, 1)");
    if (dilation < 0)
        throw InputError("mask dilation must be non-negative");

    const GaussianSet eyes = transform_both_eyes(scene, state, providers.eye_offset);
    std::vector<float> background(eyes.channels, 0.0f);
    const RenderTarget img = render(eyes, camera, background, options);

    EyeMask base = EyeMask::zeros(img.width, img.height);
    for (std::size_t p = 0; p < base.weights.size(); ++p)
        base.weights[p] = img.alpha[p] > threshold ? 1.0f : 0.0f;
    if (dilation == 0)
        return base;

    EyeMask out = EyeMask::zeros(img.width, img.height);
    const int r2 = dilation * dilation;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            bool hit = false;
            for (int dy = -dilation; dy <= dilation && !hit; ++dy) {
                const int sy = y + dy;
                if (sy < 0 || sy >= img.height)
                    continue;
                for (int dx = -dilation; dx <= dilation; ++dx) {
                    const int sx = x + dx;
                    if (sx < 0 || sx >= img.width || dx * dx + dy * dy > r2)
                        continue;
                    if (base.at(sy, sx) > 0.0f) {
                        hit = true;
                        break;
                    }
                }
            }
            out.weights[static_cast<std::size_t>(y) * img.width + x] = hit ? 1.0f : 0.0f;
        }
    }
    return out;
}

EyeMask mask_from_image(const RenderTarget& img) {
    EyeMask mask = EyeMask::zeros(img.width, img.height);
    for (std::size_t p = 0; p < mask.weights.size(); ++p)
        mask.weights[p] = std::clamp(img.data[p * img.channels], 0.0f, 1.0f);
    return mask;
}

RenderTarget mask_to_image(const EyeMask& mask) {
    RenderTarget img;
    img.width = mask.width;
    img.height = mask.height;
    img.channels = 1;
    img.background = {0.0f};
    img.data = mask.weights;
    img.alpha = mask.weights;
    return img;
}

std::string metrics_report_json(const MetricsReport& report) {
    nlohmann::json j;
    auto set = [&j](const char* key, const std::optional<double>& value) {
        if (!value)
            return;
        if (std::isinf(*value))
            j[key] = *value > 0 ? "inf" : "-inf";
        else
            j[key] = *value;
    };
    set("psnr_db", report.psnr_db);
    set("ssim", report.ssim_value);
    set("gaze_error_deg", report.gaze_error_deg);
    set("l1", report.l1);
    set("masked_l1", report.masked_l1);
    if (report.losses) {
        const LossReport& l = *report.losses;
        j["losses"] = {{"rgb_l1", l.rgb_l1},
                       {"eye_lr", l.eye_lr},
                       {"eye_hr", l.eye_hr},
                       {"blank", l.blank},
                       {"total", l.total},
                       {"weights",
                        {{"lr", l.weights.lr}, {"hr", l.weights.hr}, {"blank", l.weights.blank}}},
                       {"vgg", l.vgg ? nlohmann::json(*l.vgg) : nlohmann::json(nullptr)}};
    }
    return j.dump(2);
}

} // namespace splatgaze
