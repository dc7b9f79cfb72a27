#pragma once

#include <filesystem>

#include "splatgaze/rasterizer.hpp"

namespace splatgaze {

// Raw float container for bit-exact fixtures: magic "SPLF", then u32 width,
// height, channels, then little-endian f32 data, row-major.
void save_splf(const RenderTarget& img, const std::filesystem::path& path);
RenderTarget load_splf(const std::filesystem::path& path);

// 8-bit PNG of the first three channels (values clamped to [0,1]); grayscale
// when the image has one channel, RGBA when `with_alpha` is set.
void save_png(const RenderTarget& img, const std::filesystem::path& path,
              bool with_alpha = false);

// Loads 8-bit PNG (gray / gray+alpha / RGB / RGBA) into floats in [0,1].
RenderTarget load_png(const std::filesystem::path& path);

// Dispatch on extension: .splf or .png.
void save_image(const RenderTarget& img, const std::filesystem::path& path);
RenderTarget load_image(const std::filesystem::path& path);

} // namespace splatgaze
