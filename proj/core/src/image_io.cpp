#include "splatgaze/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <png.h>

#include "splatgaze/common.hpp"

namespace splatgaze {

static_assert(std::endian::native == std::endian::little,
              "SPLF I/O assumes a little-endian host");

void save_splf(const RenderTarget& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(img.width),
                                     static_cast<std::uint32_t>(img.height),
                                     static_cast<std::uint32_t>(img.channels)};
    out.write("SPLF", 4);
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size() * sizeof(float)));
    if (!out)
        throw InputError("write failed: " + path.string());
}

RenderTarget load_splf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    char magic[4];
    std::uint32_t header[3];
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || std::memcmp(magic, "SPLF", 4) != 0)
        throw InputError(path.string() + ": not an SPLF file");

    RenderTarget img;
    img.width = static_cast<int>(header[0]);
    img.height = static_cast<int>(header[1]);
    img.channels = static_cast<int>(header[2]);
    if (img.width < 1 || img.height < 1 || img.channels < 1)
        throw InputError(path.string() + ": bad SPLF dimensions");
    img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    img.alpha.assign(static_cast<std::size_t>(img.width) * img.height, 0.0f);
    img.background.assign(img.channels, 0.0f);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != img.data.size() * sizeof(float))
        throw InputError(path.string() + ": truncated SPLF payload");
    return img;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};

std::uint8_t to_byte(float v) {
    const float clamped = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

} // namespace

void save_png(const RenderTarget& img, const std::filesystem::path& path, bool with_alpha) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp)
        throw InputError("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw ComputeError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ComputeError("libpng write failed: " + path.string());
    }
    png_init_io(png, fp.get());

    const bool gray = img.channels == 1 && !with_alpha;
    const int color_type = gray ? PNG_COLOR_TYPE_GRAY
                                : (with_alpha ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB);
    const int out_channels = gray ? 1 : (with_alpha ? 4 : 3);
    png_set_IHDR(png, info, img.width, img.height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * out_channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (gray) {
                row[x] = to_byte(img.at(y, x, 0));
            } else {
                for (int c = 0; c < 3; ++c)
                    row[static_cast<std::size_t>(x) * out_channels + c] =
                        c < img.channels ? to_byte(img.at(y, x, c)) : 0;
                if (with_alpha)
                    row[static_cast<std::size_t>(x) * out_channels + 3] =
                        to_byte(img.alpha_at(y, x));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RenderTarget load_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp)
        throw InputError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ComputeError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError(path.string() + ": not a readable PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize to 8-bit RGBA-or-less without palette/16-bit surprises.
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_bit_depth(png, info) == 16)
        png_set_strip_16(png);
    png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int in_channels = png_get_channels(png, info);

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * in_channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * in_channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const bool has_alpha = in_channels == 2 || in_channels == 4;
    const int color_channels = has_alpha ? in_channels - 1 : in_channels;

    RenderTarget img;
    img.width = width;
    img.height = height;
    img.channels = color_channels;
    img.background.assign(color_channels, 0.0f);
    img.data.resize(static_cast<std::size_t>(width) * height * color_channels);
    img.alpha.assign(static_cast<std::size_t>(width) * height, 0.0f);
    for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p) {
        for (int c = 0; c < color_channels; ++c)
            img.data[p * color_channels + c] =
                static_cast<float>(pixels[p * in_channels + c]) / 255.0f;
        if (has_alpha)
            img.alpha[p] =
                static_cast<float>(pixels[p * in_channels + color_channels]) / 255.0f;
    }
    return img;
}

void save_image(const RenderTarget& img, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".splf")
        save_splf(img, path);
    else if (ext == ".png")
        save_png(img, path);
    else
        throw InputError("unsupported image extension '" + ext + "' (use .png or .splf)");
}

RenderTarget load_image(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".splf")
        return load_splf(path);
    if (ext == ".png")
        return load_png(path);
    throw InputError("unsupported image extension '" + ext + "' (use .png or .splf)");
}

} // namespace splatgaze
