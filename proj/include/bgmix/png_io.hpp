#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "image.hpp"

namespace bgmix {

namespace detail {

// round half up; callers pass values already clamped to [0,1]
inline std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::floor(clamp01(v) * 255.0 + 0.5)); }

} // namespace detail

/// Loads an 8-bit grayscale or RGB PNG. Palette images are expanded to RGB,
/// alpha is composited onto black.
inline Image load_image(const std::string& path)
{
    if (!std::filesystem::exists(path)) throw IoError("cannot load '" + path + "': file does not exist");

    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw IoError("cannot decode '" + path + "': " + png.message);

    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw IoError("cannot decode '" + path + "': unsupported bit depth (only 8-bit PNG)");
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;

    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&png, &black, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot decode '" + path + "': " + msg);
    }

    std::vector<double> data(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) data[i] = buffer[i] / 255.0;
    return Image(static_cast<int>(png.height), static_cast<int>(png.width), channels, std::move(data));
}

/// Writes round(v*255) per channel (half up).
inline void save_image(const Image& img, const std::string& path)
{
    if (img.empty()) throw IoError("cannot save '" + path + "': empty image");
    std::vector<png_byte> buffer(img.size());
    auto v = img.values();
    for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = detail::quantize(v[i]);

    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot write '" + path + "': " + msg);
    }
}

inline ChangeMask load_mask(const std::string& path, double threshold = 0.5)
{
    Image img = load_image(path);
    if (img.channels() == 1) return ChangeMask(std::move(img), threshold);
    // color masks: any lit channel counts
    Image gray(img.height(), img.width(), 1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            gray(y, x) = std::max({img(y, x, 0), img(y, x, 1), img(y, x, 2)});
    return ChangeMask(std::move(gray), threshold);
}

inline void save_mask(const ChangeMask& mask, const std::string& path) { save_image(mask.image(), path); }

} // namespace bgmix
