#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bgmix {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

inline double clamp01(double v)
{
    if (!(v > 0.0)) return 0.0; // also maps NaN to 0
    return v < 1.0 ? v : 1.0;
}

/// H x W x C raster, row-major with interleaved channels, values in [0,1].
class Image {
public:
    Image() = default;

    Image(int height, int width, int channels, double fill = 0.0)
        : height_(height), width_(width), channels_(channels),
          data_(checked_size(height, width, channels), clamp01(fill))
    {
    }

    Image(int height, int width, int channels, std::vector<double> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data))
    {
        if (data_.size() != checked_size(height, width, channels))
            throw ShapeError("image data length does not match " + shape_string());
        for (double& v : data_) v = clamp01(v);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
    double& operator()(int y, int x, int c = 0) { return data_[index(y, x, c)]; }

    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    std::size_t index(int y, int x, int c = 0) const
    {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    bool same_shape(const Image& o) const
    {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    void clamp()
    {
        for (double& v : data_) v = clamp01(v);
    }

    std::string shape_string() const
    {
        return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    static std::size_t checked_size(int h, int w, int c)
    {
        if (h < 0 || w < 0) throw ShapeError("negative image dimensions");
        if (c != 1 && c != 3) throw ShapeError("channels must be 1 or 3, got " + std::to_string(c));
        return static_cast<std::size_t>(h) * w * c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

/// Soft per-pixel change map; binarized only when metrics need it.
class ChangeMask {
public:
    ChangeMask() = default;

    ChangeMask(int height, int width, double fill = 0.0, double threshold = 0.5)
        : plane_(height, width, 1, fill), threshold_(threshold)
    {
    }

    ChangeMask(int height, int width, std::vector<double> data, double threshold = 0.5)
        : plane_(height, width, 1, std::move(data)), threshold_(threshold)
    {
    }

    explicit ChangeMask(Image gray, double threshold = 0.5) : plane_(std::move(gray)), threshold_(threshold)
    {
        if (plane_.channels() != 1) throw ShapeError("change mask must be single-channel");
    }

    int height() const { return plane_.height(); }
    int width() const { return plane_.width(); }
    std::size_t pixels() const { return plane_.pixels(); }
    double threshold() const { return threshold_; }
    void set_threshold(double t) { threshold_ = t; }

    double operator()(int y, int x) const { return plane_(y, x, 0); }
    double& operator()(int y, int x) { return plane_(y, x, 0); }

    std::span<const double> values() const { return plane_.values(); }
    std::span<double> values() { return plane_.values(); }

    const Image& image() const { return plane_; }

    bool binary_at(std::size_t i) const { return plane_.values()[i] >= threshold_; }

    /// Fraction of pixels at or above the threshold.
    double area_rate() const
    {
        if (pixels() == 0) return 0.0;
        std::size_t on = 0;
        for (std::size_t i = 0; i < pixels(); ++i) on += binary_at(i) ? 1 : 0;
        return static_cast<double>(on) / static_cast<double>(pixels());
    }

    bool matches(const Image& img) const { return height() == img.height() && width() == img.width(); }

    friend bool operator==(const ChangeMask&, const ChangeMask&) = default;

private:
    Image plane_{0, 0, 1};
    double threshold_ = 0.5;
};

struct ImagePair {
    Image first;
    Image second;

    ImagePair() = default;
    ImagePair(Image a, Image b) : first(std::move(a)), second(std::move(b))
    {
        if (!first.same_shape(second))
            throw ShapeError("pair images differ in shape: " + first.shape_string() + " vs " +
                             second.shape_string());
    }

    int height() const { return first.height(); }
    int width() const { return first.width(); }
    int channels() const { return first.channels(); }
    bool same_shape(const ImagePair& o) const { return first.same_shape(o.first); }

    friend bool operator==(const ImagePair&, const ImagePair&) = default;
};

/// A pair that contains background variation only.
struct BackgroundPair : ImagePair {
    using ImagePair::ImagePair;
    BackgroundPair() = default;
    explicit BackgroundPair(ImagePair p) : ImagePair(std::move(p)) {}
};

inline void require_same_shape(const Image& a, const Image& b, const char* what)
{
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

inline void require_mask_shape(const Image& img, const ChangeMask& m, const char* what)
{
    if (!m.matches(img))
        throw ShapeError(std::string(what) + ": mask " + std::to_string(m.height()) + "x" +
                         std::to_string(m.width()) + " does not match image " + img.shape_string());
}

/// w*a + (1-w)*b, clamped.
inline Image blend(const Image& a, const Image& b, double w)
{
    require_same_shape(a, b, "blend");
    if (!(w >= 0.0 && w <= 1.0)) throw Error("blend weight outside [0,1]");
    Image out(a.height(), a.width(), a.channels());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = clamp01(w * av[i] + (1.0 - w) * bv[i]);
    return out;
}

inline ImagePair blend(const ImagePair& a, const ImagePair& b, double w)
{
    return ImagePair(blend(a.first, b.first, w), blend(a.second, b.second, w));
}

/// Element-wise product with the mask broadcast over channels.
inline Image hadamard(const Image& img, const ChangeMask& mask)
{
    require_mask_shape(img, mask, "hadamard");
    Image out(img.height(), img.width(), img.channels());
    const int ch = img.channels();
    auto iv = img.values();
    auto mv = mask.values();
    auto ov = out.values();
    for (std::size_t p = 0; p < img.pixels(); ++p)
        for (int c = 0; c < ch; ++c) ov[p * ch + c] = clamp01(iv[p * ch + c] * mv[p]);
    return out;
}

/// Single-channel absolute difference averaged over channels.
inline Image mean_abs_difference(const Image& a, const Image& b)
{
    require_same_shape(a, b, "mean_abs_difference");
    Image out(a.height(), a.width(), 1);
    const int ch = a.channels();
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t p = 0; p < a.pixels(); ++p) {
        double s = 0.0;
        for (int c = 0; c < ch; ++c) s += std::abs(av[p * ch + c] - bv[p * ch + c]);
        ov[p] = s / ch;
    }
    return out;
}

inline double mean_abs_error(const Image& a, const Image& b)
{
    require_same_shape(a, b, "mean_abs_error");
    auto av = a.values();
    auto bv = b.values();
    if (av.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += std::abs(av[i] - bv[i]);
    return s / static_cast<double>(av.size());
}

inline double max_abs_difference(const Image& a, const Image& b)
{
    require_same_shape(a, b, "max_abs_difference");
    auto av = a.values();
    auto bv = b.values();
    double m = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
    return m;
}

} // namespace bgmix
