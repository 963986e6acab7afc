#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "image.hpp"

namespace bgmix {

// Mean SSIM: 11x11 Gaussian window (sigma 1.5, normalized), c1 = 0.01^2,
// c2 = 0.03^2 for unit dynamic range, half-sample reflected borders, every
// pixel averaged, then channels averaged.

namespace detail {

inline constexpr int kSsimRadius = 5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

inline const std::array<double, 2 * kSsimRadius + 1>& ssim_taps()
{
    static const auto taps = [] {
        std::array<double, 2 * kSsimRadius + 1> t{};
        double s = 0.0;
        for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
            t[i + kSsimRadius] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
            s += t[i + kSsimRadius];
        }
        for (double& v : t) v /= s;
        return t;
    }();
    return taps;
}

/// Index into [0,n) with half-sample symmetric reflection (d c b a | a b c d).
inline int reflect_index(int i, int n)
{
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

/// Separable Gaussian filter of one plane (h x w, row-major) into `out`.
/// `scratch` is resized as needed and may be reused across calls.
inline void gaussian_filter(const double* src, int h, int w, double* out, std::vector<double>& scratch)
{
    const auto& taps = ssim_taps();
    constexpr int r = kSsimRadius;
    const double t0 = taps[r], t1 = taps[r + 1], t2 = taps[r + 2], t3 = taps[r + 3], t4 = taps[r + 4], t5 = taps[r + 5];
    const std::size_t n = static_cast<std::size_t>(h) * w;
    scratch.resize(n + static_cast<std::size_t>(w) + 2 * r);
    double* tmp = scratch.data();
    double* padded = scratch.data() + n;
    // horizontal pass through a reflected row buffer
    for (int y = 0; y < h; ++y) {
        const double* row = src + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < r; ++x) {
            padded[x] = row[reflect_index(x - r, w)];
            padded[w + r + x] = row[reflect_index(w + x, w)];
        }
        for (int x = 0; x < w; ++x) padded[x + r] = row[x];
        double* dst = tmp + static_cast<std::size_t>(y) * w;
        const double* c = padded + r;
        for (int x = 0; x < w; ++x)
            dst[x] = t0 * c[x] + t1 * (c[x - 1] + c[x + 1]) + t2 * (c[x - 2] + c[x + 2]) + t3 * (c[x - 3] + c[x + 3]) +
                     t4 * (c[x - 4] + c[x + 4]) + t5 * (c[x - 5] + c[x + 5]);
    }
    // vertical pass
    for (int y = 0; y < h; ++y) {
        const double* rows[2 * r + 1];
        for (int k = -r; k <= r; ++k) rows[k + r] = tmp + static_cast<std::size_t>(reflect_index(y + k, h)) * w;
        double* dst = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            dst[x] = t0 * rows[5][x] + t1 * (rows[4][x] + rows[6][x]) + t2 * (rows[3][x] + rows[7][x]) +
                     t3 * (rows[2][x] + rows[8][x]) + t4 * (rows[1][x] + rows[9][x]) + t5 * (rows[0][x] + rows[10][x]);
    }
}

inline std::vector<double> gaussian_filter(const std::vector<double>& src, int h, int w)
{
    std::vector<double> out(src.size()), scratch;
    gaussian_filter(src.data(), h, w, out.data(), scratch);
    return out;
}

inline std::vector<double> channel_plane(const Image& img, int c)
{
    std::vector<double> p(img.pixels());
    const int ch = img.channels();
    auto v = img.values();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = v[i * ch + c];
    return p;
}

} // namespace detail

/// Filtered statistics of one image, reusable against many partners.
class SsimReference {
public:
    explicit SsimReference(const Image& a) : height_(a.height()), width_(a.width()), channels_(a.channels())
    {
        for (int c = 0; c < channels_; ++c) {
            auto plane = detail::channel_plane(a, c);
            std::vector<double> sq(plane.size());
            for (std::size_t i = 0; i < plane.size(); ++i) sq[i] = plane[i] * plane[i];
            mu_.push_back(detail::gaussian_filter(plane, height_, width_));
            ex2_.push_back(detail::gaussian_filter(sq, height_, width_));
            planes_.push_back(std::move(plane));
        }
    }

    double compare(const Image& b) const
    {
        if (b.height() != height_ || b.width() != width_ || b.channels() != channels_)
            throw ShapeError("ssim: shape mismatch");
        if (b.pixels() == 0) return 1.0;
        using detail::kSsimC1;
        using detail::kSsimC2;
        const std::size_t n = b.pixels();
        thread_local std::vector<double> work, scratch;
        work.resize(6 * n);
        double* plane = work.data();
        double* sq = plane + n;
        double* cross = sq + n;
        double* mu_b = cross + n;
        double* ex2_b = mu_b + n;
        double* exy = ex2_b + n;
        auto bv = b.values();
        double total = 0.0;
        for (int c = 0; c < channels_; ++c) {
            const double* pa = planes_[c].data();
            for (std::size_t i = 0; i < n; ++i) {
                const double v = bv[i * channels_ + c];
                plane[i] = v;
                sq[i] = v * v;
                cross[i] = pa[i] * v;
            }
            detail::gaussian_filter(plane, height_, width_, mu_b, scratch);
            detail::gaussian_filter(sq, height_, width_, ex2_b, scratch);
            detail::gaussian_filter(cross, height_, width_, exy, scratch);
            const double* mu_a = mu_[c].data();
            const double* ex2_a = ex2_[c].data();
            double* ratio = plane; // reuse: plane is no longer needed for this channel
            for (std::size_t i = 0; i < n; ++i) {
                const double ma = mu_a[i];
                const double mb = mu_b[i];
                const double va = ex2_a[i] - ma * ma;
                const double vb = ex2_b[i] - mb * mb;
                const double cov = exy[i] - ma * mb;
                const double num = (2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2);
                const double den = (ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2);
                ratio[i] = num / den;
            }
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            std::size_t i = 0;
            for (; i + 4 <= n; i += 4) {
                s0 += ratio[i];
                s1 += ratio[i + 1];
                s2 += ratio[i + 2];
                s3 += ratio[i + 3];
            }
            for (; i < n; ++i) s0 += ratio[i];
            const double sum = (s0 + s1) + (s2 + s3);
            total += sum / static_cast<double>(n);
        }
        return total / channels_;
    }

private:
    int height_, width_, channels_;
    std::vector<std::vector<double>> planes_, mu_, ex2_;
};

inline double ssim(const Image& a, const Image& b)
{
    require_same_shape(a, b, "ssim");
    return SsimReference(a).compare(b);
}

} // namespace bgmix
