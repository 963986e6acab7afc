#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compositing.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace bgmix {

enum class AugKind { BgAware, AutoContrast, Equalize, Posterize, Rotate, Solarize, Shear, Translate };

inline constexpr std::array<AugKind, 8> kAllAugKinds{
    AugKind::BgAware, AugKind::AutoContrast, AugKind::Equalize, AugKind::Posterize,
    AugKind::Rotate,  AugKind::Solarize,     AugKind::Shear,    AugKind::Translate,
};

inline std::string_view to_string(AugKind k)
{
    switch (k) {
    case AugKind::BgAware: return "bg_aware";
    case AugKind::AutoContrast: return "auto_contrast";
    case AugKind::Equalize: return "equalize";
    case AugKind::Posterize: return "posterize";
    case AugKind::Rotate: return "rotate";
    case AugKind::Solarize: return "solarize";
    case AugKind::Shear: return "shear";
    case AugKind::Translate: return "translate";
    }
    return "unknown";
}

inline std::optional<AugKind> parse_aug_kind(std::string_view s)
{
    std::string norm(s);
    for (char& c : norm)
        if (c == '-') c = '_';
    for (AugKind k : kAllAugKinds)
        if (to_string(k) == norm) return k;
    return std::nullopt;
}

inline bool is_geometric(AugKind k) { return k == AugKind::Rotate || k == AugKind::Shear || k == AugKind::Translate; }

inline bool is_photometric(AugKind k)
{
    return k == AugKind::AutoContrast || k == AugKind::Equalize || k == AugKind::Posterize ||
           k == AugKind::Solarize;
}

/// One member of the operation set with its parameters. Only the fields
/// relevant to `kind` are meaningful.
struct AugOp {
    AugKind kind = AugKind::Translate;
    double degrees = 0.0;   // rotate, counter-clockwise about the image center
    double shear = 0.0;     // horizontal shear factor
    int dx = 0;             // translate, pixels
    int dy = 0;
    int bits = 8;           // posterize, 1..8
    double threshold = 1.0; // solarize, [0,1]

    static AugOp bg_aware() { return {AugKind::BgAware}; }
    static AugOp auto_contrast() { return {AugKind::AutoContrast}; }
    static AugOp equalize() { return {AugKind::Equalize}; }
    static AugOp posterize(int bits)
    {
        AugOp op{AugKind::Posterize};
        op.bits = bits;
        return op;
    }
    static AugOp rotate(double degrees)
    {
        AugOp op{AugKind::Rotate};
        op.degrees = degrees;
        return op;
    }
    static AugOp solarize(double threshold)
    {
        AugOp op{AugKind::Solarize};
        op.threshold = threshold;
        return op;
    }
    static AugOp shear_x(double factor)
    {
        AugOp op{AugKind::Shear};
        op.shear = factor;
        return op;
    }
    static AugOp translate(int dx, int dy)
    {
        AugOp op{AugKind::Translate};
        op.dx = dx;
        op.dy = dy;
        return op;
    }

    void validate() const
    {
        if (kind == AugKind::Posterize && (bits < 1 || bits > 8)) throw Error("posterize bits must be in 1..8");
        if (kind == AugKind::Solarize && !(threshold >= 0.0 && threshold <= 1.0))
            throw Error("solarize threshold must be in [0,1]");
        if (!std::isfinite(degrees) || !std::isfinite(shear)) throw Error("non-finite geometric parameter");
    }

    friend bool operator==(const AugOp&, const AugOp&) = default;
};

/// o1, o2*o1 or o3*o2*o1; applied left to right.
struct OpChain {
    std::vector<AugOp> ops;

    void validate() const
    {
        if (ops.empty() || ops.size() > 3) throw Error("op chain length must be 1, 2 or 3");
        for (const auto& op : ops) op.validate();
    }

    bool uses(AugKind k) const
    {
        for (const auto& op : ops)
            if (op.kind == k) return true;
        return false;
    }

    friend bool operator==(const OpChain&, const OpChain&) = default;
};

/// Magnitude ranges used when sampling parameters.
struct OpRanges {
    double rotate_max_degrees = 30.0;
    double shear_max = 0.3;
    double translate_fraction = 1.0 / 3.0; // of the width, rounded up
    int posterize_min_bits = 4;
    int posterize_max_bits = 8;
    double solarize_min = 0.5;
    double solarize_max = 1.0;
};

inline AugOp sample_op(AugKind kind, const OpRanges& r, int width, Rng& rng)
{
    switch (kind) {
    case AugKind::BgAware: return AugOp::bg_aware();
    case AugKind::AutoContrast: return AugOp::auto_contrast();
    case AugKind::Equalize: return AugOp::equalize();
    case AugKind::Posterize: return AugOp::posterize(rng.uniform_int(r.posterize_min_bits, r.posterize_max_bits));
    case AugKind::Rotate: return AugOp::rotate(rng.uniform(-r.rotate_max_degrees, r.rotate_max_degrees));
    case AugKind::Solarize: return AugOp::solarize(rng.uniform(r.solarize_min, r.solarize_max));
    case AugKind::Shear: return AugOp::shear_x(rng.uniform(-r.shear_max, r.shear_max));
    case AugKind::Translate: {
        const int m = static_cast<int>(std::ceil(width * r.translate_fraction));
        const int dx = rng.uniform_int(-m, m);
        const int dy = rng.uniform_int(-m, m);
        return AugOp::translate(dx, dy);
    }
    }
    throw Error("unknown op kind");
}

namespace detail {

struct Affine {
    // source = A * (dest - center) + center + offset
    double a00 = 1, a01 = 0, a10 = 0, a11 = 1;
    double ox = 0, oy = 0;
    double cx = 0, cy = 0;

    void source(int x, int y, double& sx, double& sy) const
    {
        const double u = x - cx;
        const double v = y - cy;
        sx = a00 * u + a01 * v + cx + ox;
        sy = a10 * u + a11 * v + cy + oy;
    }
};

inline Affine inverse_transform(const AugOp& op, int height, int width)
{
    Affine t;
    t.cx = (width - 1) / 2.0;
    t.cy = (height - 1) / 2.0;
    switch (op.kind) {
    case AugKind::Translate:
        t.ox = -op.dx;
        t.oy = -op.dy;
        break;
    case AugKind::Rotate: {
        // y grows downward, so a visual counter-clockwise turn maps (u,v) to
        // (u cos + v sin, -u sin + v cos); the inverse is applied here.
        const double r = op.degrees * std::numbers::pi / 180.0;
        const double c = std::cos(r);
        const double s = std::sin(r);
        t.a00 = c;
        t.a01 = -s;
        t.a10 = s;
        t.a11 = c;
        break;
    }
    case AugKind::Shear:
        t.a01 = -op.shear;
        break;
    default: throw Error("not a geometric op: " + std::string(to_string(op.kind)));
    }
    return t;
}

inline double sample_bilinear(const Image& img, double sx, double sy, int c)
{
    const double fx0 = std::floor(sx);
    const double fy0 = std::floor(sy);
    const double fx = sx - fx0;
    const double fy = sy - fy0;
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        if (xs[k] < 0 || ys[k] < 0 || xs[k] >= img.width() || ys[k] >= img.height()) continue;
        acc += w[k] * img(ys[k], xs[k], c);
    }
    return acc;
}

inline Image warp_image(const Image& img, const Affine& t)
{
    Image out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double sx, sy;
            t.source(x, y, sx, sy);
            for (int c = 0; c < img.channels(); ++c) out(y, x, c) = clamp01(sample_bilinear(img, sx, sy, c));
        }
    return out;
}

inline ChangeMask warp_mask(const ChangeMask& mask, const Affine& t)
{
    ChangeMask out(mask.height(), mask.width(), 0.0, mask.threshold());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            double sx, sy;
            t.source(x, y, sx, sy);
            const double rx = std::floor(sx + 0.5);
            const double ry = std::floor(sy + 0.5);
            if (rx < 0 || ry < 0 || rx >= mask.width() || ry >= mask.height()) continue;
            out(y, x) = mask(static_cast<int>(ry), static_cast<int>(rx));
        }
    return out;
}

inline int quantize_level(double v) { return static_cast<int>(std::floor(clamp01(v) * 255.0 + 0.5)); }

inline void auto_contrast_channel(Image& img, int c)
{
    double lo = 1.0, hi = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            lo = std::min(lo, img(y, x, c));
            hi = std::max(hi, img(y, x, c));
        }
    if (!(hi > lo)) return;
    const double scale = 1.0 / (hi - lo);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) img(y, x, c) = clamp01((img(y, x, c) - lo) * scale);
}

inline void equalize_channel(Image& img, int c)
{
    std::array<std::size_t, 256> hist{};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) ++hist[quantize_level(img(y, x, c))];
    const std::size_t total = img.pixels();
    std::size_t cdf_min = 0;
    for (std::size_t h : hist)
        if (h != 0) {
            cdf_min = h;
            break;
        }
    if (total == cdf_min) return; // constant channel
    std::array<double, 256> lut{};
    std::size_t cdf = 0;
    for (int v = 0; v < 256; ++v) {
        cdf += hist[v];
        const double level = std::floor(static_cast<double>(cdf - std::min(cdf, cdf_min)) /
                                             static_cast<double>(total - cdf_min) * 255.0 +
                                         0.5);
        lut[v] = level / 255.0;
    }
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) img(y, x, c) = lut[quantize_level(img(y, x, c))];
}

inline void posterize_channel(Image& img, int c, int bits)
{
    const int keep = (0xFF << (8 - bits)) & 0xFF;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) img(y, x, c) = (quantize_level(img(y, x, c)) & keep) / 255.0;
}

inline void solarize_channel(Image& img, int c, double threshold)
{
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double v = img(y, x, c);
            if (v >= threshold) img(y, x, c) = 1.0 - v;
        }
}

} // namespace detail

inline Image apply_photometric(const AugOp& op, const Image& img)
{
    if (!is_photometric(op.kind)) throw Error("not a photometric op: " + std::string(to_string(op.kind)));
    op.validate();
    Image out = img;
    for (int c = 0; c < out.channels(); ++c) {
        switch (op.kind) {
        case AugKind::AutoContrast: detail::auto_contrast_channel(out, c); break;
        case AugKind::Equalize: detail::equalize_channel(out, c); break;
        case AugKind::Posterize: detail::posterize_channel(out, c, op.bits); break;
        case AugKind::Solarize: detail::solarize_channel(out, c, op.threshold); break;
        default: break;
        }
    }
    return out;
}

/// Each image of the pair is transformed on its own.
inline ImagePair apply_photometric(const AugOp& op, const ImagePair& pair)
{
    return ImagePair(apply_photometric(op, pair.first), apply_photometric(op, pair.second));
}

struct WarpedPair {
    ImagePair pair;
    ChangeMask mask;
};

inline Image apply_geometric(const AugOp& op, const Image& img)
{
    if (!is_geometric(op.kind)) throw Error("not a geometric op: " + std::string(to_string(op.kind)));
    op.validate();
    return detail::warp_image(img, detail::inverse_transform(op, img.height(), img.width()));
}

/// One shared transform for both images (bilinear) and the mask (nearest).
inline WarpedPair apply_geometric(const AugOp& op, const ImagePair& pair, const ChangeMask& mask)
{
    if (!is_geometric(op.kind)) throw Error("not a geometric op: " + std::string(to_string(op.kind)));
    op.validate();
    require_mask_shape(pair.first, mask, "apply_geometric");
    const auto t = detail::inverse_transform(op, pair.height(), pair.width());
    return WarpedPair{ImagePair(detail::warp_image(pair.first, t), detail::warp_image(pair.second, t)),
                      detail::warp_mask(mask, t)};
}

inline ImagePair apply_bg_aware(const ImagePair& pair, const BackgroundPair& bg, const ChangeMask& mask)
{
    if (!pair.same_shape(bg)) throw ShapeError("apply_bg_aware: pair and background pair differ in shape");
    require_mask_shape(pair.first, mask, "apply_bg_aware");
    return ImagePair(rep(pair.first, bg.first, mask), rep(pair.second, bg.second, mask));
}

/// Runs the chain left to right. Geometric ops move a working copy of the mask
/// along with the pair (unless `cotransform_mask` is false) so that a later
/// bg_aware composites in aligned coordinates.
inline ImagePair apply_chain(const OpChain& chain, const ImagePair& pair, const BackgroundPair& bg,
                             const ChangeMask& mask, bool cotransform_mask = true)
{
    chain.validate();
    ImagePair cur = pair;
    ChangeMask working = mask;
    for (const AugOp& op : chain.ops) {
        if (op.kind == AugKind::BgAware) {
            cur = apply_bg_aware(cur, bg, working);
        } else if (is_geometric(op.kind)) {
            auto warped = apply_geometric(op, cur, working);
            cur = std::move(warped.pair);
            if (cotransform_mask) working = std::move(warped.mask);
        } else {
            cur = apply_photometric(op, cur);
        }
    }
    return cur;
}

} // namespace bgmix
