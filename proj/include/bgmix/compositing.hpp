#pragma once

#include <algorithm>

#include "image.hpp"

namespace bgmix {

/// Keeps `fg` where the mask is on and takes `bg` elsewhere:
/// fg*C + bg*(1-C), mask broadcast over channels. Soft masks are honored.
inline Image rep(const Image& fg, const Image& bg, const ChangeMask& mask)
{
    require_same_shape(fg, bg, "rep");
    require_mask_shape(fg, mask, "rep");
    Image out(fg.height(), fg.width(), fg.channels());
    const int ch = fg.channels();
    auto fv = fg.values();
    auto bv = bg.values();
    auto mv = mask.values();
    auto ov = out.values();
    for (std::size_t p = 0; p < fg.pixels(); ++p) {
        const double m = mv[p];
        for (int c = 0; c < ch; ++c) {
            const std::size_t i = p * ch + c;
            ov[i] = std::min(std::max(fv[i] * m + bv[i] * (1.0 - m), 0.0), 1.0);
        }
    }
    return out;
}

/// The primed pairs built from one (pair, background, mask) triple.
struct SynthesizedPairs {
    ImagePair changed_prime;         // pair foreground over background pair
    BackgroundPair background_prime; // background pair with the pair's unmasked region pasted in
};

inline SynthesizedPairs synthesize(const ImagePair& pair, const BackgroundPair& bg, const ChangeMask& mask)
{
    if (!pair.same_shape(bg)) throw ShapeError("synthesize: pair and background pair differ in shape");
    return SynthesizedPairs{
        ImagePair(rep(pair.first, bg.first, mask), rep(pair.second, bg.second, mask)),
        BackgroundPair(rep(bg.first, pair.first, mask), rep(bg.second, pair.second, mask)),
    };
}

} // namespace bgmix
