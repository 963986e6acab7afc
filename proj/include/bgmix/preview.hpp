#pragma once

#include <span>
#include <vector>

#include "mix.hpp"

namespace bgmix {

/// Contact-sheet geometry: the original pair in column 0 and `n` augmented
/// variants to its right; first dates on the top row, second dates below.
/// A white gutter of `pad` pixels surrounds every cell, so
///   width  = (n + 1) * W + (n + 2) * pad
///   height = 2 * H + 3 * pad
struct SheetLayout {
    int cell_height = 0;
    int cell_width = 0;
    int count = 0;
    int pad = 2;

    int width() const { return (count + 1) * cell_width + (count + 2) * pad; }
    int height() const { return 2 * cell_height + 3 * pad; }
    int cell_x(int column) const { return pad + column * (cell_width + pad); }
    int cell_y(int row) const { return pad + row * (cell_height + pad); }
};

inline void blit(Image& dst, const Image& src, int y0, int x0)
{
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
            for (int c = 0; c < src.channels(); ++c) dst(y0 + y, x0 + x, c) = src(y, x, c);
}

struct Preview {
    Image sheet;
    std::vector<MixPlan> plans;
};

/// Variant i uses plan seed `seed + i`, so a sheet is reproducible from its seed.
inline Preview preview(const ImagePair& pair, std::span<const BackgroundPair> bgset, const ChangeMask& mask,
                       const MixConfig& cfg, int n, std::uint64_t seed, int pad = 2)
{
    if (n < 0) throw Error("preview count must be nonnegative");
    if (pad < 0) throw Error("preview padding must be nonnegative");
    const SheetLayout layout{pair.height(), pair.width(), n, pad};
    Preview out{Image(layout.height(), layout.width(), pair.channels(), 1.0), {}};
    blit(out.sheet, pair.first, layout.cell_y(0), layout.cell_x(0));
    blit(out.sheet, pair.second, layout.cell_y(1), layout.cell_x(0));
    for (int i = 0; i < n; ++i) {
        MixPlan plan = sample_plan(cfg, seed + static_cast<std::uint64_t>(i), pair.width(), bgset.size());
        const ImagePair aug = apply_plan(plan, pair, bgset, mask, cfg.cotransform_mask);
        blit(out.sheet, aug.first, layout.cell_y(0), layout.cell_x(i + 1));
        blit(out.sheet, aug.second, layout.cell_y(1), layout.cell_x(i + 1));
        out.plans.push_back(std::move(plan));
    }
    return out;
}

} // namespace bgmix
