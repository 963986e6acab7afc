#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "augment.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace bgmix {

struct MixConfig {
    int k_paths = 4;
    double dirichlet_alpha = 1.0;
    double beta_a = 1.0;
    double beta_b = 1.0;
    int chain_depth_max = 3;
    std::vector<AugKind> op_set{kAllAugKinds.begin(), kAllAugKinds.end()};
    OpRanges ranges{};
    bool independent_backgrounds = true; // one background pair per path
    bool cotransform_mask = true;

    void validate() const
    {
        if (k_paths < 2 || k_paths > 6) throw Error("k_paths must be in [2,6]");
        if (!(dirichlet_alpha > 0.0)) throw Error("dirichlet_alpha must be positive");
        if (!(beta_a > 0.0) || !(beta_b > 0.0)) throw Error("beta parameters must be positive");
        if (chain_depth_max != 3) throw Error("chain_depth_max is fixed at 3");
        if (op_set.empty()) throw Error("op_set is empty");
    }

    void drop_op(AugKind k) { std::erase(op_set, k); }
};

struct MixPlan {
    std::vector<double> path_weights;
    std::vector<OpChain> chains;
    std::vector<std::size_t> background_indices; // one per path
    double blend_weight = 0.0;
    std::uint64_t rng_seed = 0;

    std::size_t paths() const { return chains.size(); }

    friend bool operator==(const MixPlan&, const MixPlan&) = default;
};

/// Draws everything BGMix needs up front so the plan can be logged and replayed.
/// `image_width` bounds translation; `background_count` is the size of the
/// background set the plan will index into.
inline MixPlan sample_plan(const MixConfig& cfg, std::uint64_t seed, int image_width, std::size_t background_count)
{
    cfg.validate();
    if (background_count == 0) throw Error("background set is empty");
    Rng rng(seed);
    MixPlan plan;
    plan.rng_seed = seed;
    plan.path_weights = rng.dirichlet(static_cast<std::size_t>(cfg.k_paths), cfg.dirichlet_alpha);
    const std::size_t shared_bg = rng.index(background_count);
    for (int i = 0; i < cfg.k_paths; ++i) {
        std::array<AugOp, 3> drawn;
        for (auto& op : drawn) op = sample_op(cfg.op_set[rng.index(cfg.op_set.size())], cfg.ranges, image_width, rng);
        const int depth = rng.uniform_int(1, cfg.chain_depth_max);
        OpChain chain;
        chain.ops.assign(drawn.begin(), drawn.begin() + depth);
        plan.chains.push_back(std::move(chain));
        plan.background_indices.push_back(cfg.independent_backgrounds ? rng.index(background_count) : shared_bg);
    }
    plan.blend_weight = rng.beta(cfg.beta_a, cfg.beta_b);
    return plan;
}

inline MixPlan sample_plan(const MixConfig& cfg, Rng& rng, int image_width, std::size_t background_count)
{
    return sample_plan(cfg, rng.next_seed(), image_width, background_count);
}

/// Replays a plan: sum_i w_i * chain_i(pair, bg_i, mask), then blended with the
/// original by the plan's blend weight.
inline ImagePair apply_plan(const MixPlan& plan, const ImagePair& pair, std::span<const BackgroundPair> bgset,
                            const ChangeMask& mask, bool cotransform_mask = true)
{
    if (bgset.empty()) throw Error("background set is empty");
    if (plan.path_weights.size() != plan.chains.size() || plan.background_indices.size() != plan.chains.size())
        throw Error("malformed mix plan");
    require_mask_shape(pair.first, mask, "bgmix");

    const std::size_t n = pair.first.size();
    std::vector<double> acc1(n, 0.0), acc2(n, 0.0);
    for (std::size_t i = 0; i < plan.chains.size(); ++i) {
        const std::size_t b = plan.background_indices[i];
        if (b >= bgset.size()) throw Error("mix plan references a missing background pair");
        if (!bgset[b].same_shape(pair)) throw ShapeError("background pair shape differs from the input pair");
        const ImagePair out = apply_chain(plan.chains[i], pair, bgset[b], mask, cotransform_mask);
        const double w = plan.path_weights[i];
        auto o1 = out.first.values();
        auto o2 = out.second.values();
        for (std::size_t j = 0; j < n; ++j) {
            acc1[j] += w * o1[j];
            acc2[j] += w * o2[j];
        }
    }
    const double w0 = plan.blend_weight;
    auto i1 = pair.first.values();
    auto i2 = pair.second.values();
    for (std::size_t j = 0; j < n; ++j) {
        acc1[j] = w0 * i1[j] + (1.0 - w0) * acc1[j];
        acc2[j] = w0 * i2[j] + (1.0 - w0) * acc2[j];
    }
    return ImagePair(Image(pair.height(), pair.width(), pair.channels(), std::move(acc1)),
                     Image(pair.height(), pair.width(), pair.channels(), std::move(acc2)));
}

struct MixResult {
    ImagePair pair;
    MixPlan plan;
};

inline MixResult bgmix(const ImagePair& pair, std::span<const BackgroundPair> bgset, const ChangeMask& mask,
                       const MixConfig& cfg, Rng& rng)
{
    if (bgset.empty()) throw Error("background set is empty");
    MixPlan plan = sample_plan(cfg, rng, pair.width(), bgset.size());
    ImagePair out = apply_plan(plan, pair, bgset, mask, cfg.cotransform_mask);
    return {std::move(out), std::move(plan)};
}

/// Brings a background pair to the target size: center-crop when larger,
/// bilinear resize when smaller (each axis independently).
inline Image fit_to_shape(const Image& img, int height, int width)
{
    if (img.height() == height && img.width() == width) return img;
    Image cur = img;
    if (cur.height() > height || cur.width() > width) {
        const int h = std::min(cur.height(), height);
        const int w = std::min(cur.width(), width);
        const int y0 = (cur.height() - h) / 2;
        const int x0 = (cur.width() - w) / 2;
        Image cropped(h, w, cur.channels());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < cur.channels(); ++c) cropped(y, x, c) = cur(y0 + y, x0 + x, c);
        cur = std::move(cropped);
    }
    if (cur.height() == height && cur.width() == width) return cur;
    Image out(height, width, cur.channels());
    const double sy = static_cast<double>(cur.height()) / height;
    const double sx = static_cast<double>(cur.width()) / width;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, cur.height() - 1.0);
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, cur.width() - 1.0);
            const int y0 = static_cast<int>(fy);
            const int x0 = static_cast<int>(fx);
            const int y1 = std::min(y0 + 1, cur.height() - 1);
            const int x1 = std::min(x0 + 1, cur.width() - 1);
            const double ty = fy - y0;
            const double tx = fx - x0;
            for (int c = 0; c < cur.channels(); ++c) {
                const double top = cur(y0, x0, c) * (1 - tx) + cur(y0, x1, c) * tx;
                const double bot = cur(y1, x0, c) * (1 - tx) + cur(y1, x1, c) * tx;
                out(y, x, c) = top * (1 - ty) + bot * ty;
            }
        }
    return out;
}

inline BackgroundPair fit_to_shape(const BackgroundPair& bg, int height, int width)
{
    return BackgroundPair(fit_to_shape(bg.first, height, width), fit_to_shape(bg.second, height, width));
}

} // namespace bgmix
