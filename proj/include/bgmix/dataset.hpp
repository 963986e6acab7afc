#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "image.hpp"
#include "rng.hpp"

namespace bgmix {

/// A weakly labeled pair. `truth` is the exact object support; it is used for
/// evaluation only and never reaches the training losses.
struct Sample {
    std::string id;
    ImagePair pair;
    ChangeMask truth;
    bool changed = false;
};

// ---------------------------------------------------------------- tiling

struct TileSpec {
    int tile_size = 256;
};

struct Tile {
    int y0 = 0;
    int x0 = 0;
    ImagePair pair;
    std::optional<ChangeMask> mask;
};

/// Tile origins along one axis: a non-overlapping grid, with the last tile
/// snapped inward so every tile is full size.
inline std::vector<int> tile_origins(int length, int tile)
{
    if (tile <= 0) throw Error("tile size must be positive");
    if (length < tile) throw Error("source (" + std::to_string(length) + ") smaller than tile (" + std::to_string(tile) + ")");
    std::vector<int> origins;
    const int count = (length + tile - 1) / tile;
    for (int i = 0; i < count; ++i) origins.push_back(std::min(i * tile, length - tile));
    return origins;
}

inline Image crop(const Image& img, int y0, int x0, int h, int w)
{
    if (y0 < 0 || x0 < 0 || y0 + h > img.height() || x0 + w > img.width()) throw ShapeError("crop outside image");
    Image out(h, w, img.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels(); ++c) out(y, x, c) = img(y0 + y, x0 + x, c);
    return out;
}

inline std::vector<Tile> tile(const ImagePair& pair, const std::optional<ChangeMask>& mask, const TileSpec& spec)
{
    if (mask) require_mask_shape(pair.first, *mask, "tile");
    const int t = spec.tile_size;
    std::vector<Tile> tiles;
    for (int y0 : tile_origins(pair.height(), t))
        for (int x0 : tile_origins(pair.width(), t)) {
            Tile tl{y0, x0, ImagePair(crop(pair.first, y0, x0, t, t), crop(pair.second, y0, x0, t, t)), std::nullopt};
            if (mask) tl.mask = ChangeMask(crop(mask->image(), y0, x0, t, t), mask->threshold());
            tiles.push_back(std::move(tl));
        }
    return tiles;
}

/// Pastes tiles back in order; overlapping boundary tiles overwrite earlier ones.
inline ImagePair reassemble(const std::vector<Tile>& tiles, int height, int width)
{
    if (tiles.empty()) throw Error("no tiles to reassemble");
    const int ch = tiles.front().pair.channels();
    Image a(height, width, ch), b(height, width, ch);
    for (const Tile& t : tiles)
        for (int y = 0; y < t.pair.height(); ++y)
            for (int x = 0; x < t.pair.width(); ++x)
                for (int c = 0; c < ch; ++c) {
                    a(t.y0 + y, t.x0 + x, c) = t.pair.first(y, x, c);
                    b(t.y0 + y, t.x0 + x, c) = t.pair.second(y, x, c);
                }
    return ImagePair(std::move(a), std::move(b));
}

// ---------------------------------------------------------------- pasting

struct PasteResult {
    ImagePair pair;
    ChangeMask mask;
    int offset_x = 0; // destination of the support's bounding-box corner
    int offset_y = 0;
};

/// Moves the binarized change support of `change` (both timestamps) onto the
/// background pair at a random position where its bounding box fits.
inline PasteResult paste_changes(const ImagePair& change, const ChangeMask& change_mask, const ImagePair& background,
                                 Rng& rng)
{
    require_mask_shape(change.first, change_mask, "paste_changes");
    if (change.channels() != background.channels()) throw ShapeError("paste_changes: channel counts differ");
    int y_min = change_mask.height(), y_max = -1, x_min = change_mask.width(), x_max = -1;
    for (int y = 0; y < change_mask.height(); ++y)
        for (int x = 0; x < change_mask.width(); ++x)
            if (change_mask(y, x) >= change_mask.threshold()) {
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
            }
    PasteResult r{background, ChangeMask(background.height(), background.width(), 0.0, change_mask.threshold())};
    if (y_max < 0) return r;

    const int bh = y_max - y_min + 1;
    const int bw = x_max - x_min + 1;
    if (bh > background.height() || bw > background.width()) throw Error("paste_changes: change support larger than target tile");
    r.offset_y = rng.uniform_int(0, background.height() - bh);
    r.offset_x = rng.uniform_int(0, background.width() - bw);
    for (int y = y_min; y <= y_max; ++y)
        for (int x = x_min; x <= x_max; ++x) {
            if (change_mask(y, x) < change_mask.threshold()) continue;
            const int ty = r.offset_y + (y - y_min);
            const int tx = r.offset_x + (x - x_min);
            for (int c = 0; c < change.channels(); ++c) {
                r.pair.first(ty, tx, c) = change.first(y, x, c);
                r.pair.second(ty, tx, c) = change.second(y, x, c);
            }
            r.mask(ty, tx) = 1.0;
        }
    return r;
}

// ---------------------------------------------------------------- enrichment

inline Image flip_horizontal(const Image& img)
{
    Image out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) out(y, img.width() - 1 - x, c) = img(y, x, c);
    return out;
}

inline Image flip_vertical(const Image& img)
{
    Image out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) out(img.height() - 1 - y, x, c) = img(y, x, c);
    return out;
}

inline Sample flip_horizontal(const Sample& s)
{
    return {s.id, ImagePair(flip_horizontal(s.pair.first), flip_horizontal(s.pair.second)),
            ChangeMask(flip_horizontal(s.truth.image()), s.truth.threshold()), s.changed};
}

inline Sample flip_vertical(const Sample& s)
{
    return {s.id, ImagePair(flip_vertical(s.pair.first), flip_vertical(s.pair.second)),
            ChangeMask(flip_vertical(s.truth.image()), s.truth.threshold()), s.changed};
}

/// Per-channel v -> clamp((1 + gain_c) v + offset_c), same draw for both images.
struct ColorJitter {
    std::array<double, 3> gain{};
    std::array<double, 3> offset{};
};

inline Image apply_jitter(const Image& img, const ColorJitter& j)
{
    Image out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c)
                out(y, x, c) = clamp01((1.0 + j.gain[c]) * img(y, x, c) + j.offset[c]);
    return out;
}

inline Sample apply_jitter(const Sample& s, const ColorJitter& j)
{
    return {s.id, ImagePair(apply_jitter(s.pair.first, j), apply_jitter(s.pair.second, j)), s.truth, s.changed};
}

struct EnrichSpec {
    int variants = 2;
    double jitter = 0.2; // max |gain| and |offset| per channel
};

/// Random flips and color distortion; label and support move with the pixels.
inline std::vector<Sample> enrich(const Sample& s, Rng& rng, const EnrichSpec& spec = {})
{
    std::vector<Sample> out;
    for (int v = 0; v < spec.variants; ++v) {
        Sample cur = s;
        if (rng.coin()) cur = flip_horizontal(cur);
        if (rng.coin()) cur = flip_vertical(cur);
        ColorJitter j;
        for (int c = 0; c < 3; ++c) {
            j.gain[c] = rng.uniform(-spec.jitter, spec.jitter);
            j.offset[c] = rng.uniform(-spec.jitter, spec.jitter);
        }
        cur = apply_jitter(cur, j);
        cur.id = s.id + "_e" + std::to_string(v);
        out.push_back(std::move(cur));
    }
    return out;
}

// ---------------------------------------------------------------- synthetic scenes

enum class ObjectShape { Rectangle, Ellipse };

/// Builds a balanced training set from annotated source pairs: tile every
/// pair, keep tiles without changes as background pairs, paste the changes of
/// the changed tiles onto background tiles until there are as many changed
/// pairs as background pairs, then append `enrich.variants` flipped and
/// jittered copies of every result.
inline std::vector<Sample> prepare_from_source(const std::vector<Sample>& source, const TileSpec& tiles,
                                               const EnrichSpec& enrich_spec, Rng& rng)
{
    std::vector<Sample> change_tiles, backgrounds;
    for (const Sample& s : source)
        for (const Tile& t : tile(s.pair, s.truth, tiles)) {
            Sample ts{s.id + "_y" + std::to_string(t.y0) + "_x" + std::to_string(t.x0), t.pair, *t.mask, false};
            ts.changed = ts.truth.area_rate() > 0.0;
            (ts.changed ? change_tiles : backgrounds).push_back(std::move(ts));
        }
    if (backgrounds.empty()) throw Error("prepare: no change-free tiles to paste onto");
    std::vector<Sample> base = backgrounds;
    if (!change_tiles.empty())
        for (std::size_t i = 0; i < backgrounds.size(); ++i) {
            const Sample& src = change_tiles[i % change_tiles.size()];
            const Sample& dst = backgrounds[rng.index(backgrounds.size())];
            PasteResult r = paste_changes(src.pair, src.truth, dst.pair, rng);
            base.push_back(Sample{src.id + "_on_" + dst.id, std::move(r.pair), std::move(r.mask), true});
        }
    std::vector<Sample> out = base;
    for (const Sample& s : base)
        for (Sample& e : enrich(s, rng, enrich_spec)) out.push_back(std::move(e));
    return out;
}

struct SceneObject {
    ObjectShape shape = ObjectShape::Rectangle;
    double cx = 0, cy = 0;         // center, pixels
    double half_w = 0, half_h = 0; // half extents, pixels
    std::array<double, 3> color{};
    bool in_first = false;         // present only in the first image (else only in the second)

    bool covers(int x, int y) const
    {
        const double u = (x - cx) / half_w;
        const double v = (y - cy) / half_h;
        if (shape == ObjectShape::Rectangle) return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
        return u * u + v * v <= 1.0;
    }

    double area() const { return shape == ObjectShape::Rectangle ? 4.0 * half_w * half_h : std::numbers::pi * half_w * half_h; }
};

/// Parameters of one synthetic scene. Background regimes:
///   0 mild photometric shift, 1 moderate shift plus illumination gradient,
///   2 strong shift plus partial re-texturing between the timestamps.
struct SceneSpec {
    int height = 64;
    int width = 64;
    int channels = 3;
    int regime = 0;
    int object_count = 1; // 0..3, ignored when `objects` is non-empty
    double object_min_extent = 0.10; // fraction of the shorter side
    double object_max_extent = 0.25;
    double texture_noise = 0.02; // static per-location texture, shared by both dates
    double sensor_noise = 0.005; // independent per date
    std::vector<SceneObject> objects;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> site_seed; // shared background field; per-scene field when unset
    double site_jitter = 0.05;               // per-scene perturbation of a shared field's base level
};

namespace detail {

struct SmoothField {
    // sum of a few low-frequency cosines per channel
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::array<double, 3> base{};
    std::array<std::vector<Wave>, 3> waves;

    static SmoothField random(Rng& rng)
    {
        SmoothField f;
        for (int c = 0; c < 3; ++c) {
            f.base[c] = rng.uniform(0.25, 0.7);
            for (int k = 0; k < 3; ++k)
                f.waves[c].push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.0, 2 * std::numbers::pi),
                                      rng.uniform(0.02, 0.08)});
        }
        return f;
    }

    double at(int c, double u, double v) const
    {
        double s = base[c];
        for (const Wave& w : waves[c]) s += w.amp * std::cos(2 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
        return s;
    }
};

} // namespace detail

struct Scene {
    ImagePair pair;
    ChangeMask truth;
    bool changed = false;
    std::vector<SceneObject> objects;
};

inline std::vector<SceneObject> sample_objects(const SceneSpec& spec, Rng& rng)
{
    std::vector<SceneObject> objs;
    const double side = std::min(spec.height, spec.width);
    for (int i = 0; i < spec.object_count; ++i) {
        SceneObject o;
        o.shape = rng.coin() ? ObjectShape::Rectangle : ObjectShape::Ellipse;
        o.half_w = 0.5 * side * rng.uniform(spec.object_min_extent, spec.object_max_extent);
        o.half_h = 0.5 * side * rng.uniform(spec.object_min_extent, spec.object_max_extent);
        o.cx = rng.uniform(o.half_w, spec.width - 1 - o.half_w);
        o.cy = rng.uniform(o.half_h, spec.height - 1 - o.half_h);
        // saturated colors distinct from the muted backgrounds
        const bool bright = rng.coin();
        for (int c = 0; c < 3; ++c) o.color[c] = bright ? rng.uniform(0.75, 1.0) : rng.uniform(0.0, 0.2);
        o.color[rng.uniform_int(0, 2)] = bright ? rng.uniform(0.0, 0.3) : rng.uniform(0.7, 1.0);
        o.in_first = rng.coin();
        objs.push_back(o);
    }
    return objs;
}

inline Scene generate_scene(const SceneSpec& spec)
{
    if (spec.height <= 0 || spec.width <= 0) throw Error("scene size must be positive");
    if (spec.regime < 0 || spec.regime > 2) throw Error("scene regime must be 0, 1 or 2");
    if (spec.objects.empty() && (spec.object_count < 0 || spec.object_count > 3)) throw Error("object_count must be in 0..3");
    Rng rng(spec.seed);
    const int h = spec.height, w = spec.width, ch = spec.channels;

    auto field = detail::SmoothField::random(rng);
    std::uint64_t texture_seed = rng.next_seed();
    if (spec.site_seed) {
        Rng site(*spec.site_seed);
        field = detail::SmoothField::random(site);
        texture_seed = site.next_seed();
        for (double& b : field.base) b += rng.uniform(-spec.site_jitter, spec.site_jitter);
    }
    Rng texture(texture_seed);
    const auto retexture = detail::SmoothField::random(rng);
    static constexpr double kGainRange[3] = {0.05, 0.15, 0.25};
    static constexpr double kOffsetRange[3] = {0.03, 0.08, 0.12};
    std::array<double, 3> gain{}, offset{};
    for (int c = 0; c < 3; ++c) {
        gain[c] = rng.uniform(-kGainRange[spec.regime], kGainRange[spec.regime]);
        offset[c] = rng.uniform(-kOffsetRange[spec.regime], kOffsetRange[spec.regime]);
    }
    const double gx = spec.regime >= 1 ? rng.uniform(-0.1, 0.1) : 0.0;
    const double gy = spec.regime >= 1 ? rng.uniform(-0.1, 0.1) : 0.0;
    const double remix = spec.regime == 2 ? rng.uniform(0.2, 0.4) : 0.0;

    std::vector<SceneObject> objects = spec.objects.empty() ? sample_objects(spec, rng) : spec.objects;

    Image a(h, w, ch), b(h, w, ch);
    ChangeMask truth(h, w, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = static_cast<double>(x) / w;
            const double v = static_cast<double>(y) / h;
            for (int c = 0; c < ch; ++c) {
                const double base = field.at(c, u, v);
                const double tex = texture.normal(0.0, spec.texture_noise);
                const double t1 = base + tex + rng.normal(0.0, spec.sensor_noise);
                double t2 = (1.0 + gain[c]) * ((1.0 - remix) * base + remix * retexture.at(c, u, v)) + offset[c] +
                            gx * (u - 0.5) + gy * (v - 0.5);
                t2 += (1.0 + gain[c]) * tex + rng.normal(0.0, spec.sensor_noise);
                a(y, x, c) = clamp01(t1);
                b(y, x, c) = clamp01(t2);
            }
            for (const SceneObject& o : objects) {
                if (!o.covers(x, y)) continue;
                Image& target = o.in_first ? a : b;
                for (int c = 0; c < ch; ++c)
                    target(y, x, c) = clamp01(o.color[ch == 3 ? c : 0] + rng.normal(0.0, spec.sensor_noise));
                truth(y, x) = 1.0;
            }
        }
    Scene s{ImagePair(std::move(a), std::move(b)), std::move(truth), false, std::move(objects)};
    s.changed = s.truth.area_rate() > 0.0;
    return s;
}

/// Synthetic train/test split. Training pairs are half changed, half
/// background-only; test scenes all contain 1-3 object changes. Regimes cycle
/// over scene indices.
struct BenchmarkSpec {
    int train_size = 200;
    int test_size = 50;
    int height = 64;
    int width = 64;
    int channels = 3;
    std::uint64_t seed = 1;
    int sites = 0;            // number of shared background fields; 0 gives every scene its own
    double texture_noise = 0.02;
    double sensor_noise = 0.005;
    double site_jitter = 0.05;
};

struct Benchmark {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

inline Benchmark make_benchmark(const BenchmarkSpec& spec)
{
    Benchmark bm;
    Rng rng(spec.seed);
    auto make = [&](const std::string& id, int index, bool changed) {
        SceneSpec ss;
        ss.height = spec.height;
        ss.width = spec.width;
        ss.channels = spec.channels;
        ss.regime = index % 3;
        ss.object_count = changed ? rng.uniform_int(1, 3) : 0;
        ss.seed = rng.next_seed();
        ss.texture_noise = spec.texture_noise;
        ss.sensor_noise = spec.sensor_noise;
        ss.site_jitter = spec.site_jitter;
        if (spec.sites > 0) ss.site_seed = spec.seed * 1000003ull + static_cast<std::uint64_t>(index % spec.sites);
        Scene sc = generate_scene(ss);
        return Sample{id, std::move(sc.pair), std::move(sc.truth), sc.changed};
    };
    for (int i = 0; i < spec.train_size; ++i) bm.train.push_back(make("train_" + std::to_string(i), i, i % 2 == 0));
    for (int i = 0; i < spec.test_size; ++i) bm.test.push_back(make("test_" + std::to_string(i), i, true));
    return bm;
}

/// Background-only pairs of a weakly labeled set.
inline std::vector<BackgroundPair> background_set(const std::vector<Sample>& samples)
{
    std::vector<BackgroundPair> out;
    for (const Sample& s : samples)
        if (!s.changed) out.emplace_back(s.pair);
    return out;
}

} // namespace bgmix
