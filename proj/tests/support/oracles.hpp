#pragma once

// Deliberately naive re-implementations used as test oracles. Nothing here
// calls into the library's numeric code; only the container types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include <bgmix/bgmix.hpp>

namespace oracle {

using bgmix::ChangeMask;
using bgmix::Image;
using bgmix::ImagePair;

inline double clip(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// ------------------------------------------------------------------ compositing

inline Image rep(const Image& fg, const Image& bg, const ChangeMask& m)
{
    Image out(fg.height(), fg.width(), fg.channels());
    for (int y = 0; y < fg.height(); ++y)
        for (int x = 0; x < fg.width(); ++x)
            for (int c = 0; c < fg.channels(); ++c)
                out(y, x, c) = clip(fg(y, x, c) * m(y, x) + bg(y, x, c) * (1.0 - m(y, x)));
    return out;
}

// ------------------------------------------------------------------ SSIM

inline int reflect(int i, int n)
{
    // d c b a | a b c d | d c b a, written out case by case
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

/// Mean SSIM with an explicit 11x11 window at every pixel.
inline double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, int h, int w)
{
    double g[11], gs = 0.0;
    for (int i = 0; i < 11; ++i) {
        g[i] = std::exp(-double((i - 5) * (i - 5)) / (2.0 * 1.5 * 1.5));
        gs += g[i];
    }
    for (double& v : g) v /= gs;
    const double c1 = 0.0001, c2 = 0.0009;
    double sum = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int dy = -5; dy <= 5; ++dy)
                for (int dx = -5; dx <= 5; ++dx) {
                    const double k = g[dy + 5] * g[dx + 5];
                    const int idx = reflect(y + dy, h) * w + reflect(x + dx, w);
                    ma += k * a[idx];
                    mb += k * b[idx];
                    saa += k * a[idx] * a[idx];
                    sbb += k * b[idx] * b[idx];
                    sab += k * a[idx] * b[idx];
                }
            const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
            sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    return sum / (h * w);
}

inline double ssim(const Image& a, const Image& b)
{
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> pa, pb;
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                pa.push_back(a(y, x, c));
                pb.push_back(b(y, x, c));
            }
        total += ssim_plane(pa, pb, a.height(), a.width());
    }
    return total / a.channels();
}

inline double mean_abs(const Image& a, const Image& b)
{
    double s = 0.0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            for (int c = 0; c < a.channels(); ++c) s += std::abs(a(y, x, c) - b(y, x, c));
    return s / (a.height() * a.width() * a.channels());
}

// ------------------------------------------------------------------ stubs

inline double mean_of(const Image& img, double (*f)(double))
{
    double s = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) s += f(img(y, x, c));
    return s / (img.height() * img.width() * img.channels());
}

/// Five-number descriptor: means, mean |difference|, second moments.
inline std::vector<double> stub_descriptor(const ImagePair& p)
{
    double diff = 0.0, cross = 0.0;
    const Image& a = p.first;
    const Image& b = p.second;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            for (int c = 0; c < a.channels(); ++c) {
                diff += std::abs(a(y, x, c) - b(y, x, c));
                cross += a(y, x, c) * b(y, x, c);
            }
    const double n = a.height() * a.width() * a.channels();
    return {mean_of(a, [](double v) { return v; }), mean_of(b, [](double v) { return v; }), diff / n,
            mean_of(a, [](double v) { return v * v; }), 0.1 + cross / n};
}

class StubFeatures final : public bgmix::FeatureExtractor {
public:
    std::vector<double> extract(const ImagePair& p) const override { return stub_descriptor(p); }
    std::string name() const override { return "stub"; }
    std::size_t dimension_for(int) const override { return 5; }
};

/// D(x) = sigmoid(a * mean(first) + b * mean(second) + c).
class StubDiscriminator final : public bgmix::Discriminator {
public:
    StubDiscriminator(double a, double b, double c) : a_(a), b_(b), c_(c) {}
    double score(const ImagePair& p) const override
    {
        const double z = a_ * mean_of(p.first, [](double v) { return v; }) +
                         b_ * mean_of(p.second, [](double v) { return v; }) + c_;
        return 1.0 / (1.0 + std::exp(-z));
    }
    void ascend(std::span<const ImagePair>, std::span<const ImagePair>, double) override {}
    std::vector<double> parameters() const override { return {a_, b_, c_}; }

private:
    double a_, b_, c_;
};

// ------------------------------------------------------------------ loss

inline double cos_dist(const std::vector<double>& u, const std::vector<double>& v)
{
    double d = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return 1.0 - d / std::sqrt(nu * nv);
}

struct HandBranch {
    double l2, l3, l4, l4_generator, l5, lcon, generator;
};

struct HandLoss {
    double l1;
    HandBranch real, aug;
    double total, generator_total;
};

template <class Features, class D1, class D2>
HandBranch hand_branch(const ImagePair& src, const ImagePair& bg, const ChangeMask& m, const ChangeMask& bg_mask,
                       const Features& feat, const D1& d1, const D2& d2, const bgmix::LossWeights& w)
{
    const ImagePair ip(oracle::rep(src.first, bg.first, m), oracle::rep(src.second, bg.second, m));
    const ImagePair bp(oracle::rep(bg.first, src.first, m), oracle::rep(bg.second, src.second, m));
    HandBranch r{};
    r.l2 = cos_dist(feat(src), feat(ip)) + cos_dist(feat(bg), feat(bp));
    r.l3 = (1.0 - oracle::ssim(src.first, ip.first) - oracle::mean_abs(src.first, ip.first)) +
           (1.0 - oracle::ssim(src.second, ip.second) - oracle::mean_abs(src.second, ip.second));
    auto clampp = [](double p) { return std::min(std::max(p, 1e-6), 1.0 - 1e-6); };
    r.l4 = std::log(clampp(d1(src))) + std::log(1.0 - clampp(d1(ip))) + std::log(clampp(d2(bg))) +
           std::log(1.0 - clampp(d2(bp)));
    r.l4_generator = -std::log(clampp(d1(ip))) - std::log(clampp(d2(bp)));
    double sq = 0.0;
    for (int y = 0; y < bg_mask.height(); ++y)
        for (int x = 0; x < bg_mask.width(); ++x) sq += bg_mask(y, x) * bg_mask(y, x);
    r.l5 = sq / (bg_mask.height() * bg_mask.width());
    r.lcon = w.lambda2 * r.l2 + w.lambda3 * r.l3 + w.lambda4 * r.l4 + w.lambda5 * r.l5;
    r.generator = w.lambda2 * r.l2 + w.lambda3 * r.l3 + w.lambda4 * r.l4_generator + w.lambda5 * r.l5;
    return r;
}

/// Every term of the objective written out with the oracle primitives above.
template <class Features, class D1, class D2>
HandLoss hand_loss(const ImagePair& pair, const ImagePair& aug, const ImagePair& bg, const ChangeMask& c,
                   const ChangeMask& c_aug, const ChangeMask& c_bg, const Features& feat, const D1& d1,
                   const D2& d2, const bgmix::LossWeights& w)
{
    HandLoss r{};
    r.l1 = cos_dist(feat(pair), feat(aug));
    r.real = hand_branch(pair, bg, c, c_bg, feat, d1, d2, w);
    r.aug = hand_branch(aug, bg, c_aug, c_bg, feat, d1, d2, w);
    r.total = w.lambda1 * r.l1 + r.real.lcon + r.aug.lcon;
    r.generator_total = w.lambda1 * r.l1 + r.real.generator + r.aug.generator;
    return r;
}

// ------------------------------------------------------------------ BGMix with a restricted op set

/// Replays a plan whose chains use only bg_aware, translate, solarize and
/// posterize, with the mask moved along by translations.
inline ImagePair mix(const bgmix::MixPlan& plan, const ImagePair& pair, const std::vector<bgmix::BackgroundPair>& bgs,
                     const ChangeMask& mask)
{
    const int h = pair.height(), w = pair.width(), ch = pair.channels();
    std::vector<Image> acc{Image(h, w, ch), Image(h, w, ch)};
    std::vector<std::vector<double>> sum(2, std::vector<double>(static_cast<std::size_t>(h) * w * ch, 0.0));
    for (std::size_t k = 0; k < plan.chains.size(); ++k) {
        Image cur[2] = {pair.first, pair.second};
        ChangeMask m = mask;
        const auto& bg = bgs[plan.background_indices[k]];
        const Image* bgi[2] = {&bg.first, &bg.second};
        for (const auto& op : plan.chains[k].ops) {
            switch (op.kind) {
            case bgmix::AugKind::BgAware:
                for (int t = 0; t < 2; ++t) cur[t] = oracle::rep(cur[t], *bgi[t], m);
                break;
            case bgmix::AugKind::Translate: {
                ChangeMask nm(h, w, 0.0);
                for (int t = 0; t < 2; ++t) {
                    Image n(h, w, ch);
                    for (int y = 0; y < h; ++y)
                        for (int x = 0; x < w; ++x) {
                            const int sy = y - op.dy, sx = x - op.dx;
                            if (sy < 0 || sx < 0 || sy >= h || sx >= w) continue;
                            for (int c = 0; c < ch; ++c) n(y, x, c) = cur[t](sy, sx, c);
                            if (t == 0) nm(y, x) = m(sy, sx);
                        }
                    cur[t] = n;
                }
                m = nm;
                break;
            }
            case bgmix::AugKind::Solarize:
                for (int t = 0; t < 2; ++t)
                    for (double& v : cur[t].values())
                        if (v >= op.threshold) v = 1.0 - v;
                break;
            case bgmix::AugKind::Posterize:
                for (int t = 0; t < 2; ++t)
                    for (double& v : cur[t].values()) {
                        const int level = static_cast<int>(std::floor(v * 255.0 + 0.5));
                        const int step = 1 << (8 - op.bits);
                        v = (level / step * step) / 255.0;
                    }
                break;
            default: throw bgmix::Error("oracle mix: unsupported op");
            }
        }
        for (int t = 0; t < 2; ++t) {
            auto v = cur[t].values();
            for (std::size_t i = 0; i < v.size(); ++i) sum[t][i] += plan.path_weights[k] * v[i];
        }
    }
    const double w0 = plan.blend_weight;
    const Image* orig[2] = {&pair.first, &pair.second};
    for (int t = 0; t < 2; ++t) {
        auto o = orig[t]->values();
        auto a = acc[t].values();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = clip(w0 * o[i] + (1.0 - w0) * sum[t][i]);
    }
    return ImagePair(acc[0], acc[1]);
}

// ------------------------------------------------------------------ metrics

struct Counts {
    std::uint64_t tp, fp, fn, tn;
};

inline double f1(const Counts& c) { return 2.0 * c.tp / double(2 * c.tp + c.fp + c.fn); }
inline double iou(const Counts& c) { return c.tp / double(c.tp + c.fp + c.fn); }
inline double oa(const Counts& c) { return (c.tp + c.tn) / double(c.tp + c.fp + c.fn + c.tn); }

// ------------------------------------------------------------------ random inputs

inline Image random_image(bgmix::Rng& rng, int h, int w, int ch)
{
    Image img(h, w, ch);
    for (double& v : img.values()) v = rng.uniform();
    return img;
}

inline ChangeMask random_mask(bgmix::Rng& rng, int h, int w, bool binary)
{
    ChangeMask m(h, w);
    for (double& v : m.values()) v = binary ? (rng.coin() ? 1.0 : 0.0) : rng.uniform();
    return m;
}

} // namespace oracle
