#pragma once

#include <atomic>
#include <cmath>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compositing.hpp"
#include "features.hpp"
#include "image.hpp"
#include "ssim.hpp"

namespace bgmix {

inline constexpr double kLogEps = 1e-6;

inline double clamp_probability(double p) { return std::min(std::max(p, kLogEps), 1.0 - kLogEps); }

/// 1 - cos(a, b). A zero-norm vector counts as orthogonal (distance 1).
inline double cosine_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw ShapeError("cosine_distance: feature dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        static std::atomic<int> warned{0};
        if (warned.fetch_add(1) < 5) std::clog << "bgmix: zero-norm feature vector, cosine distance set to 1\n";
        return 1.0;
    }
    const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    return 1.0 - std::min(1.0, std::max(-1.0, cos));
}

/// Perceptual inconsistency between two pairs under extractor f.
inline double perceptual_distance(const ImagePair& a, const ImagePair& b, const FeatureExtractor& f)
{
    return cosine_distance(f.extract(a), f.extract(b));
}

inline double lcon1(const ImagePair& pair, const ImagePair& aug, const FeatureExtractor& f)
{
    if (!pair.same_shape(aug)) throw ShapeError("lcon1: shape mismatch");
    return perceptual_distance(pair, aug, f);
}

inline double lcon2(const ImagePair& pair, const BackgroundPair& bg, const SynthesizedPairs& synth,
                    const FeatureExtractor& f)
{
    return perceptual_distance(pair, synth.changed_prime, f) + perceptual_distance(bg, synth.background_prime, f);
}

/// sum over both timestamps of 1 - SSIM(I, I') - L1(I, I').
inline double lcon3(const ImagePair& pair, const ImagePair& changed_prime)
{
    if (!pair.same_shape(changed_prime)) throw ShapeError("lcon3: shape mismatch");
    return (1.0 - ssim(pair.first, changed_prime.first) - mean_abs_error(pair.first, changed_prime.first)) +
           (1.0 - ssim(pair.second, changed_prime.second) - mean_abs_error(pair.second, changed_prime.second));
}

/// Mean squared mask value, i.e. L2 distance to the all-zero mask.
inline double lcon5(const ChangeMask& background_mask)
{
    auto v = background_mask.values();
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
}

/// Real-vs-synthesized pair classifier. Scores are kept inside
/// [kLogEps, 1 - kLogEps].
class Discriminator {
public:
    virtual ~Discriminator() = default;
    virtual double score(const ImagePair& pair) const = 0;
    /// One gradient ascent step on mean log D(real) + mean log(1 - D(fake)).
    virtual void ascend(std::span<const ImagePair> real, std::span<const ImagePair> fake, double learning_rate) = 0;
    virtual std::vector<double> parameters() const = 0;
};

/// Logistic regression over a feature extractor: D(x) = sigmoid(w . f(x) + b).
class LogisticDiscriminator final : public Discriminator {
public:
    LogisticDiscriminator(std::shared_ptr<const FeatureExtractor> features, std::size_t dimension)
        : features_(std::move(features)), weights_(dimension, 0.0)
    {
    }

    double score(const ImagePair& pair) const override { return score_features(features_->extract(pair)); }

    double score_features(std::span<const double> feat) const
    {
        if (feat.size() != weights_.size()) throw ShapeError("discriminator: feature dimension mismatch");
        double z = bias_;
        for (std::size_t i = 0; i < feat.size(); ++i) z += weights_[i] * feat[i];
        return clamp_probability(1.0 / (1.0 + std::exp(-z)));
    }

    void ascend(std::span<const ImagePair> real, std::span<const ImagePair> fake, double learning_rate) override
    {
        std::vector<std::vector<double>> rf, ff;
        for (const auto& p : real) rf.push_back(features_->extract(p));
        for (const auto& p : fake) ff.push_back(features_->extract(p));
        ascend_features(rf, ff, learning_rate);
    }

    void ascend_features(const std::vector<std::vector<double>>& real, const std::vector<std::vector<double>>& fake,
                         double learning_rate)
    {
        std::vector<double> gw(weights_.size(), 0.0);
        double gb = 0.0;
        auto accumulate = [&](const std::vector<std::vector<double>>& set, bool is_real) {
            if (set.empty()) return;
            const double inv = 1.0 / static_cast<double>(set.size());
            for (const auto& f : set) {
                const double d = score_features(f);
                // d/dz log(d) = 1 - d ; d/dz log(1 - d) = -d
                const double g = (is_real ? 1.0 - d : -d) * inv;
                for (std::size_t i = 0; i < f.size(); ++i) gw[i] += g * f[i];
                gb += g;
            }
        };
        accumulate(real, true);
        accumulate(fake, false);
        for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += learning_rate * gw[i];
        bias_ += learning_rate * gb;
    }

    std::vector<double> parameters() const override
    {
        auto p = weights_;
        p.push_back(bias_);
        return p;
    }

    const FeatureExtractor* extractor() const { return features_.get(); }

private:
    std::shared_ptr<const FeatureExtractor> features_;
    std::vector<double> weights_;
    double bias_ = 0.0;
};

inline double lcon4(const ImagePair& pair, const BackgroundPair& bg, const SynthesizedPairs& synth,
                    const Discriminator& d1, const Discriminator& d2)
{
    return std::log(clamp_probability(d1.score(pair))) +
           std::log(1.0 - clamp_probability(d1.score(synth.changed_prime))) +
           std::log(clamp_probability(d2.score(bg))) +
           std::log(1.0 - clamp_probability(d2.score(synth.background_prime)));
}

struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 5.0;
    double lambda4 = 1.0;
    double lambda5 = 0.01;

    static LossWeights aicd() { return {1.0, 1.0, 5.0, 1.0, 0.01}; }
    static LossWeights bcd() { return {1.0, 1.0, 3.0, 1.0, 0.01}; }

    static std::optional<LossWeights> profile(const std::string& name)
    {
        if (name == "aicd") return aicd();
        if (name == "bcd") return bcd();
        return std::nullopt;
    }

    void validate() const
    {
        for (double l : {lambda1, lambda2, lambda3, lambda4, lambda5})
            if (!(l >= 0.0) || !std::isfinite(l)) throw Error("loss weights must be finite and nonnegative");
    }

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// The four weighted terms for one branch (real or augmented).
struct BranchTerms {
    double lcon2_changed = 0.0;    // phi(I, I')
    double lcon2_background = 0.0; // phi(B, B')
    double lcon2 = 0.0;
    double lcon3 = 0.0;
    double lcon4 = 0.0;           // as written: log D(real) + log(1 - D(synth)) for both discriminators
    double lcon4_generator = 0.0; // non-saturating detector form: -log D1(I') - log D2(B')
    double lcon5 = 0.0;
    double lcon = 0.0;            // l2*lcon2 + l3*lcon3 + l4*lcon4 + l5*lcon5
    double generator = 0.0;       // same with lcon4_generator in place of lcon4
};

inline double lcon(double l2, double l3, double l4, double l5, const LossWeights& w)
{
    return w.lambda2 * l2 + w.lambda3 * l3 + w.lambda4 * l4 + w.lambda5 * l5;
}

struct LossReport {
    double lcon1 = 0.0;
    BranchTerms real;
    BranchTerms augmented;
    double lcon = 0.0;  // real.lcon + augmented.lcon
    double total = 0.0; // lambda1 * lcon1 + lcon
    double generator_total = 0.0; // objective the detector descends
    LossWeights weights;

    double decomposition_error() const
    {
        return std::abs(total - (weights.lambda1 * lcon1 + real.lcon + augmented.lcon));
    }
};

/// Predicted masks feeding one loss evaluation.
struct LossMasks {
    ChangeMask real;       // C = phi(I1, I2)
    ChangeMask augmented;  // C~ = phi(I~1, I~2)
    ChangeMask background; // C' = phi(B1, B2)
};

/// Everything in the loss that does not depend on the predicted masks,
/// computed once so repeated evaluations (finite differences) stay cheap.
class LossContext {
public:
    LossContext(ImagePair pair, ImagePair aug, BackgroundPair bg, const FeatureExtractor& f)
        : pair_(std::move(pair)), aug_(std::move(aug)), bg_(std::move(bg)), f_(f),
          feat_pair_(f.extract(pair_)), feat_aug_(f.extract(aug_)), feat_bg_(f.extract(bg_)),
          ssim_pair_{SsimReference(pair_.first), SsimReference(pair_.second)},
          ssim_aug_{SsimReference(aug_.first), SsimReference(aug_.second)},
          lcon1_(cosine_distance(feat_pair_, feat_aug_)), aug_is_pair_(pair_ == aug_)
    {
        if (!pair_.same_shape(aug_) || !pair_.same_shape(bg_)) throw ShapeError("loss: pair shapes differ");
    }

    const ImagePair& pair() const { return pair_; }
    const ImagePair& augmented() const { return aug_; }
    const BackgroundPair& background() const { return bg_; }
    double lcon1() const { return lcon1_; }

    LossReport evaluate(const LossMasks& masks, const Discriminator& d1, const Discriminator& d2,
                        const LossWeights& w) const
    {
        w.validate();
        LossReport r;
        r.weights = w;
        r.lcon1 = lcon1_;
        const double l5 = bgmix::lcon5(masks.background);
        r.real = branch(pair_, feat_pair_, ssim_pair_, masks.real, l5, d1, d2, w);
        // identical inputs give an identical branch; skip the second evaluation
        if (aug_is_pair_ && masks.augmented.image() == masks.real.image())
            r.augmented = r.real;
        else
            r.augmented = branch(aug_, feat_aug_, ssim_aug_, masks.augmented, l5, d1, d2, w);
        r.lcon = r.real.lcon + r.augmented.lcon;
        r.total = w.lambda1 * r.lcon1 + r.real.lcon + r.augmented.lcon;
        r.generator_total = w.lambda1 * r.lcon1 + r.real.generator + r.augmented.generator;
        return r;
    }

private:
    double score(const Discriminator& d, const std::vector<double>& feat, const ImagePair& p) const
    {
        if (auto* ld = dynamic_cast<const LogisticDiscriminator*>(&d); ld && ld->extractor() == &f_)
            return ld->score_features(feat);
        return d.score(p);
    }

    BranchTerms branch(const ImagePair& src, const std::vector<double>& feat_src, const SsimReference (&ssim_src)[2],
                       const ChangeMask& mask, double l5, const Discriminator& d1, const Discriminator& d2,
                       const LossWeights& w) const
    {
        const SynthesizedPairs s = synthesize(src, bg_, mask);
        const auto feat_changed = f_.extract(s.changed_prime);
        const auto feat_background = f_.extract(s.background_prime);

        BranchTerms t;
        t.lcon2_changed = cosine_distance(feat_src, feat_changed);
        t.lcon2_background = cosine_distance(feat_bg_, feat_background);
        t.lcon2 = t.lcon2_changed + t.lcon2_background;

        t.lcon3 = (1.0 - ssim_src[0].compare(s.changed_prime.first) - mean_abs_error(src.first, s.changed_prime.first)) +
                  (1.0 - ssim_src[1].compare(s.changed_prime.second) - mean_abs_error(src.second, s.changed_prime.second));

        const double d1_real = score(d1, feat_src, src);
        const double d1_fake = score(d1, feat_changed, s.changed_prime);
        const double d2_real = score(d2, feat_bg_, bg_);
        const double d2_fake = score(d2, feat_background, s.background_prime);
        t.lcon4 = std::log(d1_real) + std::log(1.0 - d1_fake) + std::log(d2_real) + std::log(1.0 - d2_fake);
        t.lcon4_generator = -std::log(d1_fake) - std::log(d2_fake);

        t.lcon5 = l5;
        t.lcon = bgmix::lcon(t.lcon2, t.lcon3, t.lcon4, t.lcon5, w);
        t.generator = bgmix::lcon(t.lcon2, t.lcon3, t.lcon4_generator, t.lcon5, w);
        return t;
    }

    ImagePair pair_;
    ImagePair aug_;
    BackgroundPair bg_;
    const FeatureExtractor& f_;
    std::vector<double> feat_pair_, feat_aug_, feat_bg_;
    SsimReference ssim_pair_[2];
    SsimReference ssim_aug_[2];
    double lcon1_;
    bool aug_is_pair_;
};

/// lambda1 * Lcon1(I, I~) + Lcon(I, B) + Lcon(I~, B) with the given masks.
inline LossReport total_loss(const ImagePair& pair, const ImagePair& aug, const BackgroundPair& bg,
                             const LossMasks& masks, const FeatureExtractor& f, const Discriminator& d1,
                             const Discriminator& d2, const LossWeights& w)
{
    return LossContext(pair, aug, bg, f).evaluate(masks, d1, d2, w);
}

} // namespace bgmix
