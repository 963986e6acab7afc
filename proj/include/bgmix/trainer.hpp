#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "detector.hpp"
#include "features.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "mix.hpp"
#include "png_io.hpp"
#include "rng.hpp"

namespace bgmix {

class TrainError : public Error {
public:
    using Error::Error;
};

struct TrainConfig {
    int batch_size = 4;
    double learning_rate = 1e-4;
    double momentum = 0.5;
    int max_iters = 2000;
    LossWeights weights = LossWeights::aicd();
    MixConfig mix{};
    bool augment = true;            // false: the augmented branch sees the original pair
    double fd_step = 1e-4;          // relative: h = fd_step * max(1, |theta|)
    std::optional<double> discriminator_learning_rate; // defaults to learning_rate
    int eval_every = 0;             // 0: evaluate only at the end
    std::uint64_t seed = 0;
    std::string dump_dir;           // where a failing batch is written, if set

    double disc_lr() const { return discriminator_learning_rate.value_or(learning_rate); }

    void validate() const
    {
        if (batch_size < 1) throw Error("batch_size must be positive");
        if (!(learning_rate >= 0.0)) throw Error("learning_rate must be nonnegative");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must be in [0,1)");
        if (max_iters < 0) throw Error("max_iters must be nonnegative");
        if (!(fd_step > 0.0)) throw Error("fd_step must be positive");
        weights.validate();
        mix.validate();
    }
};

/// Step size used for parameter value `theta`.
inline double fd_step_for(double theta, double relative) { return relative * std::max(1.0, std::abs(theta)); }

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h for every coordinate.
inline std::vector<double> central_difference_gradient(const std::function<double(const std::vector<double>&)>& f,
                                                       const std::vector<double>& x, double relative_step)
{
    std::vector<double> g(x.size());
    std::vector<double> probe = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double h = fd_step_for(x[k], relative_step);
        probe[k] = x[k] + h;
        const double up = f(probe);
        probe[k] = x[k] - h;
        const double down = f(probe);
        probe[k] = x[k];
        g[k] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Detector, its momentum buffer and the two discriminators.
struct TrainerState {
    std::shared_ptr<const FeatureExtractor> features;
    ToyDetector detector;
    std::vector<double> velocity;
    LogisticDiscriminator d1;
    LogisticDiscriminator d2;

    explicit TrainerState(int channels, std::shared_ptr<const FeatureExtractor> f = std::make_shared<DefaultFeatures>())
        : features(f), detector(channels), velocity(detector.parameter_count(), 0.0),
          d1(f, f->dimension_for(channels)), d2(f, f->dimension_for(channels))
    {
    }
};

/// What one batch item saw during a step; kept so gradients can be re-derived.
struct StepItem {
    ImagePair pair;
    ImagePair augmented;
    BackgroundPair background;
    std::optional<MixPlan> plan;
};

struct StepResult {
    LossReport report;          // batch mean at the pre-update parameters
    double mask_area_rate = 0;  // mean binarized area of C over the batch
    std::vector<double> gradient;
    std::vector<StepItem> items;
};

/// Detector objective for one item as a function of detector parameters: the
/// generator form of the total loss with masks re-predicted from `params`.
inline double item_objective(const LossContext& ctx, const DifferencePlanes& diff_pair, const DifferencePlanes& diff_aug,
                             const DifferencePlanes& diff_bg, ToyDetector& scratch, const std::vector<double>& params,
                             const Discriminator& d1, const Discriminator& d2, const LossWeights& w)
{
    scratch.parameters() = params;
    ChangeMask real = scratch.predict(diff_pair);
    ChangeMask aug = &diff_aug == &diff_pair ? real : scratch.predict(diff_aug);
    LossMasks masks{std::move(real), std::move(aug), scratch.predict(diff_bg)};
    return ctx.evaluate(masks, d1, d2, w).generator_total;
}

namespace detail {

inline void accumulate(BranchTerms& acc, const BranchTerms& t, double s)
{
    acc.lcon2_changed += s * t.lcon2_changed;
    acc.lcon2_background += s * t.lcon2_background;
    acc.lcon2 += s * t.lcon2;
    acc.lcon3 += s * t.lcon3;
    acc.lcon4 += s * t.lcon4;
    acc.lcon4_generator += s * t.lcon4_generator;
    acc.lcon5 += s * t.lcon5;
    acc.lcon += s * t.lcon;
    acc.generator += s * t.generator;
}

inline void accumulate(LossReport& acc, const LossReport& r, double s)
{
    acc.weights = r.weights;
    acc.lcon1 += s * r.lcon1;
    accumulate(acc.real, r.real, s);
    accumulate(acc.augmented, r.augmented, s);
    acc.lcon += s * r.lcon;
    acc.total += s * r.total;
    acc.generator_total += s * r.generator_total;
}

inline bool finite(const LossReport& r)
{
    return std::isfinite(r.total) && std::isfinite(r.generator_total) && std::isfinite(r.lcon1);
}

inline void dump_batch(const std::string& dir, const std::vector<StepItem>& items)
{
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string p = dir + "/item" + std::to_string(i);
        save_image(items[i].pair.first, p + "_t1.png");
        save_image(items[i].pair.second, p + "_t2.png");
        save_image(items[i].augmented.first, p + "_aug_t1.png");
        save_image(items[i].augmented.second, p + "_aug_t2.png");
        save_image(items[i].background.first, p + "_bg_t1.png");
        save_image(items[i].background.second, p + "_bg_t2.png");
    }
}

} // namespace detail

/// One iteration of the training loop on a batch: predict C, augment with
/// BGMix, draw a background pair, build the primed pairs for both branches,
/// evaluate the loss, update the detector with momentum SGD on central
/// finite-difference gradients, then take one ascent step per discriminator.
inline StepResult train_step(TrainerState& st, std::span<const ImagePair> batch, std::span<const BackgroundPair> bgset,
                             const TrainConfig& cfg, Rng& rng)
{
    if (bgset.empty()) throw TrainError("background set is empty");
    if (batch.empty()) throw TrainError("empty batch");
    const auto& f = *st.features;
    const std::vector<double> theta = st.detector.parameters();
    const double inv = 1.0 / static_cast<double>(batch.size());

    StepResult res;
    res.gradient.assign(theta.size(), 0.0);
    std::vector<ImagePair> d1_real, d1_fake, d2_real, d2_fake;
    ToyDetector scratch = st.detector;

    for (const ImagePair& pair : batch) {
        const DifferencePlanes diff_pair(pair);
        const ChangeMask mask = st.detector.predict(diff_pair);
        res.mask_area_rate += inv * mask.area_rate();

        StepItem item{pair, pair, {}, std::nullopt};
        if (cfg.augment) {
            MixPlan plan = sample_plan(cfg.mix, rng, pair.width(), bgset.size());
            item.augmented = apply_plan(plan, pair, bgset, mask, cfg.mix.cotransform_mask);
            item.plan = std::move(plan);
        }
        item.background = bgset[rng.index(bgset.size())];

        const LossContext ctx(item.pair, item.augmented, item.background, f);
        const DifferencePlanes diff_bg(item.background);
        std::optional<DifferencePlanes> aug_planes;
        if (cfg.augment) aug_planes.emplace(item.augmented);
        const DifferencePlanes& diff_aug = aug_planes ? *aug_planes : diff_pair;
        const LossMasks masks{mask, st.detector.predict(diff_aug), st.detector.predict(diff_bg)};
        const LossReport report = ctx.evaluate(masks, st.d1, st.d2, cfg.weights);
        res.items.push_back(item);
        if (!detail::finite(report)) {
            detail::dump_batch(cfg.dump_dir, res.items);
            throw TrainError("non-finite loss (total=" + std::to_string(report.total) + ")" +
                             (cfg.dump_dir.empty() ? std::string() : "; batch written to " + cfg.dump_dir));
        }
        detail::accumulate(res.report, report, inv);

        if (cfg.learning_rate > 0.0) {
            auto objective = [&](const std::vector<double>& p) {
                return item_objective(ctx, diff_pair, diff_aug, diff_bg, scratch, p, st.d1, st.d2, cfg.weights);
            };
            const auto g = central_difference_gradient(objective, theta, cfg.fd_step);
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!std::isfinite(g[k])) {
                    detail::dump_batch(cfg.dump_dir, res.items);
                    throw TrainError("non-finite gradient for " + st.detector.parameter_name(k));
                }
                res.gradient[k] += inv * g[k];
            }
        }

        const auto s_real = synthesize(item.pair, item.background, masks.real);
        const auto s_aug = synthesize(item.augmented, item.background, masks.augmented);
        d1_real.push_back(item.pair);
        d1_real.push_back(item.augmented);
        d1_fake.push_back(s_real.changed_prime);
        d1_fake.push_back(s_aug.changed_prime);
        d2_real.push_back(item.background);
        d2_fake.push_back(s_real.background_prime);
        d2_fake.push_back(s_aug.background_prime);
    }

    // momentum SGD: v <- mu v + g ; theta <- theta - lr v
    auto& p = st.detector.parameters();
    for (std::size_t k = 0; k < p.size(); ++k) {
        st.velocity[k] = cfg.momentum * st.velocity[k] + res.gradient[k];
        p[k] -= cfg.learning_rate * st.velocity[k];
    }
    if (cfg.disc_lr() > 0.0) {
        st.d1.ascend(d1_real, d1_fake, cfg.disc_lr());
        st.d2.ascend(d2_real, d2_fake, cfg.disc_lr());
    }
    return res;
}

struct EvalRecord {
    int iter = 0;
    MetricsSummary metrics;
};

struct IterRecord {
    int iter = 0;
    LossReport report;
    double mask_area_rate = 0.0;
};

struct TrainLog {
    std::vector<IterRecord> iterations;
    std::vector<EvalRecord> evaluations;
    std::vector<double> final_parameters;
};

struct TrainResult {
    ToyDetector detector;
    TrainLog log;
};

inline MetricsSummary evaluate_detector(const ToyDetector& det, std::span<const Sample> samples)
{
    std::vector<ChangeMask> preds, gts;
    for (const Sample& s : samples) {
        preds.push_back(det.predict(s.pair));
        gts.push_back(s.truth);
    }
    return summarize(preds, gts);
}

using IterCallback = std::function<void(const IterRecord&, const std::optional<EvalRecord>&)>;

/// Runs max_iters steps, each on a batch drawn uniformly from `train`.
/// Evaluates on `test` every eval_every iterations and after the last one.
inline TrainResult train(std::span<const Sample> train_set, std::span<const BackgroundPair> bgset,
                         std::span<const Sample> test_set, const TrainConfig& cfg, const IterCallback& on_iter = {},
                         std::shared_ptr<const FeatureExtractor> features = nullptr)
{
    cfg.validate();
    if (train_set.empty()) throw TrainError("training set is empty");
    if (bgset.empty()) throw TrainError("background set is empty");
    if (!features) features = std::make_shared<DefaultFeatures>();
    TrainerState st(train_set.front().pair.channels(), features);
    Rng rng(cfg.seed);
    TrainResult out{st.detector, {}};

    for (int it = 1; it <= cfg.max_iters; ++it) {
        std::vector<ImagePair> batch;
        for (int b = 0; b < cfg.batch_size; ++b) batch.push_back(train_set[rng.index(train_set.size())].pair);
        StepResult step = train_step(st, batch, bgset, cfg, rng);
        IterRecord rec{it, step.report, step.mask_area_rate};
        std::optional<EvalRecord> ev;
        const bool last = it == cfg.max_iters;
        if (!test_set.empty() && ((cfg.eval_every > 0 && it % cfg.eval_every == 0) || last)) {
            ev = EvalRecord{it, evaluate_detector(st.detector, test_set)};
            out.log.evaluations.push_back(*ev);
        }
        if (on_iter) on_iter(rec, ev);
        out.log.iterations.push_back(std::move(rec));
    }
    out.detector = st.detector;
    out.log.final_parameters = st.detector.parameters();
    return out;
}

} // namespace bgmix
