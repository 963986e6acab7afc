#pragma once

#include <cstdint>
#include <span>

#include "image.hpp"

namespace bgmix {

struct MetricsReport {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double f1 = 0.0;
    double oa = 0.0;
    double iou = 0.0;
};

/// Metrics from raw confusion counts. When neither prediction nor ground truth
/// has any positive pixel, f1 and iou are defined as 1.
inline MetricsReport metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn)
{
    MetricsReport r{tp, fp, fn, tn};
    const double total = static_cast<double>(tp + fp + fn + tn);
    r.oa = total > 0 ? static_cast<double>(tp + tn) / total : 1.0;
    if (tp + fp + fn == 0) {
        r.f1 = 1.0;
        r.iou = 1.0;
    } else {
        r.f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
        r.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    }
    return r;
}

/// Both masks are binarized at their own thresholds.
inline MetricsReport evaluate(const ChangeMask& pred, const ChangeMask& gt)
{
    if (pred.height() != gt.height() || pred.width() != gt.width()) throw ShapeError("evaluate: mask shapes differ");
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < pred.pixels(); ++i) {
        const bool p = pred.binary_at(i);
        const bool g = gt.binary_at(i);
        tp += p && g;
        fp += p && !g;
        fn += !p && g;
        tn += !p && !g;
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

/// Per-item average of f1/oa/iou plus summed counts.
struct MetricsSummary {
    double mean_f1 = 0.0;
    double mean_oa = 0.0;
    double mean_iou = 0.0;
    double mean_area_rate = 0.0; // predicted positive fraction
    MetricsReport pooled;        // metrics of the summed confusion counts
    std::size_t items = 0;
};

inline MetricsSummary summarize(std::span<const ChangeMask> preds, std::span<const ChangeMask> gts)
{
    if (preds.size() != gts.size()) throw Error("summarize: prediction and ground-truth counts differ");
    MetricsSummary s;
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto r = evaluate(preds[i], gts[i]);
        s.mean_f1 += r.f1;
        s.mean_oa += r.oa;
        s.mean_iou += r.iou;
        s.mean_area_rate += preds[i].area_rate();
        tp += r.tp;
        fp += r.fp;
        fn += r.fn;
        tn += r.tn;
    }
    s.items = preds.size();
    if (s.items) {
        const double n = static_cast<double>(s.items);
        s.mean_f1 /= n;
        s.mean_oa /= n;
        s.mean_iou /= n;
        s.mean_area_rate /= n;
    }
    s.pooled = metrics_from_counts(tp, fp, fn, tn);
    return s;
}

} // namespace bgmix
