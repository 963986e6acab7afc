#pragma once

#include <functional>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "serialize.hpp"
#include "trainer.hpp"

namespace bgmix {

/// One training run of a sweep, labelled by what was varied.
struct SweepRow {
    std::string label;
    MetricsSummary metrics;
    double delta_iou = 0.0; // against the sweep's reference row
    std::string note;
};

struct SweepReport {
    std::string study;
    std::vector<SweepRow> rows;

    json to_json() const
    {
        json rows_json = json::array();
        for (const auto& r : rows) {
            json j{{"label", r.label}, {"metrics", bgmix::to_json(r.metrics)}, {"delta_iou", r.delta_iou}};
            if (!r.note.empty()) j["note"] = r.note;
            rows_json.push_back(j);
        }
        return {{"study", study}, {"rows", rows_json}};
    }

    std::string to_text() const
    {
        std::ostringstream os;
        os << study << "\n";
        os << std::left << std::setw(16) << "run" << std::setw(10) << "iou" << std::setw(10) << "f1" << std::setw(10) << "oa"
           << std::setw(12) << "delta_iou" << "note\n";
        os << std::fixed << std::setprecision(4);
        for (const auto& r : rows)
            os << std::setw(16) << r.label << std::setw(10) << r.metrics.mean_iou << std::setw(10) << r.metrics.mean_f1
               << std::setw(10) << r.metrics.mean_oa << std::setw(12) << r.delta_iou << r.note << "\n";
        return os.str();
    }
};

using SweepProgress = std::function<void(const std::string& label)>;

/// Test metrics after training; with zero iterations that is the initialization.
inline MetricsSummary final_metrics(std::span<const Sample> train_set, std::span<const BackgroundPair> bgset,
                                    std::span<const Sample> test_set, const TrainConfig& cfg)
{
    const TrainResult r = train(train_set, bgset, test_set, cfg);
    if (!r.log.evaluations.empty()) return r.log.evaluations.back().metrics;
    return evaluate_detector(r.detector, test_set);
}

/// Trains once with the full op set, then once per operation with that
/// operation removed. The bg_aware row carries a note: it is the removal the
/// original ablation found most damaging, so it is the row to look at first.
inline SweepReport run_op_ablation(std::span<const Sample> train_set, std::span<const BackgroundPair> bgset,
                                   std::span<const Sample> test_set, const TrainConfig& cfg,
                                   const SweepProgress& progress = {})
{
    if (test_set.empty()) throw Error("operation ablation needs a test set");
    SweepReport rep;
    rep.study = "operation ablation";
    if (progress) progress("full");
    const auto base = final_metrics(train_set, bgset, test_set, cfg);
    rep.rows.push_back({"full", base, 0.0, "reference"});
    for (AugKind k : kAllAugKinds) {
        TrainConfig c = cfg;
        c.mix.drop_op(k);
        const std::string label = "-" + std::string(to_string(k));
        if (progress) progress(label);
        if (c.mix.op_set.size() == cfg.mix.op_set.size()) {
            rep.rows.push_back({label, base, 0.0, "not in the op set; identical to full"});
            continue;
        }
        const auto m = final_metrics(train_set, bgset, test_set, c);
        std::string note = k == AugKind::BgAware ? "most impactful removal in the original ablation" : "";
        rep.rows.push_back({label, m, m.mean_iou - base.mean_iou, note});
    }
    return rep;
}

/// Trains once per path count K in [k_min, k_max].
inline SweepReport run_path_sweep(std::span<const Sample> train_set, std::span<const BackgroundPair> bgset,
                                  std::span<const Sample> test_set, const TrainConfig& cfg, int k_min = 2, int k_max = 6,
                                  const SweepProgress& progress = {})
{
    if (test_set.empty()) throw Error("path sweep needs a test set");
    SweepReport rep;
    rep.study = "path number";
    double ref = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        TrainConfig c = cfg;
        c.mix.k_paths = k;
        const std::string label = "K=" + std::to_string(k);
        if (progress) progress(label);
        const auto m = final_metrics(train_set, bgset, test_set, c);
        if (k == k_min) ref = m.mean_iou;
        rep.rows.push_back({label, m, m.mean_iou - ref, k == 4 ? "default" : ""});
    }
    return rep;
}

} // namespace bgmix
