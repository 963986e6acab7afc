#pragma once

#include <nlohmann/json.hpp>

#include "augment.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "mix.hpp"
#include "trainer.hpp"

namespace bgmix {

using json = nlohmann::json;

inline json to_json(const LossWeights& w)
{
    return {{"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"lambda3", w.lambda3}, {"lambda4", w.lambda4}, {"lambda5", w.lambda5}};
}

inline json to_json(const BranchTerms& t)
{
    return {{"lcon2", t.lcon2},
            {"lcon2_changed", t.lcon2_changed},
            {"lcon2_background", t.lcon2_background},
            {"lcon3", t.lcon3},
            {"lcon4", t.lcon4},
            {"lcon4_generator", t.lcon4_generator},
            {"lcon5", t.lcon5},
            {"lcon", t.lcon},
            {"generator", t.generator}};
}

inline json to_json(const LossReport& r)
{
    return {{"lcon1", r.lcon1},
            {"real", to_json(r.real)},
            {"augmented", to_json(r.augmented)},
            {"lcon", r.lcon},
            {"total", r.total},
            {"generator_total", r.generator_total},
            {"weights", to_json(r.weights)}};
}

inline json to_json(const MetricsReport& m)
{
    return {{"f1", m.f1}, {"oa", m.oa}, {"iou", m.iou}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
}

inline json to_json(const MetricsSummary& s)
{
    return {{"mean_f1", s.mean_f1},         {"mean_oa", s.mean_oa}, {"mean_iou", s.mean_iou},
            {"mean_area_rate", s.mean_area_rate}, {"items", s.items},   {"pooled", to_json(s.pooled)}};
}

inline json to_json(const AugOp& op)
{
    json j{{"kind", std::string(to_string(op.kind))}};
    switch (op.kind) {
    case AugKind::Rotate: j["degrees"] = op.degrees; break;
    case AugKind::Shear: j["shear"] = op.shear; break;
    case AugKind::Translate:
        j["dx"] = op.dx;
        j["dy"] = op.dy;
        break;
    case AugKind::Posterize: j["bits"] = op.bits; break;
    case AugKind::Solarize: j["threshold"] = op.threshold; break;
    default: break;
    }
    return j;
}

inline AugOp aug_op_from_json(const json& j)
{
    const auto kind = parse_aug_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error("unknown op kind in plan: " + j.at("kind").get<std::string>());
    AugOp op{*kind};
    op.degrees = j.value("degrees", 0.0);
    op.shear = j.value("shear", 0.0);
    op.dx = j.value("dx", 0);
    op.dy = j.value("dy", 0);
    op.bits = j.value("bits", 8);
    op.threshold = j.value("threshold", 1.0);
    op.validate();
    return op;
}

inline json to_json(const MixPlan& p)
{
    json chains = json::array();
    for (const auto& c : p.chains) {
        json ops = json::array();
        for (const auto& op : c.ops) ops.push_back(to_json(op));
        chains.push_back(ops);
    }
    return {{"path_weights", p.path_weights},
            {"chains", chains},
            {"background_indices", p.background_indices},
            {"blend_weight", p.blend_weight},
            {"rng_seed", p.rng_seed}};
}

inline MixPlan mix_plan_from_json(const json& j)
{
    MixPlan p;
    p.path_weights = j.at("path_weights").get<std::vector<double>>();
    for (const auto& c : j.at("chains")) {
        OpChain chain;
        for (const auto& op : c) chain.ops.push_back(aug_op_from_json(op));
        chain.validate();
        p.chains.push_back(std::move(chain));
    }
    p.background_indices = j.at("background_indices").get<std::vector<std::size_t>>();
    p.blend_weight = j.at("blend_weight").get<double>();
    p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (p.path_weights.size() != p.chains.size() || p.background_indices.size() != p.chains.size())
        throw Error("plan: per-path arrays differ in length");
    return p;
}

/// One JSON-lines record per training iteration; evaluation metrics are
/// attached to the iterations where they were computed.
inline json to_json(const IterRecord& r, const std::optional<EvalRecord>& ev = std::nullopt)
{
    json j{{"iter", r.iter}, {"mask_area_rate", r.mask_area_rate}, {"loss", to_json(r.report)}};
    if (ev) j["eval"] = to_json(ev->metrics);
    return j;
}

} // namespace bgmix
