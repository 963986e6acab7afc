// Acceptance suite: one PASS/FAIL line per criterion.
//
//   bgmix_acceptance [criterion ...] [--expect-fail N,M] [--seeds K]
//
// With no criterion numbers every criterion runs. A criterion listed in
// --expect-fail is reported as XFAIL instead of failing the process; if it
// passes anyway it is reported as XPASS.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../support/oracles.hpp"
#include "../oracles/ssim_cases.hpp"

#ifndef BGMIX_CLI_PATH
#error "BGMIX_CLI_PATH must point at the bgmix executable"
#endif

namespace fs = std::filesystem;
using namespace bgmix;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4)
{
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(BGMIX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("bgmix_acceptance_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Relative path -> bytes for every regular file below `root`.
std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ------------------------------------------------------------------ 1

Outcome compositing_oracle()
{
    const auto t0 = Clock::now();
    Rng rng(101);
    double err = 0.0, comp = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int ch = i % 2 ? 3 : 1;
        const ImagePair pair(oracle::random_image(rng, 4, 4, ch), oracle::random_image(rng, 4, 4, ch));
        const BackgroundPair bg(oracle::random_image(rng, 4, 4, ch), oracle::random_image(rng, 4, 4, ch));
        const ChangeMask m = oracle::random_mask(rng, 4, 4, i % 3 == 0);
        err = std::max(err, max_abs_difference(rep(pair.first, bg.first, m), oracle::rep(pair.first, bg.first, m)));
        const auto s = synthesize(pair, bg, m);
        err = std::max(err, max_abs_difference(s.changed_prime.first, oracle::rep(pair.first, bg.first, m)));
        err = std::max(err, max_abs_difference(s.changed_prime.second, oracle::rep(pair.second, bg.second, m)));
        err = std::max(err, max_abs_difference(s.background_prime.first, oracle::rep(bg.first, pair.first, m)));
        err = std::max(err, max_abs_difference(s.background_prime.second, oracle::rep(bg.second, pair.second, m)));
        const Image a = rep(pair.first, bg.first, m);
        const Image b = rep(bg.first, pair.first, m);
        for (std::size_t k = 0; k < a.size(); ++k)
            comp = std::max(comp, std::abs(a.values()[k] + b.values()[k] - pair.first.values()[k] - bg.first.values()[k]));
    }
    const double secs = seconds_since(t0);
    return {err <= 1e-6 && comp <= 1e-6 && secs < 1.0,
            "max oracle error " + fmt(err) + ", complementarity error " + fmt(comp) + ", " + fmt(secs, 3) + " s"};
}

// ------------------------------------------------------------------ 2

Outcome bgmix_reference()
{
    const auto t0 = Clock::now();
    Rng rng(202);
    double err = 0.0;
    bool library_deterministic = true;
    MixConfig cfg;
    cfg.k_paths = 2;
    cfg.op_set = {AugKind::BgAware, AugKind::Translate, AugKind::Solarize, AugKind::Posterize};
    for (int i = 0; i < 50; ++i) {
        const int ch = i % 2 ? 3 : 1;
        const ImagePair pair(oracle::random_image(rng, 4, 4, ch), oracle::random_image(rng, 4, 4, ch));
        std::vector<BackgroundPair> bgs;
        for (int b = 0; b < 3; ++b)
            bgs.emplace_back(oracle::random_image(rng, 4, 4, ch), oracle::random_image(rng, 4, 4, ch));
        const ChangeMask m = oracle::random_mask(rng, 4, 4, true);
        Rng r1(1000 + i), r2(1000 + i);
        const MixResult out = bgmix::bgmix(pair, bgs, m, cfg, r1);
        const ImagePair ref = oracle::mix(out.plan, pair, bgs, m);
        err = std::max({err, max_abs_difference(out.pair.first, ref.first), max_abs_difference(out.pair.second, ref.second)});
        const MixResult again = bgmix::bgmix(pair, bgs, m, cfg, r2);
        library_deterministic = library_deterministic && again.pair == out.pair && again.plan == out.plan;
    }

    // the same seed must reproduce the written dataset byte for byte
    const fs::path root = scratch_dir("c2");
    bool cli_ok = run_cli("prepare --synthetic --seed 3 --train-size 8 --test-size 2 --set bench_height=16 "
                          "--set bench_width=16 --out " + (root / "data").string()) == 0;
    std::map<std::string, std::string> trees[3];
    const char* seeds[3] = {"11", "11", "12"};
    for (int r = 0; r < 3 && cli_ok; ++r) {
        const fs::path run = root / ("run" + std::to_string(r));
        fs::create_directories(run);
        const std::string cmd = "augment --k-paths 2 --seed " + std::string(seeds[r]) + " --data " +
                                (root / "data" / "train").string() + " --out " + (run / "aug").string() +
                                " --workers " + (r == 1 ? "2" : "1");
        cli_ok = run_cli(cmd) == 0;
        if (cli_ok) {
            trees[r] = tree(run / "aug");
            trees[r].erase("config.txt"); // records the output path and worker count
        }
    }
    const bool identical = cli_ok && !trees[0].empty() && trees[0] == trees[1];
    const bool seed_matters = cli_ok && trees[0] != trees[2];
    fs::remove_all(root.parent_path());
    const double secs = seconds_since(t0);
    return {err <= 1e-6 && library_deterministic && identical && seed_matters && secs < 5.0,
            "max error vs unrolled reference " + fmt(err) + ", same-seed trees identical: " +
                (identical ? "yes" : "no") + ", different seed differs: " + (seed_matters ? "yes" : "no") + ", " +
                fmt(secs, 3) + " s"};
}

// ------------------------------------------------------------------ 3

Outcome loss_oracle()
{
    Rng rng(303);
    auto feat = [](const ImagePair& p) { return oracle::stub_descriptor(p); };
    const oracle::StubFeatures f;
    const oracle::StubDiscriminator d1(1.5, -0.7, 0.2), d2(-0.4, 0.9, -0.1);
    auto s1 = [&](const ImagePair& p) { return d1.score(p); };
    auto s2 = [&](const ImagePair& p) { return d2.score(p); };
    double err = 0.0, decomposition = 0.0;
    for (int i = 0; i < 6; ++i) {
        const int ch = i % 2 ? 3 : 1;
        const ImagePair pair(oracle::random_image(rng, 8, 8, ch), oracle::random_image(rng, 8, 8, ch));
        const ImagePair aug(oracle::random_image(rng, 8, 8, ch), oracle::random_image(rng, 8, 8, ch));
        const BackgroundPair bg(oracle::random_image(rng, 8, 8, ch), oracle::random_image(rng, 8, 8, ch));
        const LossMasks masks{oracle::random_mask(rng, 8, 8, false), oracle::random_mask(rng, 8, 8, false),
                              oracle::random_mask(rng, 8, 8, false)};
        const LossWeights w = i < 3 ? LossWeights::aicd() : LossWeights{0.7, 1.3, 2.0, 0.5, 0.25};
        const LossReport r = total_loss(pair, aug, bg, masks, f, d1, d2, w);
        const auto h = oracle::hand_loss(pair, aug, bg, masks.real, masks.augmented, masks.background, feat, s1, s2, w);
        err = std::max({err, std::abs(r.total - h.total), std::abs(r.generator_total - h.generator_total),
                        std::abs(r.lcon1 - h.l1), std::abs(r.real.lcon2 - h.real.l2), std::abs(r.real.lcon3 - h.real.l3),
                        std::abs(r.real.lcon4 - h.real.l4), std::abs(r.real.lcon5 - h.real.l5),
                        std::abs(r.augmented.lcon2 - h.aug.l2), std::abs(r.augmented.lcon3 - h.aug.l3),
                        std::abs(r.augmented.lcon4 - h.aug.l4)});
        decomposition = std::max(decomposition, r.decomposition_error());
    }
    const auto a = LossWeights::profile("aicd");
    const auto b = LossWeights::profile("bcd");
    const bool profiles = a && b && *a == LossWeights{1, 1, 5, 1, 0.01} && *b == LossWeights{1, 1, 3, 1, 0.01} &&
                          !LossWeights::profile("nope");
    return {err <= 1e-7 && decomposition <= 1e-9 && profiles,
            "max error vs hand-unrolled " + fmt(err) + ", decomposition " + fmt(decomposition) +
                ", profiles by name: " + (profiles ? "ok" : "wrong")};
}

// ------------------------------------------------------------------ 4

Outcome ssim_reference()
{
    double err = 0.0;
    bool self_exact = true;
    for (const auto& c : ssim_cases::all()) {
        auto to_image = [&](const std::vector<int>& levels) {
            std::vector<double> v;
            for (int l : levels) v.push_back(l / 255.0);
            return Image(16, 16, c.channels, v);
        };
        const Image a = to_image(c.a), b = to_image(c.b);
        err = std::max(err, std::abs(ssim(a, b) - c.expected));
        self_exact = self_exact && ssim(a, a) == 1.0 && ssim(b, b) == 1.0;
    }
    return {err <= 1e-6 && self_exact && ssim_cases::all().size() == 10,
            "max error vs reference " + fmt(err) + ", ssim(x,x)==1 exactly: " + (self_exact ? "yes" : "no")};
}

// ------------------------------------------------------------------ 5

Outcome metrics_identities()
{
    Rng rng(505);
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto tp = static_cast<std::uint64_t>(rng.uniform_int(0, 500));
        const auto fp = static_cast<std::uint64_t>(rng.uniform_int(0, 500));
        const auto fn = static_cast<std::uint64_t>(rng.uniform_int(i == 0 ? 1 : 0, 500));
        const auto tn = static_cast<std::uint64_t>(rng.uniform_int(0, 5000));
        const auto m = metrics_from_counts(tp, fp, fn, tn);
        err = std::max(err, std::abs(m.iou - m.f1 / (2.0 - m.f1)));
    }
    // 4x4 prediction/truth with tp=2, fp=1, fn=1, tn=12
    ChangeMask pred(4, 4, 0.0), gt(4, 4, 0.0);
    pred(0, 0) = pred(0, 1) = pred(1, 0) = 1.0;
    gt(0, 0) = gt(0, 1) = gt(2, 2) = 1.0;
    const auto h = evaluate(pred, gt);
    const bool hand = h.tp == 2 && h.fp == 1 && h.fn == 1 && h.tn == 12 && h.f1 == 2.0 / 3.0 && h.iou == 0.5 &&
                      h.oa == 0.875;
    return {err <= 1e-12 && hand, "max |iou - f1/(2-f1)| " + fmt(err) + ", hand case f1=" + fmt(h.f1) +
                                      " iou=" + fmt(h.iou) + " oa=" + fmt(h.oa)};
}

// ------------------------------------------------------------------ 6

Outcome gradient_check()
{
    BenchmarkSpec bs;
    bs.train_size = 8;
    bs.test_size = 0;
    bs.height = bs.width = 24;
    bs.channels = 1;
    const Benchmark bm = make_benchmark(bs);
    const auto bgset = background_set(bm.train);
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.learning_rate = 0.01;
    TrainerState st(1);
    Rng rng(606);
    int checked = 0, agreed = 0;
    double worst = 0.0;
    for (int it = 0; it < 3; ++it) {
        std::vector<ImagePair> batch{bm.train[2 * it].pair, bm.train[2 * it + 1].pair};
        const TrainerState before = st;
        const StepResult step = train_step(st, batch, bgset, cfg, rng);
        const auto theta = before.detector.parameters();
        // mean over the batch of the generator objective, masks re-predicted from scratch
        auto objective = [&](const std::vector<double>& p) {
            ToyDetector det = before.detector;
            det.set_parameters(p);
            double s = 0.0;
            for (const StepItem& item : step.items)
                s += total_loss(item.pair, item.augmented, item.background, det, *before.features, before.d1, before.d2,
                                cfg.weights)
                         .generator_total;
            return s / static_cast<double>(step.items.size());
        };
        auto fd = [&](std::size_t k, double h) {
            auto p = theta;
            p[k] = theta[k] + h;
            const double up = objective(p);
            p[k] = theta[k] - h;
            return (up - objective(p)) / (2.0 * h);
        };
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double h = fd_step_for(theta[k], cfg.fd_step);
            const double g1 = fd(k, h), g2 = fd(k, h / 2), g4 = fd(k, h / 4);
            const double direct = std::abs(step.gradient[k] - g1);
            const double halved = std::abs(g1 - g2);
            const double ratio = std::abs(g2 - g4) > 0 ? (g1 - g2) / (g2 - g4) : 0.0;
            const bool ok = direct <= 1e-6 && (halved <= 1e-6 || (ratio >= 3.5 && ratio <= 4.5));
            worst = std::max(worst, std::max(direct, halved));
            ++checked;
            agreed += ok;
        }
    }
    return {checked >= 30 && agreed == checked,
            std::to_string(agreed) + "/" + std::to_string(checked) + " parameter-iterations agree, worst |diff| " +
                fmt(worst)};
}

// ------------------------------------------------------------------ 7-9 shared setup

struct Desk {
    Benchmark bm;
    std::vector<BackgroundPair> bgset;
    double init_iou = 0.0;
};

const Desk& desk()
{
    static const Desk d = [] {
        Desk d;
        BenchmarkSpec bs; // 200 train / 50 test, 64x64, three regimes
        bs.channels = 1;
        d.bm = make_benchmark(bs);
        d.bgset = background_set(d.bm.train);
        d.init_iou = evaluate_detector(ToyDetector(1), d.bm.test).mean_iou;
        return d;
    }();
    return d;
}

TrainConfig desk_config(std::uint64_t seed)
{
    TrainConfig cfg;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.01;
    cfg.max_iters = 2000;
    cfg.seed = seed;
    return cfg;
}

struct RunResult {
    MetricsSummary metrics;
    double seconds = 0.0;
};

std::map<std::string, RunResult>& run_cache()
{
    static std::map<std::string, RunResult> cache;
    return cache;
}

RunResult desk_run(const std::string& key, const TrainConfig& cfg)
{
    auto& cache = run_cache();
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const auto t0 = Clock::now();
    const auto& d = desk();
    RunResult r{final_metrics(d.bm.train, d.bgset, d.bm.test, cfg), 0.0};
    r.seconds = seconds_since(t0);
    std::cerr << "  run " << key << ": iou " << r.metrics.mean_iou << ", area " << r.metrics.mean_area_rate << ", "
              << r.seconds << " s\n";
    cache[key] = r;
    return r;
}

int g_seeds = 3;

Outcome training_benefit()
{
    std::vector<double> aug, noaug;
    double secs = 0.0;
    for (int s = 1; s <= g_seeds; ++s) {
        const auto a = desk_run("bgmix/seed" + std::to_string(s), desk_config(s));
        TrainConfig off = desk_config(s);
        off.augment = false;
        const auto n = desk_run("noaug/seed" + std::to_string(s), off);
        aug.push_back(a.metrics.mean_iou);
        noaug.push_back(n.metrics.mean_iou);
        secs += a.seconds + n.seconds;
    }
    const double ma = median(aug), mn = median(noaug), init = desk().init_iou;
    return {ma - init >= 0.05 && ma - mn >= 0.05 && secs < 600.0,
            "median IoU bgmix " + fmt(ma) + ", no-aug " + fmt(mn) + ", init " + fmt(init) + "; margins " +
                fmt(ma - init) + " / " + fmt(ma - mn) + ", " + fmt(secs, 4) + " s"};
}

Outcome ablation_collapse()
{
    std::vector<double> iou, area;
    for (int s = 1; s <= g_seeds; ++s) {
        TrainConfig cfg = desk_config(s);
        cfg.weights.lambda2 = 0.0;
        const auto r = desk_run("no-lcon2/seed" + std::to_string(s), cfg);
        iou.push_back(r.metrics.mean_iou);
        area.push_back(r.metrics.mean_area_rate);
    }
    const double mi = median(iou), ma = median(area);
    return {mi < 0.05 || ma < 0.01, "median IoU " + fmt(mi) + ", median mask area rate " + fmt(ma)};
}

Outcome path_knob()
{
    const bool default_k = MixConfig{}.k_paths == 4 && RunConfig{}.train.mix.k_paths == 4;
    std::string detail;
    bool all_ok = true;
    for (int k = 2; k <= 6; ++k) {
        TrainConfig cfg = desk_config(1);
        cfg.mix.k_paths = k;
        try {
            // K = 4 is the criterion-7 configuration for seed 1
            const auto r = desk_run(k == 4 ? "bgmix/seed1" : "K" + std::to_string(k) + "/seed1", cfg);
            detail += "K=" + std::to_string(k) + " iou " + fmt(r.metrics.mean_iou) + "; ";
        } catch (const std::exception& e) {
            all_ok = false;
            detail += "K=" + std::to_string(k) + " failed: " + e.what() + "; ";
        }
    }
    return {all_ok && default_k, detail + "default K=" + std::to_string(MixConfig{}.k_paths)};
}

// ------------------------------------------------------------------ 10

Outcome op_ablation_harness()
{
    const fs::path root = scratch_dir("c10");
    const std::string common = " --synthetic --channels 1 --batch-size 1 --lr 0.01 --seed 1 ";
    const int rc = run_cli("ablate-ops" + common + "--iters 100 --out " + (root / "ablate").string());
    bool ok = rc == 0;
    std::string detail = "exit " + std::to_string(rc);
    if (ok) {
        const auto j = nlohmann::json::parse(slurp(root / "ablate" / "op_ablation.json"));
        std::set<std::string> labels;
        bool flagged = false;
        for (const auto& row : j["rows"]) {
            labels.insert(row["label"].get<std::string>());
            if (row["label"] == "-bg_aware")
                flagged = row.contains("note") && row["note"].get<std::string>().find("most impactful") != std::string::npos;
        }
        std::size_t dropped = 0;
        for (AugKind k : kAllAugKinds) dropped += labels.count("-" + std::string(to_string(k)));
        ok = dropped == 8 && labels.count("full") && flagged && fs::exists(root / "ablate" / "op_ablation.txt");
        detail += ", " + std::to_string(dropped) + "/8 drop rows, bg_aware flagged: " + (flagged ? "yes" : "no");
    }
    // a single --drop-op run for every kind must also complete
    int single_ok = 0;
    for (AugKind k : kAllAugKinds)
        single_ok += run_cli("train-toy" + common + "--iters 5 --drop-op " + std::string(to_string(k)) + " --out " +
                             (root / ("drop_" + std::string(to_string(k)))).string()) == 0;
    ok = ok && single_ok == 8;
    detail += ", single --drop-op runs ok: " + std::to_string(single_ok) + "/8";
    fs::remove_all(root.parent_path());
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"compositing oracle", compositing_oracle},
        {"BGMix unrolled reference and determinism", bgmix_reference},
        {"loss formula oracle", loss_oracle},
        {"SSIM reference", ssim_reference},
        {"metrics identities", metrics_identities},
        {"finite-difference gradient check", gradient_check},
        {"directional training benefit", training_benefit},
        {"ablation collapse without lcon2", ablation_collapse},
        {"path-number knob", path_knob},
        {"operation-ablation harness", op_ablation_harness},
    };

    std::set<int> selected, expected_fail;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string item;
            while (std::getline(ss, item, ',')) expected_fail.insert(std::stoi(item));
        } else if (a == "--seeds" && i + 1 < argc) {
            g_seeds = std::stoi(argv[++i]);
        } else {
            selected.insert(std::stoi(a));
        }
    }

    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool xfail = expected_fail.count(id) > 0;
        const char* tag = o.pass ? (xfail ? "XPASS" : "PASS") : (xfail ? "XFAIL" : "FAIL");
        if (!o.pass && !xfail) ++unexpected;
        std::cout << tag << " criterion " << id << " (" << criteria[i].first << "): " << o.detail << std::endl;
    }
    return unexpected == 0 ? 0 : 1;
}
