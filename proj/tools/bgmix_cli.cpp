// bgmix command line: prepare / augment / train-toy / eval / losses / preview,
// plus the op and path-number ablation sweeps.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <bgmix/bgmix.hpp>

namespace fs = std::filesystem;
using namespace bgmix;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Flags that map one-to-one onto config keys. Collected as strings and applied
// after the config file, so flags win.
struct Overrides {
    std::map<std::string, std::string> values;
    std::vector<std::string> sets; // raw key=value from --set

    void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }
};

struct Common {
    std::string config_file;
    Overrides ov;
};

void add_common(CLI::App* app, Common& c, bool with_out = true)
{
    app->add_option("--config", c.config_file, "flat key = value config file (flags override it)");
    c.ov.bind(app, "--seed", "seed", "seed for all randomness (default: $BGMIX_SEED or 0)");
    if (with_out) c.ov.bind(app, "--out", "out", "output directory");
    app->add_option("--set", c.ov.sets, "extra config override key=value (repeatable)");
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg;
    cfg.seed = RunConfig::default_seed();
    if (!c.config_file.empty()) cfg.load_file(c.config_file);
    for (const auto& [k, v] : c.ov.values) cfg.set(k, v);
    for (const auto& kv : c.ov.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(RunConfig::trim(kv.substr(0, eq)), RunConfig::trim(kv.substr(eq + 1)));
    }
    cfg.weights(); // reject unknown profiles early
    cfg.train.mix.validate();
    return cfg;
}

void require(const std::string& value, const std::string& what)
{
    if (value.empty()) throw ConfigError("missing required option " + what);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

void echo_config(RunConfig& cfg, const std::string& dir)
{
    fs::create_directories(dir);
    cfg.save_file(dir + "/config.txt");
}

std::vector<BackgroundPair> backgrounds_of(const std::vector<Sample>& samples)
{
    std::vector<BackgroundPair> out;
    for (const Sample& s : samples)
        if (!s.changed) out.emplace_back(s.pair);
    return out;
}

/// Background set: an explicit directory when given, else the change-free
/// pairs of the training data. Shapes are fitted to `h` x `w`.
std::vector<BackgroundPair> load_backgrounds(const RunConfig& cfg, const std::vector<Sample>& data, int h, int w)
{
    std::vector<BackgroundPair> bg;
    if (!cfg.backgrounds.empty()) {
        for (const Sample& s : load_dataset(cfg.backgrounds).samples) bg.emplace_back(s.pair);
    } else {
        bg = backgrounds_of(data);
    }
    if (bg.empty()) throw Error("no background pairs (set --backgrounds or include change-free pairs)");
    for (auto& b : bg) b = fit_to_shape(b, h, w);
    return bg;
}

std::shared_ptr<const FeatureExtractor> make_features(const RunConfig& cfg)
{
    if (cfg.features.empty()) return std::make_shared<DefaultFeatures>();
    return std::make_shared<FileFeatures>(cfg.features);
}

// ---------------------------------------------------------------- prepare

int cmd_prepare(Common& c, bool synthetic, const std::string& from)
{
    RunConfig cfg = resolve(c);
    require(cfg.out, "--out");
    if (synthetic == !from.empty()) throw ConfigError("prepare needs exactly one of --synthetic or --from");
    if (synthetic) {
        BenchmarkSpec spec = cfg.bench;
        spec.seed = cfg.seed;
        const Benchmark bm = make_benchmark(spec);
        save_dataset(cfg.out + "/train", bm.train);
        save_dataset(cfg.out + "/test", bm.test);
        std::cout << "wrote " << bm.train.size() << " training and " << bm.test.size() << " test pairs to " << cfg.out << "\n";
    } else {
        const auto src = load_dataset(from);
        if (!src.has_masks) throw Error("prepare --from needs masks/<id>.png for every pair");
        Rng rng(cfg.seed);
        const auto out = prepare_from_source(src.samples, cfg.tiles, cfg.enrich, rng);
        save_dataset(cfg.out, out);
        std::cout << "wrote " << out.size() << " pairs to " << cfg.out << "\n";
    }
    echo_config(cfg, cfg.out);
    return 0;
}

// ---------------------------------------------------------------- augment

std::pair<int, int> parse_k_range(const std::string& s)
{
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        const int k = static_cast<int>(RunConfig::parse_int(s, "--k-paths"));
        return {k, k};
    }
    return {static_cast<int>(RunConfig::parse_int(s.substr(0, dots), "--k-paths")),
            static_cast<int>(RunConfig::parse_int(s.substr(dots + 2), "--k-paths"))};
}

void augment_into(RunConfig cfg, const std::vector<Sample>& data, const std::vector<ChangeMask>& masks,
                  const std::vector<BackgroundPair>& bgset, const std::string& dir)
{
    fs::create_directories(dir + "/pairs");
    std::vector<json> plans(data.size());
    std::vector<std::string> errors(data.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < data.size(); i = next++) {
            try {
                // per-item seed keeps the output independent of the worker count
                const MixPlan plan = sample_plan(cfg.train.mix, cfg.seed + i, data[i].pair.width(), bgset.size());
                const ImagePair aug = apply_plan(plan, data[i].pair, bgset, masks[i], cfg.train.mix.cotransform_mask);
                save_image(aug.first, pair_path(dir, data[i].id, 1));
                save_image(aug.second, pair_path(dir, data[i].id, 2));
                plans[i] = to_json(plan);
            } catch (const std::exception& e) {
                errors[i] = data[i].id + ": " + e.what();
            }
        }
    };
    const int n = std::max(1, cfg.workers);
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);

    json sidecar = json::object();
    for (std::size_t i = 0; i < data.size(); ++i) sidecar[data[i].id] = plans[i];
    write_text(dir + "/plans.json", sidecar.dump(2) + "\n");
    std::ofstream labels(dir + "/labels.csv");
    labels << "id,changed\n";
    for (const Sample& s : data) labels << s.id << "," << (s.changed ? 1 : 0) << "\n";
    echo_config(cfg, dir);
}

int cmd_augment(Common& c, const std::string& k_paths, const std::string& mask_source)
{
    RunConfig cfg = resolve(c);
    require(cfg.data, "--data");
    require(cfg.out, "--out");
    const auto ds = load_dataset(cfg.data);
    if (ds.samples.empty()) throw Error("no pairs in " + cfg.data);
    const int h = ds.samples.front().pair.height(), w = ds.samples.front().pair.width();
    const auto bgset = load_backgrounds(cfg, ds.samples, h, w);

    std::vector<ChangeMask> masks;
    if (mask_source == "provided") {
        const std::string dir = cfg.masks.empty() ? cfg.data : cfg.masks;
        for (const Sample& s : ds.samples) {
            const std::string p = mask_path(dir, s.id);
            if (!fs::exists(p)) throw IoError("missing mask " + p);
            masks.push_back(load_mask(p));
        }
    } else if (mask_source == "detector") {
        const ToyDetector det = cfg.checkpoint.empty() ? ToyDetector(ds.samples.front().pair.channels())
                                                       : ToyDetector::load_checkpoint(cfg.checkpoint);
        for (const Sample& s : ds.samples) masks.push_back(det.predict(s.pair));
    } else {
        throw ConfigError("--mask-source must be 'provided' or 'detector'");
    }

    auto [k_lo, k_hi] = k_paths.empty() ? std::pair{cfg.train.mix.k_paths, cfg.train.mix.k_paths} : parse_k_range(k_paths);
    if (k_lo > k_hi) throw ConfigError("--k-paths range is empty");
    for (int k = k_lo; k <= k_hi; ++k) {
        RunConfig run = cfg;
        run.train.mix.k_paths = k;
        run.train.mix.validate();
        const std::string dir = k_lo == k_hi ? cfg.out : cfg.out + "/k" + std::to_string(k);
        augment_into(run, ds.samples, masks, bgset, dir);
        std::cout << "augmented " << ds.samples.size() << " pairs into " << dir << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- training

struct TrainData {
    std::vector<Sample> train, test;
    std::vector<BackgroundPair> bgset;
};

TrainData load_train_data(const RunConfig& cfg, bool synthetic)
{
    TrainData d;
    if (synthetic) {
        Benchmark bm = make_benchmark(cfg.bench);
        d.train = std::move(bm.train);
        d.test = std::move(bm.test);
    } else {
        require(cfg.data, "--data (or --synthetic)");
        d.train = load_dataset(cfg.data).samples;
        if (!cfg.test.empty()) {
            const auto t = load_dataset(cfg.test);
            if (!t.has_masks) throw Error("test set needs masks/<id>.png for every pair");
            d.test = t.samples;
        }
    }
    if (d.train.empty()) throw Error("training set is empty");
    d.bgset = load_backgrounds(cfg, d.train, d.train.front().pair.height(), d.train.front().pair.width());
    return d;
}

void bind_train_flags(CLI::App* app, Common& c)
{
    auto& ov = c.ov;
    ov.bind(app, "--data", "data", "training dataset directory");
    ov.bind(app, "--test", "test", "held-out dataset directory with masks");
    ov.bind(app, "--backgrounds", "backgrounds", "background pairs directory (default: change-free training pairs)");
    ov.bind(app, "--iters", "max_iters", "training iterations");
    ov.bind(app, "--lr", "learning_rate", "detector learning rate");
    ov.bind(app, "--momentum", "momentum", "SGD momentum");
    ov.bind(app, "--batch-size", "batch_size", "pairs per iteration");
    ov.bind(app, "--eval-every", "eval_every", "evaluate every N iterations (0: only at the end)");
    ov.bind(app, "--profile", "profile", "loss weight profile: aicd or bcd");
    for (int i = 1; i <= 5; ++i)
        ov.bind(app, "--lambda" + std::to_string(i), "lambda" + std::to_string(i), "override one loss weight");
    ov.bind(app, "--k-paths", "k_paths", "augmentation paths K (2..6)");
    ov.bind(app, "--drop-op", "drop_op", "remove an operation (comma list)");
    ov.bind(app, "--features", "features", "precomputed feature file (default: built-in descriptor)");
    ov.bind(app, "--channels", "bench_channels", "synthetic benchmark channels (1 or 3)");
    ov.bind(app, "--bench-seed", "bench_seed", "synthetic benchmark seed");
    app->add_flag_callback("--no-augment", [&ov] { ov.values["augment"] = "false"; }, "disable BGMix");
    app->add_flag_callback("--no-mask-cotransform", [&ov] { ov.values["cotransform_mask"] = "false"; },
                           "pass the untransformed mask to bg_aware");
    app->add_flag_callback("--shared-background", [&ov] { ov.values["independent_backgrounds"] = "false"; },
                           "one background pair for all paths");
}

int cmd_train(Common& c, bool synthetic)
{
    RunConfig cfg = resolve(c);
    require(cfg.out, "--out");
    const TrainData d = load_train_data(cfg, synthetic);
    fs::create_directories(cfg.out);
    echo_config(cfg, cfg.out);
    std::ofstream log(cfg.out + "/train_log.jsonl");
    if (!log) throw IoError("cannot write " + cfg.out + "/train_log.jsonl");
    TrainConfig tc = cfg.effective_train();
    if (tc.dump_dir.empty()) tc.dump_dir = cfg.out + "/failed_batch";
    const auto result = train(
        d.train, d.bgset, d.test, tc,
        [&log](const IterRecord& r, const std::optional<EvalRecord>& ev) { log << to_json(r, ev).dump() << "\n"; },
        make_features(cfg));
    result.detector.save_checkpoint(cfg.out + "/checkpoint.txt");
    if (!result.log.evaluations.empty()) {
        const auto& m = result.log.evaluations.back().metrics;
        write_text(cfg.out + "/metrics.json", to_json(m).dump(2) + "\n");
        std::cout << "final test iou " << m.mean_iou << " f1 " << m.mean_f1 << " oa " << m.mean_oa << "\n";
    }
    std::cout << "checkpoint written to " << cfg.out << "/checkpoint.txt\n";
    return 0;
}

int cmd_ablate(Common& c, bool synthetic, bool paths)
{
    RunConfig cfg = resolve(c);
    require(cfg.out, "--out");
    const TrainData d = load_train_data(cfg, synthetic);
    if (d.test.empty()) throw Error("ablation needs a test set (--test or --synthetic)");
    echo_config(cfg, cfg.out);
    auto progress = [](const std::string& label) { std::cerr << "training " << label << "\n"; };
    const TrainConfig tc = cfg.effective_train();
    const SweepReport rep = paths ? run_path_sweep(d.train, d.bgset, d.test, tc, 2, 6, progress)
                                  : run_op_ablation(d.train, d.bgset, d.test, tc, progress);
    const std::string stem = cfg.out + (paths ? "/path_sweep" : "/op_ablation");
    write_text(stem + ".json", rep.to_json().dump(2) + "\n");
    write_text(stem + ".txt", rep.to_text());
    std::cout << rep.to_text();
    return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(Common& c, const std::string& pred_dir)
{
    RunConfig cfg = resolve(c);
    require(cfg.data, "--data");
    const auto ds = load_dataset(cfg.data);
    if (!ds.has_masks) throw Error("eval needs ground-truth masks/<id>.png in " + cfg.data);
    std::vector<ChangeMask> preds, gts;
    std::optional<ToyDetector> det;
    if (pred_dir.empty()) {
        require(cfg.checkpoint, "--checkpoint or --pred");
        det = ToyDetector::load_checkpoint(cfg.checkpoint);
    }
    json items = json::array();
    for (const Sample& s : ds.samples) {
        ChangeMask p = det ? det->predict(s.pair) : load_mask(mask_path(pred_dir, s.id));
        require_mask_shape(s.pair.first, p, "prediction");
        json j = to_json(evaluate(p, s.truth));
        j["id"] = s.id;
        items.push_back(j);
        preds.push_back(std::move(p));
        gts.push_back(s.truth);
    }
    const json report{{"summary", to_json(summarize(preds, gts))}, {"items", items}};
    if (cfg.out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        echo_config(cfg, cfg.out);
        write_text(cfg.out + "/metrics.json", report.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------- losses

struct LossPaths {
    std::string t1, t2, bg1, bg2, mask, aug1, aug2, aug_mask, bg_mask;
};

int cmd_losses(Common& c, const LossPaths& p)
{
    RunConfig cfg = resolve(c);
    for (auto [v, n] : {std::pair{&p.t1, "--t1"}, {&p.t2, "--t2"}, {&p.bg1, "--bg1"}, {&p.bg2, "--bg2"}}) require(*v, n);
    const ImagePair pair(load_image(p.t1), load_image(p.t2));
    const BackgroundPair bg(load_image(p.bg1), load_image(p.bg2));
    if (!bg.same_shape(pair)) throw ShapeError("background pair shape differs from the pair");
    if (p.aug1.empty() != p.aug2.empty()) throw ConfigError("give both --aug-t1 and --aug-t2 or neither");
    const ImagePair aug = p.aug1.empty() ? pair : ImagePair(load_image(p.aug1), load_image(p.aug2));
    std::optional<ToyDetector> det;
    if (!cfg.checkpoint.empty()) det = ToyDetector::load_checkpoint(cfg.checkpoint);
    auto mask_for = [&](const std::string& path, const ImagePair& x, std::optional<ChangeMask> fallback) {
        if (!path.empty()) return load_mask(path);
        if (det) return det->predict(x);
        if (fallback) return *fallback;
        throw ConfigError("no mask given and no --checkpoint to predict one");
    };
    const ChangeMask real = mask_for(p.mask, pair, std::nullopt);
    const LossMasks masks{real, mask_for(p.aug_mask, aug, p.aug1.empty() ? std::optional(real) : std::nullopt),
                          mask_for(p.bg_mask, bg, ChangeMask(bg.height(), bg.width(), 0.0))};
    auto f = make_features(cfg);
    const auto dim = f->dimension_for(pair.channels());
    const LogisticDiscriminator d1(f, dim), d2(f, dim); // untrained: both score 0.5
    const LossReport r = total_loss(pair, aug, bg, masks, *f, d1, d2, cfg.weights());
    const std::string text = to_json(r).dump(2) + "\n";
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        echo_config(cfg, cfg.out);
        write_text(cfg.out + "/losses.json", text);
    }
    return 0;
}

// ---------------------------------------------------------------- preview

int cmd_preview(Common& c, const LossPaths& p)
{
    RunConfig cfg = resolve(c);
    require(cfg.out, "--out");
    require(p.t1, "--t1");
    require(p.t2, "--t2");
    require(p.mask, "--mask");
    require(cfg.backgrounds, "--backgrounds");
    const ImagePair pair(load_image(p.t1), load_image(p.t2));
    const ChangeMask mask = load_mask(p.mask);
    std::vector<BackgroundPair> bgset;
    for (const Sample& s : load_dataset(cfg.backgrounds).samples) bgset.push_back(fit_to_shape(BackgroundPair(s.pair), pair.height(), pair.width()));
    if (bgset.empty()) throw Error("no background pairs in " + cfg.backgrounds);
    const Preview pv = preview(pair, bgset, mask, cfg.train.mix, cfg.preview_count, cfg.seed);
    fs::create_directories(cfg.out);
    save_image(pv.sheet, cfg.out + "/preview.png");
    json plans = json::array();
    for (const auto& pl : pv.plans) plans.push_back(to_json(pl));
    write_text(cfg.out + "/preview_plans.json", plans.dump(2) + "\n");
    echo_config(cfg, cfg.out);
    std::cout << "wrote " << cfg.out << "/preview.png (" << pv.sheet.width() << "x" << pv.sheet.height() << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"BGMix augmentation and weakly supervised change-detection testbed"};
    app.require_subcommand(1);

    Common prep_c, aug_c, train_c, eval_c, loss_c, prev_c, abl_c, path_c;

    bool synthetic = false;
    std::string from;
    auto* prep = app.add_subcommand("prepare", "build a dataset directory (synthetic scenes or tiled/pasted/enriched)");
    add_common(prep, prep_c);
    prep->add_flag("--synthetic", synthetic, "generate the synthetic benchmark into out/train and out/test");
    prep->add_option("--from", from, "annotated source dataset to tile, paste and enrich");
    prep_c.ov.bind(prep, "--tile-size", "tile_size", "tile edge in pixels");
    prep_c.ov.bind(prep, "--enrich-variants", "enrich_variants", "flipped/jittered copies per pair");
    prep_c.ov.bind(prep, "--channels", "bench_channels", "synthetic channels (1 or 3)");
    prep_c.ov.bind(prep, "--train-size", "bench_train_size", "synthetic training pairs");
    prep_c.ov.bind(prep, "--test-size", "bench_test_size", "synthetic test pairs");

    std::string k_paths, mask_source = "provided";
    auto* aug = app.add_subcommand("augment", "write BGMix-augmented copies of a dataset with a plans.json sidecar");
    add_common(aug, aug_c);
    aug_c.ov.bind(aug, "--data", "data", "input dataset directory");
    aug_c.ov.bind(aug, "--backgrounds", "backgrounds", "background pairs directory (default: change-free input pairs)");
    aug_c.ov.bind(aug, "--masks", "masks", "directory holding masks/<id>.png (default: the input dataset)");
    aug_c.ov.bind(aug, "--checkpoint", "checkpoint", "detector checkpoint for --mask-source detector");
    aug_c.ov.bind(aug, "--drop-op", "drop_op", "remove an operation (comma list)");
    aug_c.ov.bind(aug, "--workers", "workers", "worker threads (output does not depend on it)");
    aug->add_option("--k-paths", k_paths, "paths K, or a range such as 2..6 for one output per K");
    aug->add_option("--mask-source", mask_source, "provided or detector")->check(CLI::IsMember({"provided", "detector"}));
    aug->add_flag_callback("--no-mask-cotransform", [&] { aug_c.ov.values["cotransform_mask"] = "false"; },
                           "pass the untransformed mask to bg_aware");
    aug->add_flag_callback("--shared-background", [&] { aug_c.ov.values["independent_backgrounds"] = "false"; },
                           "one background pair for all paths");

    bool train_synth = false;
    auto* tr = app.add_subcommand("train-toy", "train the toy detector; writes train_log.jsonl and checkpoint.txt");
    add_common(tr, train_c);
    bind_train_flags(tr, train_c);
    tr->add_flag("--synthetic", train_synth, "train and test on the built-in synthetic benchmark");

    std::string pred_dir;
    auto* ev = app.add_subcommand("eval", "score predicted masks or a checkpoint against ground truth");
    add_common(ev, eval_c);
    eval_c.ov.bind(ev, "--data", "data", "dataset directory with ground-truth masks");
    eval_c.ov.bind(ev, "--checkpoint", "checkpoint", "detector checkpoint to predict with");
    ev->add_option("--pred", pred_dir, "directory of predicted masks/<id>.png");

    LossPaths lp, pp;
    auto* ls = app.add_subcommand("losses", "print the loss report for one pair, background pair and mask");
    add_common(ls, loss_c);
    ls->add_option("--t1", lp.t1, "first date");
    ls->add_option("--t2", lp.t2, "second date");
    ls->add_option("--bg1", lp.bg1, "background pair, first date");
    ls->add_option("--bg2", lp.bg2, "background pair, second date");
    ls->add_option("--mask", lp.mask, "mask C for the pair");
    ls->add_option("--aug-t1", lp.aug1, "augmented pair, first date (default: the pair)");
    ls->add_option("--aug-t2", lp.aug2, "augmented pair, second date");
    ls->add_option("--aug-mask", lp.aug_mask, "mask for the augmented pair (default: --mask when no aug pair)");
    ls->add_option("--bg-mask", lp.bg_mask, "mask predicted on the background pair (default: all zero)");
    loss_c.ov.bind(ls, "--checkpoint", "checkpoint", "predict any mask not given");
    loss_c.ov.bind(ls, "--profile", "profile", "aicd or bcd");
    loss_c.ov.bind(ls, "--features", "features", "precomputed feature file");
    for (int i = 1; i <= 5; ++i)
        loss_c.ov.bind(ls, "--lambda" + std::to_string(i), "lambda" + std::to_string(i), "override one loss weight");

    auto* pv = app.add_subcommand("preview", "contact sheet of the original pair and n augmented variants");
    add_common(pv, prev_c);
    pv->add_option("--t1", pp.t1, "first date");
    pv->add_option("--t2", pp.t2, "second date");
    pv->add_option("--mask", pp.mask, "change mask");
    prev_c.ov.bind(pv, "--backgrounds", "backgrounds", "background pairs directory");
    prev_c.ov.bind(pv, "--n", "preview_count", "number of augmented variants (default 3)");
    prev_c.ov.bind(pv, "--k-paths", "k_paths", "augmentation paths K");

    bool abl_synth = false, path_synth = false;
    auto* ab = app.add_subcommand("ablate-ops", "train once per dropped operation and write a consolidated report");
    add_common(ab, abl_c);
    bind_train_flags(ab, abl_c);
    ab->add_flag("--synthetic", abl_synth, "use the built-in synthetic benchmark");
    auto* ap = app.add_subcommand("ablate-paths", "train once per path count K = 2..6");
    add_common(ap, path_c);
    bind_train_flags(ap, path_c);
    ap->add_flag("--synthetic", path_synth, "use the built-in synthetic benchmark");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        if (*prep) return cmd_prepare(prep_c, synthetic, from);
        if (*aug) return cmd_augment(aug_c, k_paths, mask_source);
        if (*tr) return cmd_train(train_c, train_synth);
        if (*ev) return cmd_eval(eval_c, pred_dir);
        if (*ls) return cmd_losses(loss_c, lp);
        if (*pv) return cmd_preview(prev_c, pp);
        if (*ab) return cmd_ablate(abl_c, abl_synth, false);
        if (*ap) return cmd_ablate(path_c, path_synth, true);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsageError;
}
