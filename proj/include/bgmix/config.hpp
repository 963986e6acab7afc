#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "trainer.hpp"

namespace bgmix {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Every knob of a run. Serialized as flat `key = value` lines; loading a file
/// and then applying command-line flags gives flags the last word.
struct RunConfig {
    std::uint64_t seed = 0;
    TrainConfig train{};
    std::string profile = "aicd";
    std::array<std::optional<double>, 5> lambda{}; // explicit overrides of the profile
    BenchmarkSpec bench{};
    TileSpec tiles{};
    EnrichSpec enrich{};
    int workers = 1;
    int preview_count = 3;
    std::string data, backgrounds, masks, test, out, checkpoint, features;

    /// Profile weights with any explicit lambda applied on top.
    LossWeights weights() const
    {
        auto w = LossWeights::profile(profile);
        if (!w) throw ConfigError("unknown loss profile '" + profile + "' (expected aicd or bcd)");
        double* slots[5] = {&w->lambda1, &w->lambda2, &w->lambda3, &w->lambda4, &w->lambda5};
        for (int i = 0; i < 5; ++i)
            if (lambda[i]) *slots[i] = *lambda[i];
        return *w;
    }

    /// Training config with seed and weights resolved.
    TrainConfig effective_train() const
    {
        TrainConfig t = train;
        t.seed = seed;
        t.weights = weights();
        return t;
    }

    struct Field {
        std::string key;
        std::function<std::string()> get;
        std::function<void(const std::string&)> set;
    };

    std::vector<Field> fields();

    void set(const std::string& key, const std::string& value)
    {
        for (auto& f : fields())
            if (f.key == key) {
                f.set(value);
                return;
            }
        throw ConfigError("unknown config key '" + key + "'");
    }

    std::string get(const std::string& key)
    {
        for (auto& f : fields())
            if (f.key == key) return f.get();
        throw ConfigError("unknown config key '" + key + "'");
    }

    /// Canonical text form; reading it back reproduces this config.
    std::string to_text()
    {
        std::ostringstream os;
        for (auto& f : fields()) os << f.key << " = " << f.get() << "\n";
        return os.str();
    }

    void load_text(const std::string& text, const std::string& origin = "config")
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            try {
                set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
            } catch (const ConfigError& e) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    void load_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        load_text(ss.str(), path);
    }

    void save_file(const std::string& path)
    {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write config '" + path + "'");
        out << to_text();
    }

    /// Seed from BGMIX_SEED when set, 0 otherwise.
    static std::uint64_t default_seed()
    {
        const char* v = std::getenv("BGMIX_SEED");
        if (!v || !*v) return 0;
        return parse_u64(v, "BGMIX_SEED");
    }

    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::string fmt(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    static double parse_double(const std::string& s, const std::string& key)
    {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ConfigError(key + ": not a number: '" + s + "'");
        return v;
    }

    static long long parse_int(const std::string& s, const std::string& key)
    {
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not an integer: '" + s + "'");
        return v;
    }

    static std::uint64_t parse_u64(const std::string& s, const std::string& key)
    {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw ConfigError(key + ": not an unsigned integer: '" + s + "'");
        return v;
    }

    static bool parse_bool(const std::string& s, const std::string& key)
    {
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError(key + ": not a boolean: '" + s + "'");
    }

    static std::vector<AugKind> parse_ops(const std::string& s, const std::string& key)
    {
        std::vector<AugKind> ops;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto k = parse_aug_kind(item);
            if (!k) throw ConfigError(key + ": unknown operation '" + item + "'");
            if (std::find(ops.begin(), ops.end(), *k) == ops.end()) ops.push_back(*k);
        }
        return ops;
    }

    static std::string format_ops(const std::vector<AugKind>& ops)
    {
        std::string s;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (i) s += ",";
            s += to_string(ops[i]);
        }
        return s;
    }
};

inline std::vector<RunConfig::Field> RunConfig::fields()
{
    std::vector<Field> f;
    auto add_double = [&f](std::string key, double& ref) {
        f.push_back({key, [&ref] { return fmt(ref); }, [&ref, key](const std::string& s) { ref = parse_double(s, key); }});
    };
    auto add_int = [&f](std::string key, int& ref) {
        f.push_back({key, [&ref] { return std::to_string(ref); },
                     [&ref, key](const std::string& s) { ref = static_cast<int>(parse_int(s, key)); }});
    };
    auto add_u64 = [&f](std::string key, std::uint64_t& ref) {
        f.push_back({key, [&ref] { return std::to_string(ref); }, [&ref, key](const std::string& s) { ref = parse_u64(s, key); }});
    };
    auto add_bool = [&f](std::string key, bool& ref) {
        f.push_back({key, [&ref] { return std::string(ref ? "true" : "false"); },
                     [&ref, key](const std::string& s) { ref = parse_bool(s, key); }});
    };
    auto add_string = [&f](std::string key, std::string& ref) {
        f.push_back({key, [&ref] { return ref; }, [&ref](const std::string& s) { ref = s; }});
    };

    add_u64("seed", seed);

    MixConfig& m = train.mix;
    add_int("k_paths", m.k_paths);
    add_double("dirichlet_alpha", m.dirichlet_alpha);
    add_double("beta_a", m.beta_a);
    add_double("beta_b", m.beta_b);
    f.push_back({"ops", [&m] { return format_ops(m.op_set); },
                 [&m](const std::string& s) { m.op_set = parse_ops(s, "ops"); }});
    // write-only convenience; the effect shows up in `ops`
    f.push_back({"drop_op", [] { return std::string(); },
                 [&m](const std::string& s) {
                     for (AugKind k : parse_ops(s, "drop_op")) m.drop_op(k);
                 }});
    add_bool("cotransform_mask", m.cotransform_mask);
    add_bool("independent_backgrounds", m.independent_backgrounds);
    add_double("rotate_max_degrees", m.ranges.rotate_max_degrees);
    add_double("shear_max", m.ranges.shear_max);
    add_double("translate_fraction", m.ranges.translate_fraction);
    add_int("posterize_min_bits", m.ranges.posterize_min_bits);
    add_int("posterize_max_bits", m.ranges.posterize_max_bits);
    add_double("solarize_min", m.ranges.solarize_min);
    add_double("solarize_max", m.ranges.solarize_max);

    add_string("profile", profile);
    for (int i = 0; i < 5; ++i) {
        const std::string key = "lambda" + std::to_string(i + 1);
        auto& slot = lambda[i];
        f.push_back({key, [&slot] { return slot ? fmt(*slot) : std::string("profile"); },
                     [&slot, key](const std::string& s) {
                         if (s == "profile" || s.empty())
                             slot.reset();
                         else
                             slot = parse_double(s, key);
                     }});
    }

    add_int("batch_size", train.batch_size);
    add_double("learning_rate", train.learning_rate);
    add_double("momentum", train.momentum);
    add_int("max_iters", train.max_iters);
    add_double("fd_step", train.fd_step);
    f.push_back({"discriminator_learning_rate",
                 [this] { return train.discriminator_learning_rate ? fmt(*train.discriminator_learning_rate) : std::string("same"); },
                 [this](const std::string& s) {
                     if (s == "same" || s.empty())
                         train.discriminator_learning_rate.reset();
                     else
                         train.discriminator_learning_rate = parse_double(s, "discriminator_learning_rate");
                 }});
    add_bool("augment", train.augment);
    add_int("eval_every", train.eval_every);
    add_string("dump_dir", train.dump_dir);

    add_u64("bench_seed", bench.seed);
    add_int("bench_train_size", bench.train_size);
    add_int("bench_test_size", bench.test_size);
    add_int("bench_height", bench.height);
    add_int("bench_width", bench.width);
    add_int("bench_channels", bench.channels);
    add_int("bench_sites", bench.sites);
    add_double("bench_texture_noise", bench.texture_noise);
    add_double("bench_sensor_noise", bench.sensor_noise);
    add_double("bench_site_jitter", bench.site_jitter);

    add_int("tile_size", tiles.tile_size);
    add_int("enrich_variants", enrich.variants);
    add_double("enrich_jitter", enrich.jitter);
    add_int("workers", workers);
    add_int("preview_count", preview_count);

    add_string("data", data);
    add_string("backgrounds", backgrounds);
    add_string("masks", masks);
    add_string("test", test);
    add_string("out", out);
    add_string("checkpoint", checkpoint);
    add_string("features", features);
    return f;
}

} // namespace bgmix
