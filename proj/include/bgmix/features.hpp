#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "image.hpp"

namespace bgmix {

/// Perceptual descriptor of a concatenated image pair. Implementations must be
/// deterministic and return a fixed-length finite vector.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<double> extract(const ImagePair& pair) const = 0;
    virtual std::string name() const = 0;
    virtual std::size_t dimension_for(int channels) const = 0;
};

/// Handcrafted stand-in for a deep perceptual network.
///
/// For each of the three planes {first, second, |first - second|} and each
/// channel c, in that order:
///   - mean and variance                              (2)
///   - 8-bin intensity histogram, linear binning       (8)
///   - mean gradient magnitude pooled on 1x1, 2x2 and
///     4x4 grids, row-major within each grid           (21)
/// giving dimension(C) = 3 * C * 31 = 93 * C.
///
/// Histogram mass is split linearly between the two nearest bin centers so the
/// descriptor is continuous in pixel values; values below the first center
/// fall entirely in bin 0. Gradient magnitude is sqrt(gx^2 + gy^2 + e^2) - e
/// with central differences, clamped borders and e = 1e-3.
class DefaultFeatures final : public FeatureExtractor {
public:
    static constexpr int kBins = 8;
    static constexpr int kPooled = 1 + 4 + 16;
    static constexpr int kPerChannel = 2 + kBins + kPooled;
    static constexpr double kGradEps = 1e-3;

    static std::size_t dimension(int channels) { return static_cast<std::size_t>(3 * channels * kPerChannel); }

    std::vector<double> extract(const ImagePair& pair) const override
    {
        const Image& a = pair.first;
        const Image& b = pair.second;
        require_same_shape(a, b, "features");
        std::vector<double> out;
        out.reserve(dimension(a.channels()));
        const int ch = a.channels();
        std::vector<double> plane(a.pixels());
        auto av = a.values();
        auto bv = b.values();
        for (int which = 0; which < 3; ++which) {
            for (int c = 0; c < ch; ++c) {
                for (std::size_t p = 0; p < plane.size(); ++p) {
                    const double x = av[p * ch + c];
                    const double y = bv[p * ch + c];
                    plane[p] = which == 0 ? x : which == 1 ? y : std::abs(x - y);
                }
                append_plane(plane, a.height(), a.width(), out);
            }
        }
        return out;
    }

    std::string name() const override { return "default"; }
    std::size_t dimension_for(int channels) const override { return dimension(channels); }

private:
    // four partial sums so the reduction pipelines
    static double range_sum(const double* p, int n)
    {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        int i = 0;
        for (; i + 4 <= n; i += 4) {
            s0 += p[i];
            s1 += p[i + 1];
            s2 += p[i + 2];
            s3 += p[i + 3];
        }
        for (; i < n; ++i) s0 += p[i];
        return (s0 + s1) + (s2 + s3);
    }

    static void append_plane(const std::vector<double>& v, int h, int w, std::vector<double>& out)
    {
        const int count = static_cast<int>(v.size());
        const double n = static_cast<double>(count);
        if (v.empty()) {
            out.insert(out.end(), kPerChannel, 0.0);
            return;
        }
        const double mean = range_sum(v.data(), count) / n;
        double q0 = 0.0, q1 = 0.0;
        int i = 0;
        for (; i + 2 <= count; i += 2) {
            const double d0 = v[i] - mean;
            const double d1 = v[i + 1] - mean;
            q0 += d0 * d0;
            q1 += d1 * d1;
        }
        for (; i < count; ++i) q0 += (v[i] - mean) * (v[i] - mean);
        out.push_back(mean);
        out.push_back((q0 + q1) / n);

        double hist[kBins] = {};
        for (double x : v) {
            const double t = std::min(std::max(x * kBins - 0.5, 0.0), static_cast<double>(kBins - 1));
            const int b = std::min(static_cast<int>(t), kBins - 2);
            const double f = t - b;
            hist[b] += 1.0 - f;
            hist[b + 1] += f;
        }
        for (double hv : hist) out.push_back(hv / n);

        // gradient magnitude per row, pooled over contiguous column segments
        thread_local std::vector<double> grad;
        grad.resize(static_cast<std::size_t>(w));
        int seg2[3], seg4[5];
        for (int j = 0; j <= 2; ++j) seg2[j] = (j * w + 1) / 2;
        for (int j = 0; j <= 4; ++j) seg4[j] = (j * w + 3) / 4;
        double pool1 = 0.0, pool2[4] = {}, pool4[16] = {};
        int count2[4] = {}, count4[16] = {};
        constexpr double e2 = kGradEps * kGradEps;
        for (int y = 0; y < h; ++y) {
            const double* up = v.data() + static_cast<std::size_t>(y > 0 ? y - 1 : 0) * w;
            const double* mid = v.data() + static_cast<std::size_t>(y) * w;
            const double* down = v.data() + static_cast<std::size_t>(y + 1 < h ? y + 1 : h - 1) * w;
            double* g = grad.data();
            {
                const double gy = 0.5 * (down[0] - up[0]);
                const double gx = 0.5 * (mid[w > 1 ? 1 : 0] - mid[0]);
                g[0] = std::sqrt(gx * gx + gy * gy + e2) - kGradEps;
            }
            for (int x = 1; x + 1 < w; ++x) {
                const double gy = 0.5 * (down[x] - up[x]);
                const double gx = 0.5 * (mid[x + 1] - mid[x - 1]);
                g[x] = std::sqrt(gx * gx + gy * gy + e2) - kGradEps;
            }
            if (w > 1) {
                const double gy = 0.5 * (down[w - 1] - up[w - 1]);
                const double gx = 0.5 * (mid[w - 1] - mid[w - 2]);
                g[w - 1] = std::sqrt(gx * gx + gy * gy + e2) - kGradEps;
            }
            const int r2 = (y * 2 / h) * 2;
            const int r4 = (y * 4 / h) * 4;
            for (int j = 0; j < 2; ++j) {
                const double s = range_sum(g + seg2[j], seg2[j + 1] - seg2[j]);
                pool2[r2 + j] += s;
                count2[r2 + j] += seg2[j + 1] - seg2[j];
                pool1 += s;
            }
            for (int j = 0; j < 4; ++j) {
                pool4[r4 + j] += range_sum(g + seg4[j], seg4[j + 1] - seg4[j]);
                count4[r4 + j] += seg4[j + 1] - seg4[j];
            }
        }
        out.push_back(pool1 / n);
        for (int k = 0; k < 4; ++k) out.push_back(count2[k] ? pool2[k] / count2[k] : 0.0);
        for (int k = 0; k < 16; ++k) out.push_back(count4[k] ? pool4[k] / count4[k] : 0.0);
    }
};

/// FNV-1a over the shape and the 8-bit quantized values of both images.
inline std::uint64_t pair_hash(const ImagePair& pair)
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (int v : {pair.height(), pair.width(), pair.channels()})
        for (int s = 0; s < 32; s += 8) mix((static_cast<std::uint32_t>(v) >> s) & 0xFF);
    for (const Image* img : {&pair.first, &pair.second})
        for (double v : img->values()) mix(static_cast<std::uint64_t>(std::floor(clamp01(v) * 255.0 + 0.5)));
    return h;
}

inline std::string hash_hex(std::uint64_t h)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// Precomputed vectors keyed by pair_hash, one per line:
/// `<16 hex digits> v0 v1 ...`. Lets externally computed deep features plug in.
class FileFeatures final : public FeatureExtractor {
public:
    explicit FileFeatures(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open feature file '" + path + "'");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            std::vector<double> vec;
            double x;
            while (ls >> x) vec.push_back(x);
            if (vec.empty()) throw IoError(path + ":" + std::to_string(lineno) + ": no values");
            if (dim_ == 0) dim_ = vec.size();
            if (vec.size() != dim_) throw IoError(path + ":" + std::to_string(lineno) + ": inconsistent dimension");
            table_[key] = std::move(vec);
        }
    }

    std::vector<double> extract(const ImagePair& pair) const override
    {
        const auto key = hash_hex(pair_hash(pair));
        auto it = table_.find(key);
        if (it == table_.end()) throw Error("no precomputed features for pair " + key);
        return it->second;
    }

    std::string name() const override { return "file"; }
    std::size_t dimension_for(int) const override { return dim_; }
    std::size_t dimension() const { return dim_; }

private:
    std::unordered_map<std::string, std::vector<double>> table_;
    std::size_t dim_ = 0;
};

} // namespace bgmix
