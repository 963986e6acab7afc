#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "image.hpp"
#include "losses.hpp"

namespace bgmix {

/// Per-channel |I1 - I2| planes; independent of detector parameters, so they
/// are computed once per pair.
struct DifferencePlanes {
    int height = 0;
    int width = 0;
    std::vector<std::vector<double>> planes;

    explicit DifferencePlanes(const ImagePair& pair) : height(pair.height()), width(pair.width())
    {
        const int ch = pair.channels();
        auto a = pair.first.values();
        auto b = pair.second.values();
        planes.assign(ch, std::vector<double>(pair.first.pixels()));
        for (std::size_t p = 0; p < pair.first.pixels(); ++p)
            for (int c = 0; c < ch; ++c) planes[c][p] = std::abs(a[p * ch + c] - b[p * ch + c]);
    }
};

/// Small parametric change detector:
///   C = sigmoid(gain * k2 (*) k1 (*) (sum_c w_c |I1 - I2|_c + bias))
/// with two 3x3 correlation kernels and replicated borders.
class ToyDetector {
public:
    static constexpr double kMaskFloor = 1e-9;

    explicit ToyDetector(int channels = 3) : channels_(channels)
    {
        if (channels != 1 && channels != 3) throw Error("detector channels must be 1 or 3");
        params_.assign(parameter_count(), 0.0);
        for (int c = 0; c < channels_; ++c) params_[c] = 1.0 / channels_;
        for (int i = 0; i < 9; ++i) {
            params_[kernel1_offset() + i] = 1.0 / 9.0;
            params_[kernel2_offset() + i] = 1.0 / 9.0;
        }
        params_[gain_index()] = 10.0;
        params_[bias_index()] = -0.5;
    }

    int channels() const { return channels_; }
    std::size_t parameter_count() const { return static_cast<std::size_t>(channels_) + 18 + 2; }
    std::size_t kernel1_offset() const { return static_cast<std::size_t>(channels_); }
    std::size_t kernel2_offset() const { return kernel1_offset() + 9; }
    std::size_t gain_index() const { return kernel2_offset() + 9; }
    std::size_t bias_index() const { return gain_index() + 1; }

    const std::vector<double>& parameters() const { return params_; }
    std::vector<double>& parameters() { return params_; }
    void set_parameters(std::vector<double> p)
    {
        if (p.size() != parameter_count()) throw Error("detector parameter count mismatch");
        params_ = std::move(p);
    }

    std::string parameter_name(std::size_t i) const
    {
        if (i < kernel1_offset()) return "diff_weight." + std::to_string(i);
        if (i < kernel2_offset()) return "kernel1." + std::to_string(i - kernel1_offset());
        if (i < gain_index()) return "kernel2." + std::to_string(i - kernel2_offset());
        if (i == gain_index()) return "gain";
        if (i == bias_index()) return "bias";
        throw Error("parameter index out of range");
    }

    ChangeMask predict(const ImagePair& pair) const { return predict(DifferencePlanes(pair)); }

    ChangeMask predict(const DifferencePlanes& diff) const
    {
        if (static_cast<int>(diff.planes.size()) != channels_) throw ShapeError("detector: channel count mismatch");
        const int h = diff.height;
        const int w = diff.width;
        const std::size_t n = static_cast<std::size_t>(h) * w;
        std::vector<double> d(n, params_[bias_index()]);
        for (int c = 0; c < channels_; ++c) {
            const double wc = params_[c];
            const auto& plane = diff.planes[c];
            for (std::size_t p = 0; p < n; ++p) d[p] += wc * plane[p];
        }
        std::vector<double> s1 = correlate3x3(d, h, w, &params_[kernel1_offset()]);
        std::vector<double> s2 = correlate3x3(s1, h, w, &params_[kernel2_offset()]);
        const double gain = params_[gain_index()];
        for (double& v : s2) {
            const double sig = 1.0 / (1.0 + std::exp(-gain * v));
            v = std::min(std::max(sig, kMaskFloor), 1.0 - kMaskFloor);
        }
        return ChangeMask(h, w, std::move(s2));
    }

    /// Flat `name = value` text, one parameter per line.
    void save_checkpoint(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write checkpoint '" + path + "'");
        out << "channels = " << channels_ << "\n";
        out << std::setprecision(17);
        for (std::size_t i = 0; i < params_.size(); ++i) out << parameter_name(i) << " = " << params_[i] << "\n";
    }

    static ToyDetector load_checkpoint(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open checkpoint '" + path + "'");
        std::map<std::string, double> kv;
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            kv[trim(line.substr(0, eq))] = std::stod(trim(line.substr(eq + 1)));
        }
        const int ch = kv.count("channels") ? static_cast<int>(kv["channels"]) : 3;
        ToyDetector det(ch);
        for (std::size_t i = 0; i < det.parameter_count(); ++i) {
            auto it = kv.find(det.parameter_name(i));
            if (it == kv.end()) throw IoError("checkpoint '" + path + "' lacks " + det.parameter_name(i));
            det.params_[i] = it->second;
        }
        return det;
    }

private:
    static std::vector<double> correlate3x3(const std::vector<double>& src, int h, int w, const double* k)
    {
        std::vector<double> out(src.size());
        const double k0 = k[0], k1 = k[1], k2 = k[2], k3 = k[3], k4 = k[4], k5 = k[5], k6 = k[6], k7 = k[7], k8 = k[8];
        for (int y = 0; y < h; ++y) {
            const double* a = src.data() + static_cast<std::size_t>(y > 0 ? y - 1 : 0) * w;
            const double* b = src.data() + static_cast<std::size_t>(y) * w;
            const double* c = src.data() + static_cast<std::size_t>(y + 1 < h ? y + 1 : h - 1) * w;
            double* dst = out.data() + static_cast<std::size_t>(y) * w;
            auto at = [&](int x, int xm, int xp) {
                return k0 * a[xm] + k1 * a[x] + k2 * a[xp] + k3 * b[xm] + k4 * b[x] + k5 * b[xp] + k6 * c[xm] +
                       k7 * c[x] + k8 * c[xp];
            };
            dst[0] = at(0, 0, w > 1 ? 1 : 0);
            for (int x = 1; x + 1 < w; ++x) dst[x] = at(x, x - 1, x + 1);
            if (w > 1) dst[w - 1] = at(w - 1, w - 2, w - 1);
        }
        return out;
    }

    int channels_;
    std::vector<double> params_;
};

/// total_loss with masks predicted by the detector.
inline LossReport total_loss(const ImagePair& pair, const ImagePair& aug, const BackgroundPair& bg,
                             const ToyDetector& det, const FeatureExtractor& f, const Discriminator& d1,
                             const Discriminator& d2, const LossWeights& w)
{
    LossMasks masks{det.predict(pair), det.predict(aug), det.predict(bg)};
    return total_loss(pair, aug, bg, masks, f, d1, d2, w);
}

} // namespace bgmix
