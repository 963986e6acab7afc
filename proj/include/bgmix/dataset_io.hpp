#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "png_io.hpp"

namespace bgmix {

// On-disk layout of a dataset directory:
//   pairs/<id>_t1.png, pairs/<id>_t2.png
//   masks/<id>.png          (optional, evaluation only)
//   labels.csv              header "id,changed", then one row per pair

struct LoadedDataset {
    std::vector<Sample> samples;
    bool has_masks = false; // every sample had a mask file
};

inline std::string pair_path(const std::string& dir, const std::string& id, int which)
{
    return dir + "/pairs/" + id + (which == 1 ? "_t1.png" : "_t2.png");
}

inline std::string mask_path(const std::string& dir, const std::string& id) { return dir + "/masks/" + id + ".png"; }

inline void save_dataset(const std::string& dir, const std::vector<Sample>& samples, bool write_masks = true)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir + "/pairs");
    if (write_masks) fs::create_directories(dir + "/masks");
    std::ofstream labels(dir + "/labels.csv");
    if (!labels) throw IoError("cannot write " + dir + "/labels.csv");
    labels << "id,changed\n";
    for (const Sample& s : samples) {
        save_image(s.pair.first, pair_path(dir, s.id, 1));
        save_image(s.pair.second, pair_path(dir, s.id, 2));
        if (write_masks) save_mask(s.truth, mask_path(dir, s.id));
        labels << s.id << "," << (s.changed ? 1 : 0) << "\n";
    }
}

/// Reads labels.csv and the listed pairs. Missing masks leave `truth` all zero.
inline LoadedDataset load_dataset(const std::string& dir)
{
    namespace fs = std::filesystem;
    std::ifstream in(dir + "/labels.csv");
    if (!in) throw IoError("cannot open " + dir + "/labels.csv");
    LoadedDataset out;
    out.has_masks = true;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (lineno == 1 && line.rfind("id,", 0) == 0)) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError(dir + "/labels.csv:" + std::to_string(lineno) + ": expected id,changed");
        const std::string id = line.substr(0, comma);
        const std::string flag = line.substr(comma + 1);
        if (flag != "0" && flag != "1")
            throw IoError(dir + "/labels.csv:" + std::to_string(lineno) + ": changed must be 0 or 1");
        ImagePair pair(load_image(pair_path(dir, id, 1)), load_image(pair_path(dir, id, 2)));
        ChangeMask truth(pair.height(), pair.width(), 0.0);
        if (fs::exists(mask_path(dir, id))) {
            truth = load_mask(mask_path(dir, id));
            require_mask_shape(pair.first, truth, ("dataset mask " + id).c_str());
        } else {
            out.has_masks = false;
        }
        out.samples.push_back(Sample{id, std::move(pair), std::move(truth), flag == "1"});
    }
    if (out.samples.empty()) out.has_masks = false;
    return out;
}

} // namespace bgmix
