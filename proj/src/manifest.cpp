#include "dsu/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include "dsu/field_ops.hpp"
#include "dsu/image_io.hpp"

namespace fs = std::filesystem;

namespace dsu {

namespace {

bool is_image(const fs::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".png" || ext == ".pgm";
}

std::map<std::string, std::string> scan_dir(const fs::path& dir) {
    std::map<std::string, std::string> stems;
    if (!fs::exists(dir)) return stems;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || !is_image(e.path())) continue;
        stems[e.path().stem().string()] = e.path().string();
    }
    return stems;
}

} // namespace

DatasetManifest ingest(const std::string& root) {
    const fs::path base(root);
    if (!fs::exists(base)) throw DataError("dataset root does not exist: " + root);
    const auto rgb = scan_dir(base / "rgb");
    const auto depth = scan_dir(base / "depth");
    const auto pseudo = scan_dir(base / "pseudo");
    const auto gt = scan_dir(base / "gt");

    DatasetManifest m;
    m.root = root;
    if (rgb.empty()) {
        std::cerr << "warning: no rgb images found under " << root << "\n";
        return m;
    }
    for (const auto& [stem, path] : rgb) { // std::map iterates lexicographically
        SampleEntry s;
        s.id = stem;
        s.rgb_path = path;
        const auto d = depth.find(stem);
        if (d == depth.end())
            throw DataError("sample " + stem + ": rgb image has no depth counterpart");
        s.depth_path = d->second;
        if (const auto p = pseudo.find(stem); p != pseudo.end()) s.pseudo_path = p->second;
        if (const auto g = gt.find(stem); g != gt.end()) s.gt_path = g->second;
        m.samples.push_back(std::move(s));
    }
    // partially supplied label dirs are almost always a mistake
    if (!pseudo.empty())
        for (const auto& s : m.samples)
            if (s.pseudo_path.empty())
                throw DataError("sample " + s.id + ": missing pseudo-label counterpart");
    if (!gt.empty())
        for (const auto& s : m.samples)
            if (s.gt_path.empty())
                throw DataError("sample " + s.id + ": missing ground-truth counterpart");
    return m;
}

bool DatasetManifest::has_gt() const {
    return !samples.empty() &&
           std::all_of(samples.begin(), samples.end(),
                       [](const SampleEntry& s) { return !s.gt_path.empty(); });
}

std::vector<TrainSample> DatasetManifest::load_training(int size, bool invert_depth) const {
    std::vector<TrainSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.pseudo_path.empty())
            throw DataError("sample " + s.id + ": no pseudo-label (run init-labels first)");
        TrainSample t;
        t.id = s.id;
        t.rgb = resize_bilinear(load_rgb(s.rgb_path), size, size);
        t.depth = resize_bilinear(load_gray(s.depth_path, invert_depth), size, size);
        t.pseudo = resize_bilinear(load_gray(s.pseudo_path), size, size);
        check_unit_range(t.depth, ("depth map " + s.id).c_str());
        check_unit_range(t.pseudo, ("pseudo-label " + s.id).c_str());
        out.push_back(std::move(t));
    }
    return out;
}

ScalarField DatasetManifest::load_gt(const std::string& id) const {
    for (const auto& s : samples)
        if (s.id == id) {
            if (s.gt_path.empty()) throw DataError("sample " + id + ": no ground truth");
            return load_gray(s.gt_path);
        }
    throw DataError("unknown sample id: " + id);
}

ScalarField DatasetManifest::load_gt_resized(const std::string& id, int size) const {
    ScalarField g = resize_bilinear(load_gt(id), size, size);
    for (float& v : g.data) v = v >= 0.5f ? 1.0f : 0.0f; // keep it binary after resampling
    return g;
}

} // namespace dsu
