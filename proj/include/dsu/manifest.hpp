#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

struct SampleEntry {
    std::string id;
    std::string rgb_path;
    std::string depth_path;
    std::string pseudo_path; // may be empty before init-labels
    std::string gt_path;     // empty when no ground truth is supplied
};

// Loaded training inputs. Deliberately has no ground-truth member: the
// trainer consumes these and therefore cannot observe labels even by
// accident (tested via the io audit hook as well).
struct TrainSample {
    std::string id;
    RgbImage rgb;
    ScalarField depth;
    ScalarField pseudo;
};

struct DatasetManifest {
    std::string root;
    std::vector<SampleEntry> samples; // lexicographic by id

    bool has_gt() const;
    // Loads rgb/depth/pseudo resized to `size` x `size`. Ground truth is not
    // touched on this path.
    std::vector<TrainSample> load_training(int size, bool invert_depth) const;
    // Evaluation-only access to ground truth, at native resolution.
    ScalarField load_gt(const std::string& id) const;
    ScalarField load_gt_resized(const std::string& id, int size) const;
};

// Scans root/rgb, root/depth, root/pseudo (optional root/gt) for files with
// matching stems. Every rgb file needs a depth counterpart; pseudo and gt
// are optional as whole directories but must be complete when present.
DatasetManifest ingest(const std::string& root);

} // namespace dsu
