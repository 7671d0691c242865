#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

// Desk-scale synthetic RGB-D corpus: colored shapes over a background, depth
// separated, with color-ambiguous background distractors so appearance alone
// cannot resolve saliency. Pseudo-labels are corrupted copies of the ground
// truth.
struct SynthSpec {
    int size = 64;
    int count = 60;
    double train_frac = 0.8;
    int objects_min = 1;
    int objects_max = 3;
    bool ellipses = true;
    bool rectangles = true;
    double depth_separation = 0.6; // object-vs-background depth gap scale
    double corruption_mae = 0.15;  // per-sample target; achieved within +-20%
    // relative magnitudes of the corruption ops; the generator rescales the
    // whole set until the target MAE window is hit
    double mag_dilate = 1.0;
    double mag_erode = 1.0;
    double mag_hole = 1.0;
    double mag_blob = 1.0;
    std::uint64_t seed = 42;
};

struct SynthSample {
    RgbImage rgb;
    ScalarField depth;
    ScalarField gt;     // binary
    ScalarField pseudo; // corrupted gt
    double achieved_mae = 0.0;
};

// Deterministic in (spec.seed, index); independent of every other index.
SynthSample synth_sample(const SynthSpec& spec, int index);

struct SynthSummary {
    int train_count = 0;
    int eval_count = 0;
    double mean_corruption_mae = 0.0;
};

// Writes out_dir/{train,eval}/{rgb,depth,pseudo,gt}/ plus a corpus manifest
// CSV. Byte-identical for identical spec.
SynthSummary synth_generate(const SynthSpec& spec, const std::string& out_dir);

} // namespace dsu
