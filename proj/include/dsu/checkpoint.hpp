#pragma once

#include <string>

#include "dsu/layers.hpp"

namespace dsu {

// Little-endian binary checkpoint: magic "DSU1", then a table of
// (u32 name length, name, u32 dim count, u32 dims..., raw float32 values)
// until end of file. Adam moments ride along under "<name>#m" / "<name>#v"
// entries and step counters as 1-element tensors, so training state restores
// exactly.

void save_checkpoint(const std::string& path, const ParamSet& params,
                     long sal_steps, long depth_steps);

struct CheckpointMeta {
    long sal_steps = 0;
    long depth_steps = 0;
};

// Parameter names and shapes must match the freshly built model exactly.
CheckpointMeta load_checkpoint(const std::string& path, ParamSet& params);

} // namespace dsu
