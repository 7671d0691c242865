#include "dsu/depth_prior.hpp"

#include <algorithm>
#include <cmath>

#include "dsu/field_ops.hpp"

namespace dsu {

ScalarField simple_depth_prior_init(const ScalarField& d_map) {
    const int W = d_map.width, H = d_map.height;
    const float mean = field_mean(d_map);
    ScalarField contrast(W, H);
    for (std::size_t i = 0; i < contrast.size(); ++i)
        contrast.data[i] = std::fabs(d_map.data[i] - mean);
    contrast = minmax_normalize(contrast);

    const double sigma = 0.3 * std::min(W, H);
    const double cx = (W - 1) / 2.0, cy = (H - 1) / 2.0;
    ScalarField out(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double prior = std::exp(-d2 / (2.0 * sigma * sigma));
            out.at(y, x) = static_cast<float>(prior) * contrast.at(y, x);
        }
    return minmax_normalize(out);
}

} // namespace dsu
