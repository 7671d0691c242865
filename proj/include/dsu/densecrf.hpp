#pragma once

#include <functional>
#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

// Fully-connected binary CRF solved by mean-field iteration. Two Gaussian
// pairwise kernels: appearance (spatial + color) and smoothness (spatial),
// Potts compatibility. The defaults are standard dense-CRF magnitudes scaled
// to 64x64 inputs.
struct CrfParams {
    float w_app = 4.0f;        // appearance kernel weight
    float theta_alpha = 8.0f;  // appearance spatial stddev (px)
    float theta_beta = 0.1f;   // appearance color stddev (on [0,1] channels)
    float w_smooth = 3.0f;     // smoothness kernel weight
    float theta_gamma = 3.0f;  // smoothness spatial stddev (px)
    int iterations = 5;
    bool binarize = false;     // threshold the returned marginal at 0.5
    int window = 0;            // 0 = exact O(N^2); >0 truncates messages to that radius

    void validate() const;
};

// Mean-field refinement of a foreground-probability map. The unary input is
// clamped to [1e-6, 1-1e-6]; the return value is the foreground marginal
// after `iterations` updates (or its 0.5-binarization when requested).
// Exact message passing is limited to images up to 128x128; larger inputs
// require a truncation window.
ScalarField densecrf_refine(const RgbImage& rgb, const ScalarField& unary, const CrfParams& p);

// Observer receives (iteration, foreground marginals, background marginals)
// after each update; both distributions stay on the 2-simplex throughout.
using CrfObserver = std::function<void(int, const std::vector<double>&, const std::vector<double>&)>;
ScalarField densecrf_refine(const RgbImage& rgb, const ScalarField& unary, const CrfParams& p,
                            const CrfObserver& observer);

} // namespace dsu
