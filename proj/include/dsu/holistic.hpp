#pragma once

#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

// Smoothing kernel of the holistic-attention operation. The size is fixed
// after init; only sigma is learnable (kernel size is not differentiable).
// Entries are renormalized to sum 1 every time the kernel is built.
struct GaussianKernelParam {
    int size = 6;
    float sigma = 0.75f;
};

// size x size taps at integer offsets j - size/2; normalized to sum 1.
std::vector<float> gaussian_kernel(const GaussianKernelParam& k);

// d(kernel)/d(sigma) of the normalized kernel.
std::vector<float> gaussian_kernel_dsigma(const GaussianKernelParam& k);

// Same-size convolution of a field with an arbitrary size x size kernel,
// zero-padded borders.
ScalarField conv_field(const ScalarField& s, const std::vector<float>& kernel, int size);

// Gaussian-blur then pointwise max with the original map, expanding the
// coverage area while preserving peaks.
ScalarField holistic_attention(const ScalarField& s, const GaussianKernelParam& k);

struct HaResult {
    ScalarField blur;
    ScalarField out; // max(blur, s)
};
HaResult holistic_attention_full(const ScalarField& s, const GaussianKernelParam& k);

} // namespace dsu
