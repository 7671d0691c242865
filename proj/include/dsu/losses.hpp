#pragma once

#include <vector>

#include "dsu/tensor.hpp"

namespace dsu {

inline constexpr float kBceClamp = 1e-6f; // keeps log and e^l finite

// Mean squared difference over all entries.
double mse(const Tensor4& pred, const Tensor4& target);

// d(scale * mse)/d(pred), written as a tensor.
Tensor4 mse_grad(const Tensor4& pred, const Tensor4& target, double scale);

// Per-sample binary cross entropy, averaged over pixels. Predictions are
// clamped to [kBceClamp, 1-kBceClamp] before the logs.
std::vector<double> bce_per_sample(const Tensor4& pred, const Tensor4& target);

// Gradient of sum_n coeff[n] * l_n with respect to pred.
Tensor4 bce_grad(const Tensor4& pred, const Tensor4& target, const std::vector<double>& coeff);

} // namespace dsu
