#pragma once

#include <vector>

#include "dsu/tensor.hpp"

namespace dsu {

enum class TrainStep { One, Two };

struct AttentiveWeights {
    std::vector<double> alpha; // per-sample, in [0,1]
    TrainStep step = TrainStep::One;
    double sum() const {
        double s = 0.0;
        for (const double a : alpha) s += a;
        return s;
    }
};

// Step one: uniform weights. Step two: alpha_n = sum_{i != n} e^{l_i} /
// sum_i e^{l_i} = 1 - softmax(l)_n, computed with max subtraction. Weights
// are treated as constants in the loss gradient.
AttentiveWeights attentive_weights(const std::vector<double>& losses, TrainStep step);

// L_sal = sum_n alpha_n l_n / sum_n alpha_n.
double attentive_bce(const std::vector<double>& per_sample_bce, const AttentiveWeights& w);

// Gradient coefficients for bce_grad: d(L_sal)/d(l_n) = alpha_n / sum(alpha).
std::vector<double> attentive_coefficients(const AttentiveWeights& w);

} // namespace dsu
