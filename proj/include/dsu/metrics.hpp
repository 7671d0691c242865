#pragma once

#include <array>
#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

// Standard SOD evaluation suite. F-measure uses beta^2 = 0.3; the weighted
// variant follows its cited reference's published defaults (7x7 Gaussian,
// sigma 5, beta^2 = 1).
struct MetricsReport {
    double mae = 0.0;
    std::array<double, 256> f_curve{};
    double f_max = 0.0;
    double f_mean = 0.0;
    double f_weighted = 0.0;
    double e_measure = 0.0;
};

double mae(const ScalarField& s, const ScalarField& g);

// F_beta at each threshold t in {0..255}/255, binarizing at s > t.
// Conventions: precision 0 when no positives are predicted, recall 0 when
// the ground truth is empty, F 0 when both P and R are 0.
std::array<double, 256> f_measure_curve(const ScalarField& s, const ScalarField& g);

// Enhanced-alignment measure. The prediction is binarized at
// min(2*mean(s), 1) with >= before the alignment computation; an all-constant
// ground truth falls back to mean(1 - s_bin) / mean(s_bin).
double e_measure(const ScalarField& s, const ScalarField& g);

// Dependency-weighted F-measure; 0 when the ground truth has no foreground.
double weighted_f(const ScalarField& s, const ScalarField& g);

MetricsReport evaluate_pair(const ScalarField& s, const ScalarField& g);

void require_binary(const ScalarField& g, const char* what);

} // namespace dsu
