#pragma once

#include "dsu/scalar_field.hpp"

namespace dsu {

// (f - min) / (max - min); a constant field maps to all zeros so the label
// update stays total and deterministic.
ScalarField minmax_normalize(const ScalarField& f);

// Negative entries become 0, everything else passes through. Input must be
// finite; values outside [-1,2] are allowed but unexpected.
ScalarField clamp_nonneg(const ScalarField& f);

// Otsu threshold over a fixed 256-bin histogram of the [0,1] range.
// Returns t/255 for the lowest bin index t maximizing between-class variance
// (classes: bins <= t vs > t). A constant field returns its own bin edge.
float otsu_threshold(const ScalarField& f);

// Bilinear resampling with half-pixel-center alignment; source coordinates
// are clamped at the borders.
ScalarField resize_bilinear(const ScalarField& f, int out_w, int out_h);
RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h);

ScalarField flip_horizontal(const ScalarField& f);
RgbImage flip_horizontal(const RgbImage& img);

float field_mean(const ScalarField& f);
float field_min(const ScalarField& f);
float field_max(const ScalarField& f);

} // namespace dsu
