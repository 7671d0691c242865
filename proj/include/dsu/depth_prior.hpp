#pragma once

#include "dsu/scalar_field.hpp"

namespace dsu {

// Fallback pseudo-label when no handcrafted labels are supplied: a centered
// Gaussian prior (sigma = 0.3 * min(H, W)) multiplied by min-max-normalized
// depth contrast |d - mean(d)|, then min-max normalized.
ScalarField simple_depth_prior_init(const ScalarField& d_map);

} // namespace dsu
