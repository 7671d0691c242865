#pragma once

#include <utility>
#include <vector>

#include "dsu/holistic.hpp"
#include "dsu/networks.hpp"

namespace dsu {

// Saliency- and non-saliency-guided depth masks from a rough prediction:
//   d_sal    = HA(sal_pred)     (x) d_map
//   d_nonsal = HA(1 - sal_pred) (x) d_map
std::pair<ScalarField, ScalarField> build_masks_unsup(const ScalarField& sal_pred,
                                                      const ScalarField& d_map,
                                                      const GaussianKernelParam& k);

// Supervised variant: masks from a binary ground-truth map, without the
// attention smoothing. The two outputs partition d_map exactly.
std::pair<ScalarField, ScalarField> build_masks_supervised(const ScalarField& s_gt,
                                                           const ScalarField& d_map);

enum class ConsistencyMode { L1, L2 };

// Mean per-entry distance between the original and regenerated depth
// features over H*W*C positions.
double consistency_loss(const Tensor4& f, const Tensor4& f_tilde,
                        ConsistencyMode mode = ConsistencyMode::L1);

struct DepthLossBreakdown {
    double l_d1 = 0.0;     // depth head on the trunk feature
    double l_d2 = 0.0;     // depth head on the regenerated feature
    double l_sal = 0.0;    // D_Sal vs saliency-guided mask
    double l_nonsal = 0.0; // D_NonSal vs non-saliency-guided mask
    double l_con = 0.0;    // feature consistency
    double lambda = 0.02;

    double total() const { return (l_d1 + l_d2 + l_sal + l_nonsal + lambda * l_con) / 5.0; }
};

// The depth side of the pipeline: trunk, shared scoring head (used for both
// the trunk feature and the regenerated one), the two disentangle heads and
// the learnable attention sigma.
struct DepthModel {
    TrunkNet trunk;
    Head1x1 depth_head;
    DisentangleHead dsal;
    DisentangleHead dnonsal;
    Param* sigma = nullptr;
    int ha_size = 6;

    DepthModel() = default;
    DepthModel(ParamSet& ps, int channels, int ha_size_, float sigma_init, Rng& rng)
        : trunk(ps, "depth.trunk", 3, channels, rng), depth_head(ps, "dhead", channels, rng),
          dsal(ps, "dsal", channels, rng), dnonsal(ps, "dnonsal", channels, rng),
          ha_size(ha_size_) {
        sigma = ps.add("ha.sigma", {1});
        sigma->v[0] = sigma_init;
    }

    GaussianKernelParam kernel() const { return {ha_size, sigma->v[0]}; }

    // Frozen-parameter inference of D_Sal / D_NonSal for one image.
    std::pair<ScalarField, ScalarField> infer_maps(const Tensor4& rgb);
};

struct DepthBatch {
    Tensor4 rgb;                        // N x 3 x H x W
    std::vector<ScalarField> d_map;     // N depth maps
    std::vector<ScalarField> sal_pred;  // N detached saliency predictions
};

struct DepthObjectiveConfig {
    double lambda = 0.02;
    ConsistencyMode consistency = ConsistencyMode::L1;
};

// Combined five-term depth objective: forward always; when backprop is set the
// parameter gradients (including sigma through the attention masks) are
// accumulated.
DepthLossBreakdown depth_objective(DepthModel& model, const DepthBatch& batch,
                                   const DepthObjectiveConfig& cfg, bool train, bool backprop);

} // namespace dsu
