#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsu/densecrf.hpp"
#include "dsu/disentangle.hpp"
#include "dsu/field_ops.hpp"

namespace dsu {

// Depth-disentangled label update:
//   S_temp = sal_pred + d_sal - d_nonsal
//   S_N    = minmax_normalize(clamp_nonneg(S_temp))
ScalarField dlu_combine(const ScalarField& sal_pred, const ScalarField& d_sal,
                        const ScalarField& d_nonsal);

struct UpdateRecord {
    std::string sample_id;
    int round = 0;
    ScalarField pre_update;
    ScalarField post_update; // the new S_map
};

// Per-sample current pseudo-label plus update-round provenance. Writers
// stage changes and commit them in one batch at a round boundary.
class PseudoLabelStore {
public:
    void insert(const std::string& id, ScalarField label);
    const ScalarField& label(const std::string& id) const;
    int round(const std::string& id) const;
    std::vector<std::string> ids() const; // insertion order

    void stage(UpdateRecord record);
    // Applies all staged updates; every touched sample's round advances by 1.
    std::vector<UpdateRecord> commit_round();

private:
    struct Entry {
        ScalarField label;
        int round = 0;
    };
    std::map<std::string, Entry> entries_;
    std::vector<std::string> order_;
    std::vector<UpdateRecord> staged_;
};

// One DLU pass for one sample with frozen networks (eval-mode batch norm):
// saliency + depth forwards, dlu_combine, CRF refinement.
UpdateRecord update_pseudo_label(const std::string& sample_id, const RgbImage& rgb,
                                 SaliencyNet& saliency, DepthModel& depth,
                                 const CrfParams& crf, const PseudoLabelStore& store);

} // namespace dsu
