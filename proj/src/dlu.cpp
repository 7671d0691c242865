#include "dsu/dlu.hpp"

namespace dsu {

ScalarField dlu_combine(const ScalarField& sal_pred, const ScalarField& d_sal,
                        const ScalarField& d_nonsal) {
    if (!sal_pred.same_shape(d_sal) || !sal_pred.same_shape(d_nonsal))
        throw DataError("dlu_combine: dimension mismatch");
    ScalarField temp(sal_pred.width, sal_pred.height);
    for (std::size_t i = 0; i < temp.size(); ++i)
        temp.data[i] = sal_pred.data[i] + d_sal.data[i] - d_nonsal.data[i];
    return minmax_normalize(clamp_nonneg(temp));
}

void PseudoLabelStore::insert(const std::string& id, ScalarField label) {
    check_unit_range(label, "pseudo-label");
    if (entries_.count(id) == 0) order_.push_back(id);
    entries_[id] = Entry{std::move(label), 0};
}

const ScalarField& PseudoLabelStore::label(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw DataError("pseudo-label store: unknown sample " + id);
    return it->second.label;
}

int PseudoLabelStore::round(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw DataError("pseudo-label store: unknown sample " + id);
    return it->second.round;
}

std::vector<std::string> PseudoLabelStore::ids() const { return order_; }

void PseudoLabelStore::stage(UpdateRecord record) {
    check_unit_range(record.post_update, "updated pseudo-label");
    staged_.push_back(std::move(record));
}

std::vector<UpdateRecord> PseudoLabelStore::commit_round() {
    std::vector<UpdateRecord> done;
    done.swap(staged_);
    for (auto& rec : done) {
        auto it = entries_.find(rec.sample_id);
        if (it == entries_.end())
            throw DataError("pseudo-label store: staged update for unknown sample " + rec.sample_id);
        it->second.label = rec.post_update;
        it->second.round += 1;
        rec.round = it->second.round;
    }
    return done;
}

UpdateRecord update_pseudo_label(const std::string& sample_id, const RgbImage& rgb,
                                 SaliencyNet& saliency, DepthModel& depth,
                                 const CrfParams& crf, const PseudoLabelStore& store) {
    const Tensor4 x = rgb_to_tensor(rgb);
    Tensor4 pred = saliency.forward(x, /*train=*/false);
    const ScalarField sal_pred = slice_field(pred, 0, 0);
    auto [d_sal, d_nonsal] = depth.infer_maps(x);

    const ScalarField s_n = dlu_combine(sal_pred, d_sal, d_nonsal);
    ScalarField s_map = densecrf_refine(rgb, s_n, crf);

    UpdateRecord rec;
    rec.sample_id = sample_id;
    rec.round = store.round(sample_id) + 1;
    rec.pre_update = store.label(sample_id);
    rec.post_update = std::move(s_map);
    return rec;
}

} // namespace dsu
