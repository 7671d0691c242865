#include "dsu/disentangle.hpp"

#include <cmath>

#include "dsu/losses.hpp"

namespace dsu {

std::pair<ScalarField, ScalarField> build_masks_unsup(const ScalarField& sal_pred,
                                                      const ScalarField& d_map,
                                                      const GaussianKernelParam& k) {
    if (!sal_pred.same_shape(d_map)) throw DataError("build_masks_unsup: dimension mismatch");
    ScalarField inv(sal_pred.width, sal_pred.height);
    for (std::size_t i = 0; i < inv.size(); ++i) inv.data[i] = 1.0f - sal_pred.data[i];

    ScalarField ha_sal = holistic_attention(sal_pred, k);
    ScalarField ha_inv = holistic_attention(inv, k);
    ScalarField d_sal(sal_pred.width, sal_pred.height);
    ScalarField d_nonsal(sal_pred.width, sal_pred.height);
    for (std::size_t i = 0; i < d_sal.size(); ++i) {
        d_sal.data[i] = ha_sal.data[i] * d_map.data[i];
        d_nonsal.data[i] = ha_inv.data[i] * d_map.data[i];
    }
    return {std::move(d_sal), std::move(d_nonsal)};
}

std::pair<ScalarField, ScalarField> build_masks_supervised(const ScalarField& s_gt,
                                                           const ScalarField& d_map) {
    if (!s_gt.same_shape(d_map)) throw DataError("build_masks_supervised: dimension mismatch");
    for (const float v : s_gt.data)
        if (std::fabs(v) > 1e-6f && std::fabs(v - 1.0f) > 1e-6f)
            throw DataError("build_masks_supervised: ground truth must be binary");
    ScalarField d_sal(s_gt.width, s_gt.height);
    ScalarField d_nonsal(s_gt.width, s_gt.height);
    for (std::size_t i = 0; i < d_sal.size(); ++i) {
        d_sal.data[i] = s_gt.data[i] * d_map.data[i];
        d_nonsal.data[i] = (1.0f - s_gt.data[i]) * d_map.data[i];
    }
    return {std::move(d_sal), std::move(d_nonsal)};
}

double consistency_loss(const Tensor4& f, const Tensor4& f_tilde, ConsistencyMode mode) {
    if (!f.same_shape(f_tilde)) throw DataError("consistency_loss: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = static_cast<double>(f.v[i]) - f_tilde.v[i];
        s += mode == ConsistencyMode::L1 ? std::fabs(d) : d * d;
    }
    return s / static_cast<double>(f.size());
}

std::pair<ScalarField, ScalarField> DepthModel::infer_maps(const Tensor4& rgb) {
    Tensor4 f = trunk.forward(rgb, /*train=*/false);
    Tensor4 fs = dsal.forward_feature(f, false);
    Tensor4 ds = dsal.forward_map(fs);
    Tensor4 fn = dnonsal.forward_feature(f, false);
    Tensor4 dn = dnonsal.forward_map(fn);
    return {slice_field(ds, 0, 0), slice_field(dn, 0, 0)};
}

DepthLossBreakdown depth_objective(DepthModel& model, const DepthBatch& batch,
                                   const DepthObjectiveConfig& cfg, bool train, bool backprop) {
    const int N = batch.rgb.n;
    if (static_cast<int>(batch.d_map.size()) != N || static_cast<int>(batch.sal_pred.size()) != N)
        throw DataError("depth_objective: batch size mismatch");
    const int H = batch.rgb.h, W = batch.rgb.w;

    Tensor4 dmap_t(N, 1, H, W);
    for (int n = 0; n < N; ++n) set_slice(dmap_t, n, 0, batch.d_map[n]);

    // attention masks from the detached predictions; sigma stays live
    const GaussianKernelParam kern = model.kernel();
    std::vector<HaResult> ha_sal(N), ha_inv(N);
    Tensor4 label_sal(N, 1, H, W), label_nonsal(N, 1, H, W);
    std::vector<ScalarField> inv_pred(N);
    for (int n = 0; n < N; ++n) {
        const ScalarField& sp = batch.sal_pred[n];
        if (sp.width != W || sp.height != H) throw DataError("depth_objective: field size mismatch");
        inv_pred[n] = ScalarField(W, H);
        for (std::size_t i = 0; i < sp.size(); ++i) inv_pred[n].data[i] = 1.0f - sp.data[i];
        ha_sal[n] = holistic_attention_full(sp, kern);
        ha_inv[n] = holistic_attention_full(inv_pred[n], kern);
        float* ls = label_sal.plane(n, 0);
        float* ln = label_nonsal.plane(n, 0);
        const float* dm = dmap_t.plane(n, 0);
        for (std::size_t i = 0; i < sp.size(); ++i) {
            ls[i] = ha_sal[n].out.data[i] * dm[i];
            ln[i] = ha_inv[n].out.data[i] * dm[i];
        }
    }

    // forward
    Tensor4 f = model.trunk.forward(batch.rgb, train);
    Tensor4 d1 = model.depth_head.forward(f);
    DepthLossBreakdown out;
    out.lambda = cfg.lambda;
    out.l_d1 = mse(d1, dmap_t);

    Tensor4 g_f(f.n, f.c, f.h, f.w); // grad wrt the trunk feature, accumulated
    if (backprop) {
        Tensor4 g_d1 = mse_grad(d1, dmap_t, 1.0 / 5.0);
        g_f = model.depth_head.backward(g_d1);
    }

    Tensor4 fs = model.dsal.forward_feature(f, train);
    Tensor4 ds = model.dsal.forward_map(fs);
    out.l_sal = mse(ds, label_sal);

    Tensor4 fn = model.dnonsal.forward_feature(f, train);
    Tensor4 dn = model.dnonsal.forward_map(fn);
    out.l_nonsal = mse(dn, label_nonsal);

    Tensor4 ft = add(fs, fn);
    Tensor4 d2 = model.depth_head.forward(ft); // head cache reused after d1 backward
    out.l_d2 = mse(d2, dmap_t);
    out.l_con = consistency_loss(f, ft, cfg.consistency);

    if (!backprop) return out;

    // grads wrt the regenerated feature: l_d2 through the shared head plus
    // the consistency term
    Tensor4 g_ft = model.depth_head.backward(mse_grad(d2, dmap_t, 1.0 / 5.0));
    const double kcon = cfg.lambda / 5.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = static_cast<double>(f.v[i]) - ft.v[i];
        const double gc = cfg.consistency == ConsistencyMode::L1
                              ? kcon * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0))
                              : kcon * 2.0 * d;
        g_f.v[i] += static_cast<float>(gc);
        g_ft.v[i] -= static_cast<float>(gc);
    }

    Tensor4 g_ds = mse_grad(ds, label_sal, 1.0 / 5.0);
    Tensor4 g_dn = mse_grad(dn, label_nonsal, 1.0 / 5.0);

    // sigma through the mask labels: dL/dsigma = sum dL/dlabel * dlabel/dsigma
    // with dlabel/dsigma = d_map * [blur > s] * conv(s, dkernel/dsigma)
    const std::vector<float> dkern = gaussian_kernel_dsigma(kern);
    double g_sigma = 0.0;
    const std::size_t px = static_cast<std::size_t>(H) * W;
    const double label_grad_scale = -1.0; // dL/dlabel = -dL/dpred entrywise for MSE
    for (int n = 0; n < N; ++n) {
        const ScalarField dblur_s = conv_field(batch.sal_pred[n], dkern, kern.size);
        const ScalarField dblur_i = conv_field(inv_pred[n], dkern, kern.size);
        const float* gs = g_ds.plane(n, 0);
        const float* gn = g_dn.plane(n, 0);
        const float* dm = dmap_t.plane(n, 0);
        for (std::size_t i = 0; i < px; ++i) {
            if (ha_sal[n].blur.data[i] > batch.sal_pred[n].data[i])
                g_sigma += label_grad_scale * gs[i] * dm[i] * dblur_s.data[i];
            if (ha_inv[n].blur.data[i] > inv_pred[n].data[i])
                g_sigma += label_grad_scale * gn[i] * dm[i] * dblur_i.data[i];
        }
    }
    model.sigma->g[0] += static_cast<float>(g_sigma);

    // back through the disentangle heads and the trunk
    Tensor4 g_f_sal = model.dsal.backward(g_ds, g_ft);
    Tensor4 g_f_non = model.dnonsal.backward(g_dn, g_ft);
    for (std::size_t i = 0; i < g_f.size(); ++i) g_f.v[i] += g_f_sal.v[i] + g_f_non.v[i];
    model.trunk.backward(g_f);
    return out;
}

} // namespace dsu
