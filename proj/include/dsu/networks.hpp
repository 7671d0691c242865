#pragma once

#include <string>

#include "dsu/layer_spec.hpp"
#include "dsu/layers.hpp"

namespace dsu {

// Encoder of four conv3x3+BN+ReLU blocks with two 2x downsamples, decoder
// with two 2x upsamples and additive skip connections. Output is a C-channel
// feature map at input resolution. Input H and W must be multiples of 4.
struct TrunkNet {
    ConvBlock enc1, enc2, enc3, enc4, dec1, dec2;
    Tensor4 a1_cache, a2_cache; // skip sources

    TrunkNet() = default;
    TrunkNet(ParamSet& ps, const std::string& prefix, int in_c, int c, Rng& rng);

    Tensor4 forward(const Tensor4& x, bool train);
    Tensor4 backward(const Tensor4& g_out);

    static std::vector<LayerSpec> describe(int in_c, int c);
};

// conv1x1 + sigmoid projecting a feature map to a single [0,1] channel.
struct Head1x1 {
    Conv2d conv;
    SigmoidLayer sig;

    Head1x1() = default;
    Head1x1(ParamSet& ps, const std::string& prefix, int in_c, Rng& rng)
        : conv(ps, prefix + ".proj", in_c, 1, 1, rng) {}

    Tensor4 forward(const Tensor4& x) { return sig.forward(conv.forward(x)); }
    Tensor4 backward(const Tensor4& gy) { return conv.backward(sig.backward(gy)); }
};

// Three conv3x3+BN+ReLU blocks producing a disentangled feature, plus a
// conv1x1+sigmoid projection to the matching depth map.
struct DisentangleHead {
    ConvBlock b1, b2, b3;
    Head1x1 proj;

    DisentangleHead() = default;
    DisentangleHead(ParamSet& ps, const std::string& prefix, int c, Rng& rng)
        : b1(ps, prefix + ".b1", c, c, rng), b2(ps, prefix + ".b2", c, c, rng),
          b3(ps, prefix + ".b3", c, c, rng), proj(ps, prefix, c, rng) {}

    Tensor4 forward_feature(const Tensor4& f_depth, bool train) {
        return b3.forward(b2.forward(b1.forward(f_depth, train), train), train);
    }
    Tensor4 forward_map(const Tensor4& feat) { return proj.forward(feat); }

    // g_map: grad of the loss wrt the projected map; g_feat_extra: grad
    // arriving at the feature from other consumers (regenerated-feature sum,
    // consistency loss). Returns grad wrt the trunk feature.
    Tensor4 backward(const Tensor4& g_map, const Tensor4& g_feat_extra) {
        Tensor4 g_feat = add(proj.backward(g_map), g_feat_extra);
        return b1.backward(b2.backward(b3.backward(g_feat)));
    }
};

// RGB -> saliency probability map, the only network used at inference.
struct SaliencyNet {
    TrunkNet trunk;
    Head1x1 head;

    SaliencyNet() = default;
    SaliencyNet(ParamSet& ps, const std::string& prefix, int c, Rng& rng)
        : trunk(ps, prefix + ".trunk", 3, c, rng), head(ps, prefix, c, rng) {}

    Tensor4 forward(const Tensor4& rgb, bool train) {
        return head.forward(trunk.forward(rgb, train));
    }
    void backward(const Tensor4& g_pred) { trunk.backward(head.backward(g_pred)); }

    static std::vector<LayerSpec> describe(int c);
};

std::vector<LayerSpec> describe_disentangle_head(int c);
std::vector<LayerSpec> describe_scoring_head(int c);

Tensor4 rgb_to_tensor(const RgbImage& img);

} // namespace dsu
