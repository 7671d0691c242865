#include "dsu/networks.hpp"

namespace dsu {

TrunkNet::TrunkNet(ParamSet& ps, const std::string& prefix, int in_c, int c, Rng& rng)
    : enc1(ps, prefix + ".enc1", in_c, c, rng), enc2(ps, prefix + ".enc2", c, c, rng),
      enc3(ps, prefix + ".enc3", c, c, rng), enc4(ps, prefix + ".enc4", c, c, rng),
      dec1(ps, prefix + ".dec1", c, c, rng), dec2(ps, prefix + ".dec2", c, c, rng) {}

Tensor4 TrunkNet::forward(const Tensor4& x, bool train) {
    if (x.h % 4 != 0 || x.w % 4 != 0)
        throw DataError("trunk: input H and W must be multiples of 4");
    a1_cache = enc1.forward(x, train);
    Tensor4 p1 = Down2x::forward(a1_cache);
    a2_cache = enc2.forward(p1, train);
    Tensor4 p2 = Down2x::forward(a2_cache);
    Tensor4 a3 = enc3.forward(p2, train);
    Tensor4 a4 = enc4.forward(a3, train);
    Tensor4 s1 = add(Up2x::forward(a4), a2_cache);
    Tensor4 d1 = dec1.forward(s1, train);
    Tensor4 s2 = add(Up2x::forward(d1), a1_cache);
    return dec2.forward(s2, train);
}

Tensor4 TrunkNet::backward(const Tensor4& g_out) {
    Tensor4 g_s2 = dec2.backward(g_out);
    Tensor4 g_d1 = Up2x::backward(g_s2); // the other branch of s2 is the a1 skip
    Tensor4 g_s1 = dec1.backward(g_d1);
    Tensor4 g_a4 = Up2x::backward(g_s1);
    Tensor4 g_a3 = enc4.backward(g_a4);
    Tensor4 g_p2 = enc3.backward(g_a3);
    Tensor4 g_a2 = add(g_s1, Down2x::backward(g_p2));
    Tensor4 g_p1 = enc2.backward(g_a2);
    Tensor4 g_a1 = add(g_s2, Down2x::backward(g_p1));
    return enc1.backward(g_a1);
}

namespace {
void push_block(std::vector<LayerSpec>& v, int in_c, int out_c) {
    v.push_back({LayerKind::Conv3x3, in_c, out_c});
    v.push_back({LayerKind::BatchNorm, out_c, out_c});
    v.push_back({LayerKind::ReLU, out_c, out_c});
}
} // namespace

std::vector<LayerSpec> TrunkNet::describe(int in_c, int c) {
    std::vector<LayerSpec> v;
    push_block(v, in_c, c);                        // enc1
    v.push_back({LayerKind::Downsample2x, c, c});
    push_block(v, c, c);                           // enc2
    v.push_back({LayerKind::Downsample2x, c, c});
    push_block(v, c, c);                           // enc3
    push_block(v, c, c);                           // enc4
    v.push_back({LayerKind::Upsample2x, c, c});    // + skip from enc2
    push_block(v, c, c);                           // dec1
    v.push_back({LayerKind::Upsample2x, c, c});    // + skip from enc1
    push_block(v, c, c);                           // dec2
    return v;
}

std::vector<LayerSpec> describe_scoring_head(int c) {
    return {{LayerKind::Conv1x1, c, 1}, {LayerKind::Sigmoid, 1, 1}};
}

std::vector<LayerSpec> SaliencyNet::describe(int c) {
    std::vector<LayerSpec> v = TrunkNet::describe(3, c);
    for (const LayerSpec& l : describe_scoring_head(c)) v.push_back(l);
    return v;
}

std::vector<LayerSpec> describe_disentangle_head(int c) {
    std::vector<LayerSpec> v;
    push_block(v, c, c);
    push_block(v, c, c);
    push_block(v, c, c);
    for (const LayerSpec& l : describe_scoring_head(c)) v.push_back(l);
    return v;
}

Tensor4 rgb_to_tensor(const RgbImage& img) {
    Tensor4 t(1, 3, img.height, img.width);
    for (int c = 0; c < 3; ++c) {
        float* p = t.plane(0, c);
        for (std::size_t i = 0; i < img.pixels(); ++i) p[i] = img.plane[c][i];
    }
    return t;
}

} // namespace dsu
