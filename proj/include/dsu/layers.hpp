#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dsu/rng.hpp"
#include "dsu/tensor.hpp"

namespace dsu {

// Named parameter tensor with gradient and Adam moment slots. Running
// batch-norm statistics live here too, flagged non-trainable.
struct Param {
    std::string name;
    std::vector<int> dims;
    std::vector<float> v;
    std::vector<float> g;
    std::vector<float> m;  // Adam first moment
    std::vector<float> v2; // Adam second moment
    bool trainable = true;

    std::size_t size() const { return v.size(); }
};

class ParamSet {
public:
    Param* add(const std::string& name, std::vector<int> dims, bool trainable = true);
    Param* find(const std::string& name);
    const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
    std::vector<Param*> with_prefix(const std::string& prefix) const;
    std::vector<Param*> trainable_with_prefix(const std::string& prefix) const;
    void zero_grads();

private:
    std::vector<std::unique_ptr<Param>> params_;
};

// He fan-in init for conv weights, zeros for biases/shift, ones for scale.
void he_init(Param& w, int fan_in, Rng& rng);

// kernel 3x3 (pad 1) or 1x1 (pad 0), stride 1, zero padding; H and W are
// preserved.
struct Conv2d {
    Param* w = nullptr;
    Param* b = nullptr;
    int in_c = 0, out_c = 0, k = 3;
    Tensor4 x_cache;

    Conv2d() = default;
    Conv2d(ParamSet& ps, const std::string& prefix, int in_c, int out_c, int k, Rng& rng);

    Tensor4 forward(const Tensor4& x);
    Tensor4 backward(const Tensor4& gy); // accumulates into w->g, b->g
};

struct BatchNorm2d {
    Param* scale = nullptr;
    Param* shift = nullptr;
    Param* run_mean = nullptr;
    Param* run_var = nullptr;
    float eps = 1e-5f;
    float momentum = 0.9f;

    Tensor4 xhat_cache;
    std::vector<float> invstd_cache;
    bool train_cache = true;

    BatchNorm2d() = default;
    BatchNorm2d(ParamSet& ps, const std::string& prefix, int channels);

    Tensor4 forward(const Tensor4& x, bool train);
    Tensor4 backward(const Tensor4& gy);
};

struct ReLULayer {
    std::vector<std::uint8_t> mask;
    Tensor4 forward(const Tensor4& x);
    Tensor4 backward(const Tensor4& gy) const;
};

struct SigmoidLayer {
    Tensor4 y_cache;
    Tensor4 forward(const Tensor4& x);
    Tensor4 backward(const Tensor4& gy) const;
};

// 2x2 average pool, stride 2. Requires even H and W.
struct Down2x {
    static Tensor4 forward(const Tensor4& x);
    static Tensor4 backward(const Tensor4& gy);
};

// Nearest-neighbour x2.
struct Up2x {
    static Tensor4 forward(const Tensor4& x);
    static Tensor4 backward(const Tensor4& gy);
};

// conv3x3 + BN + ReLU, the repeated unit of every network here.
struct ConvBlock {
    Conv2d conv;
    BatchNorm2d bn;
    ReLULayer relu;

    ConvBlock() = default;
    ConvBlock(ParamSet& ps, const std::string& prefix, int in_c, int out_c, Rng& rng)
        : conv(ps, prefix + ".conv", in_c, out_c, 3, rng), bn(ps, prefix + ".bn", out_c) {}

    Tensor4 forward(const Tensor4& x, bool train) {
        return relu.forward(bn.forward(conv.forward(x), train));
    }
    Tensor4 backward(const Tensor4& gy) {
        return conv.backward(bn.backward(relu.backward(gy)));
    }
};

} // namespace dsu
