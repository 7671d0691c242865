#include "dsu/losses.hpp"

#include <algorithm>
#include <cmath>

namespace dsu {

double mse(const Tensor4& pred, const Tensor4& target) {
    if (!pred.same_shape(target)) throw DataError("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred.v[i]) - target.v[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

Tensor4 mse_grad(const Tensor4& pred, const Tensor4& target, double scale) {
    if (!pred.same_shape(target)) throw DataError("mse_grad: shape mismatch");
    Tensor4 g(pred.n, pred.c, pred.h, pred.w);
    const double k = 2.0 * scale / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        g.v[i] = static_cast<float>(k * (static_cast<double>(pred.v[i]) - target.v[i]));
    return g;
}

std::vector<double> bce_per_sample(const Tensor4& pred, const Tensor4& target) {
    if (!pred.same_shape(target)) throw DataError("bce: shape mismatch");
    const std::size_t per_n = pred.size() / static_cast<std::size_t>(pred.n);
    std::vector<double> out(pred.n, 0.0);
    for (int n = 0; n < pred.n; ++n) {
        double s = 0.0;
        const float* p = pred.v.data() + per_n * n;
        const float* t = target.v.data() + per_n * n;
        for (std::size_t i = 0; i < per_n; ++i) {
            const double pc = std::clamp(p[i], kBceClamp, 1.0f - kBceClamp);
            s -= t[i] * std::log(pc) + (1.0 - t[i]) * std::log(1.0 - pc);
        }
        out[n] = s / static_cast<double>(per_n);
    }
    return out;
}

Tensor4 bce_grad(const Tensor4& pred, const Tensor4& target, const std::vector<double>& coeff) {
    if (!pred.same_shape(target)) throw DataError("bce_grad: shape mismatch");
    if (coeff.size() != static_cast<std::size_t>(pred.n))
        throw DataError("bce_grad: coefficient count mismatch");
    const std::size_t per_n = pred.size() / static_cast<std::size_t>(pred.n);
    Tensor4 g(pred.n, pred.c, pred.h, pred.w);
    for (int n = 0; n < pred.n; ++n) {
        const double k = coeff[n] / static_cast<double>(per_n);
        const float* p = pred.v.data() + per_n * n;
        const float* t = target.v.data() + per_n * n;
        float* gp = g.v.data() + per_n * n;
        for (std::size_t i = 0; i < per_n; ++i) {
            const double pc = std::clamp(p[i], kBceClamp, 1.0f - kBceClamp);
            // dl/dp = (p - t) / (p (1 - p)), clamp treated as pass-through
            gp[i] = static_cast<float>(k * (pc - t[i]) / (pc * (1.0 - pc)));
        }
    }
    return g;
}

} // namespace dsu
