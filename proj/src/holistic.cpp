#include "dsu/holistic.hpp"

#include <cmath>

#include "dsu/error.hpp"

namespace dsu {

namespace {
void check_kernel(const GaussianKernelParam& k) {
    if (!(k.sigma > 0.0f)) throw DataError("gaussian kernel: sigma must be > 0");
    if (k.size < 1) throw DataError("gaussian kernel: size must be >= 1");
}
} // namespace

std::vector<float> gaussian_kernel(const GaussianKernelParam& k) {
    check_kernel(k);
    const int K = k.size;
    const int half = K / 2;
    const double s2 = 2.0 * static_cast<double>(k.sigma) * k.sigma;
    std::vector<double> raw(static_cast<std::size_t>(K) * K);
    double sum = 0.0;
    for (int y = 0; y < K; ++y)
        for (int x = 0; x < K; ++x) {
            const double oy = y - half, ox = x - half;
            const double g = std::exp(-(oy * oy + ox * ox) / s2);
            raw[static_cast<std::size_t>(y) * K + x] = g;
            sum += g;
        }
    std::vector<float> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(raw[i] / sum);
    return out;
}

std::vector<float> gaussian_kernel_dsigma(const GaussianKernelParam& k) {
    check_kernel(k);
    const int K = k.size;
    const int half = K / 2;
    const std::vector<float> kern = gaussian_kernel(k);
    // normalized kernel: dk_i/dsigma = k_i (r_i^2 - E_k[r^2]) / sigma^3
    double mean_r2 = 0.0;
    std::size_t i = 0;
    std::vector<double> r2(kern.size());
    for (int y = 0; y < K; ++y)
        for (int x = 0; x < K; ++x, ++i) {
            const double oy = y - half, ox = x - half;
            r2[i] = oy * oy + ox * ox;
            mean_r2 += kern[i] * r2[i];
        }
    const double s3 = static_cast<double>(k.sigma) * k.sigma * k.sigma;
    std::vector<float> out(kern.size());
    for (std::size_t j = 0; j < kern.size(); ++j)
        out[j] = static_cast<float>(kern[j] * (r2[j] - mean_r2) / s3);
    return out;
}

ScalarField conv_field(const ScalarField& s, const std::vector<float>& kernel, int size) {
    if (kernel.size() != static_cast<std::size_t>(size) * size)
        throw DataError("conv_field: kernel length mismatch");
    const int half = size / 2;
    ScalarField out(s.width, s.height);
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < size; ++ky) {
                const int sy = y + ky - half;
                if (sy < 0 || sy >= s.height) continue;
                for (int kx = 0; kx < size; ++kx) {
                    const int sx = x + kx - half;
                    if (sx < 0 || sx >= s.width) continue;
                    acc += static_cast<double>(kernel[static_cast<std::size_t>(ky) * size + kx]) *
                           s.at(sy, sx);
                }
            }
            out.at(y, x) = static_cast<float>(acc);
        }
    }
    return out;
}

HaResult holistic_attention_full(const ScalarField& s, const GaussianKernelParam& k) {
    HaResult r;
    r.blur = conv_field(s, gaussian_kernel(k), k.size);
    r.out = ScalarField(s.width, s.height);
    for (std::size_t i = 0; i < s.size(); ++i)
        r.out.data[i] = std::max(r.blur.data[i], s.data[i]);
    return r;
}

ScalarField holistic_attention(const ScalarField& s, const GaussianKernelParam& k) {
    return holistic_attention_full(s, k).out;
}

} // namespace dsu
