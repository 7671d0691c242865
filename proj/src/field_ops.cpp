#include "dsu/field_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace dsu {

ScalarField make_unit_field(int w, int h, std::vector<float> data) {
    ScalarField f(w, h, std::move(data));
    check_unit_range(f, "field");
    return f;
}

void check_unit_range(const ScalarField& f, const char* what) {
    for (const float v : f.data) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw DataError(std::string(what) + ": value outside [0,1] or non-finite");
    }
}

float field_min(const ScalarField& f) {
    float m = std::numeric_limits<float>::infinity();
    for (const float v : f.data) m = std::min(m, v);
    return m;
}

float field_max(const ScalarField& f) {
    float m = -std::numeric_limits<float>::infinity();
    for (const float v : f.data) m = std::max(m, v);
    return m;
}

float field_mean(const ScalarField& f) {
    double s = 0.0;
    for (const float v : f.data) s += v;
    return static_cast<float>(s / static_cast<double>(f.size()));
}

ScalarField minmax_normalize(const ScalarField& f) {
    const float lo = field_min(f);
    const float hi = field_max(f);
    ScalarField out(f.width, f.height);
    if (!(hi > lo)) return out; // constant input -> all zeros
    const float inv = 1.0f / (hi - lo);
    for (std::size_t i = 0; i < f.size(); ++i) out.data[i] = (f.data[i] - lo) * inv;
    return out;
}

ScalarField clamp_nonneg(const ScalarField& f) {
    ScalarField out(f.width, f.height);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const float v = f.data[i];
        if (!std::isfinite(v)) throw NumericError("clamp_nonneg: non-finite input value");
        out.data[i] = v < 0.0f ? 0.0f : v;
    }
    return out;
}

namespace {
int bin_of(float v) {
    int b = static_cast<int>(v * 256.0f);
    if (b < 0) b = 0;
    if (b > 255) b = 255;
    return b;
}
} // namespace

float otsu_threshold(const ScalarField& f) {
    std::array<std::int64_t, 256> hist{};
    for (const float v : f.data) ++hist[bin_of(v)];

    int lo = 255, hi = 0;
    for (int b = 0; b < 256; ++b)
        if (hist[b] > 0) {
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
    if (lo >= hi) return static_cast<float>(lo) / 255.0f; // constant field

    std::int64_t total_w = 0, total_sum = 0;
    for (int b = 0; b < 256; ++b) {
        total_w += hist[b];
        total_sum += hist[b] * b;
    }

    // between-class variance w0*w1*(m0-m1)^2 = a^2/b with
    // a = sum0*W - w0*S and b = w0*w1; compared exactly in 128-bit integers
    // so ties break toward the lower threshold without rounding ambiguity
    int best_t = -1;
    __int128 best_a2 = 0;
    std::int64_t best_b = 1;
    std::int64_t w0 = 0, sum0 = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += hist[t] * t;
        const std::int64_t w1 = total_w - w0;
        if (w0 == 0) continue;
        if (w1 == 0) break;
        const __int128 a = static_cast<__int128>(sum0) * total_w -
                           static_cast<__int128>(w0) * total_sum;
        const __int128 a2 = a * a;
        const std::int64_t b = w0 * w1;
        if (best_t < 0 || a2 * best_b > best_a2 * b) {
            best_a2 = a2;
            best_b = b;
            best_t = t;
        }
    }
    return static_cast<float>(best_t) / 255.0f;
}

namespace {

struct Lerp {
    int i0, i1;
    float w1; // weight of i1; weight of i0 is 1-w1
};

Lerp axis_lerp(int out_i, int in_n, int out_n) {
    // half-pixel centers, clamped at the borders
    const float src = (static_cast<float>(out_i) + 0.5f) * static_cast<float>(in_n) /
                          static_cast<float>(out_n) -
                      0.5f;
    if (src <= 0.0f) return {0, 0, 0.0f};
    if (src >= static_cast<float>(in_n - 1)) return {in_n - 1, in_n - 1, 0.0f};
    const int i0 = static_cast<int>(src);
    return {i0, i0 + 1, src - static_cast<float>(i0)};
}

} // namespace

ScalarField resize_bilinear(const ScalarField& f, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DataError("resize_bilinear: target dimensions must be >= 1");
    ScalarField out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const Lerp ly = axis_lerp(y, f.height, out_h);
        for (int x = 0; x < out_w; ++x) {
            const Lerp lx = axis_lerp(x, f.width, out_w);
            const float top = f.at(ly.i0, lx.i0) * (1.0f - lx.w1) + f.at(ly.i0, lx.i1) * lx.w1;
            const float bot = f.at(ly.i1, lx.i0) * (1.0f - lx.w1) + f.at(ly.i1, lx.i1) * lx.w1;
            out.at(y, x) = top * (1.0f - ly.w1) + bot * ly.w1;
        }
    }
    return out;
}

RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
    RgbImage out(out_w, out_h);
    for (int c = 0; c < 3; ++c) {
        ScalarField p(img.width, img.height, img.plane[c]);
        out.plane[c] = resize_bilinear(p, out_w, out_h).data;
    }
    return out;
}

ScalarField flip_horizontal(const ScalarField& f) {
    ScalarField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(y, x) = f.at(y, f.width - 1 - x);
    return out;
}

RgbImage flip_horizontal(const RgbImage& img) {
    RgbImage out(img.width, img.height);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) out.at(c, y, x) = img.at(c, y, img.width - 1 - x);
    return out;
}

} // namespace dsu
