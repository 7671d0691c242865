#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dsu/error.hpp"
#include "dsu/scalar_field.hpp"

namespace dsu {

// N x C x H x W array of 32-bit reals with an optional same-shape gradient
// buffer. Gradients flowing between layers travel in the value slot of a
// separate Tensor4.
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<float> v;
    std::vector<float> g; // empty, or same length as v

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, float fill = 0.0f)
        : n(n_), c(c_), h(h_), w(w_),
          v(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    std::size_t idx(int in, int ic, int iy, int ix) const {
        return ((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix;
    }
    float& at(int in, int ic, int iy, int ix) { return v[idx(in, ic, iy, ix)]; }
    float at(int in, int ic, int iy, int ix) const { return v[idx(in, ic, iy, ix)]; }

    float* plane(int in, int ic) { return v.data() + (static_cast<std::size_t>(in) * c + ic) * h * w; }
    const float* plane(int in, int ic) const {
        return v.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
    }

    void alloc_grad() { g.assign(v.size(), 0.0f); }

    bool all_finite() const {
        for (const float x : v)
            if (!std::isfinite(x)) return false;
        for (const float x : g)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline Tensor4 add(const Tensor4& a, const Tensor4& b) {
    if (!a.same_shape(b)) throw DataError("tensor add: shape mismatch");
    Tensor4 out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += b.v[i];
    return out;
}

// One sample, one channel of a batch tensor as a field.
inline ScalarField slice_field(const Tensor4& t, int in, int ic) {
    ScalarField f(t.w, t.h);
    const float* p = t.plane(in, ic);
    for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = p[i];
    return f;
}

inline void set_slice(Tensor4& t, int in, int ic, const ScalarField& f) {
    if (f.width != t.w || f.height != t.h) throw DataError("set_slice: shape mismatch");
    float* p = t.plane(in, ic);
    for (std::size_t i = 0; i < f.size(); ++i) p[i] = f.data[i];
}

} // namespace dsu
