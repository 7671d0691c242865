#include "dsu/layers.hpp"

#include <algorithm>
#include <cmath>

namespace dsu {

Param* ParamSet::add(const std::string& name, std::vector<int> dims, bool trainable) {
    std::size_t sz = 1;
    for (const int d : dims) sz *= static_cast<std::size_t>(d);
    auto p = std::make_unique<Param>();
    p->name = name;
    p->dims = std::move(dims);
    p->v.assign(sz, 0.0f);
    p->g.assign(sz, 0.0f);
    p->m.assign(sz, 0.0f);
    p->v2.assign(sz, 0.0f);
    p->trainable = trainable;
    params_.push_back(std::move(p));
    return params_.back().get();
}

Param* ParamSet::find(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

std::vector<Param*> ParamSet::with_prefix(const std::string& prefix) const {
    std::vector<Param*> out;
    for (const auto& p : params_)
        if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
    return out;
}

std::vector<Param*> ParamSet::trainable_with_prefix(const std::string& prefix) const {
    std::vector<Param*> out;
    for (Param* p : with_prefix(prefix))
        if (p->trainable) out.push_back(p);
    return out;
}

void ParamSet::zero_grads() {
    for (auto& p : params_) std::fill(p->g.begin(), p->g.end(), 0.0f);
}

void he_init(Param& w, int fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (float& x : w.v) x = static_cast<float>(rng.normal() * std);
}

// ---- Conv2d ----

Conv2d::Conv2d(ParamSet& ps, const std::string& prefix, int in_c_, int out_c_, int k_, Rng& rng)
    : in_c(in_c_), out_c(out_c_), k(k_) {
    w = ps.add(prefix + ".w", {out_c, in_c, k, k});
    b = ps.add(prefix + ".b", {out_c});
    he_init(*w, in_c * k * k, rng);
}

Tensor4 Conv2d::forward(const Tensor4& x) {
    if (x.c != in_c) throw DataError("conv " + w->name + ": channel mismatch");
    x_cache = x;
    const int pad = k / 2;
    Tensor4 out(x.n, out_c, x.h, x.w);
    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < out_c; ++oc) {
            float* op = out.plane(in, oc);
            const float bias = b->v[oc];
            for (int i = 0; i < x.h * x.w; ++i) op[i] = bias;
            for (int ic = 0; ic < in_c; ++ic) {
                const float* ip = x.plane(in, ic);
                for (int ky = 0; ky < k; ++ky) {
                    const int dy = ky - pad;
                    const int y0 = std::max(0, -dy), y1 = std::min(x.h, x.h - dy);
                    for (int kx = 0; kx < k; ++kx) {
                        const int dx = kx - pad;
                        const float wv = w->v[((static_cast<std::size_t>(oc) * in_c + ic) * k + ky) * k + kx];
                        const int x0 = std::max(0, -dx), x1 = std::min(x.w, x.w - dx);
                        for (int y = y0; y < y1; ++y) {
                            float* orow = op + y * x.w;
                            const float* irow = ip + (y + dy) * x.w + dx;
                            for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * irow[xx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor4 Conv2d::backward(const Tensor4& gy) {
    const Tensor4& x = x_cache;
    if (gy.n != x.n || gy.c != out_c || gy.h != x.h || gy.w != x.w)
        throw DataError("conv backward " + w->name + ": shape mismatch");
    const int pad = k / 2;
    Tensor4 gx(x.n, in_c, x.h, x.w);

    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < out_c; ++oc) {
            const float* gp = gy.plane(in, oc);
            double bsum = 0.0;
            for (int i = 0; i < x.h * x.w; ++i) bsum += gp[i];
            b->g[oc] += static_cast<float>(bsum);

            for (int ic = 0; ic < in_c; ++ic) {
                const float* ip = x.plane(in, ic);
                float* gxp = gx.plane(in, ic);
                for (int ky = 0; ky < k; ++ky) {
                    const int dy = ky - pad;
                    const int y0 = std::max(0, -dy), y1 = std::min(x.h, x.h - dy);
                    for (int kx = 0; kx < k; ++kx) {
                        const int dx = kx - pad;
                        const int x0 = std::max(0, -dx), x1 = std::min(x.w, x.w - dx);
                        const std::size_t widx =
                            ((static_cast<std::size_t>(oc) * in_c + ic) * k + ky) * k + kx;
                        const float wv = w->v[widx];
                        double wsum = 0.0;
                        for (int y = y0; y < y1; ++y) {
                            const float* grow = gp + y * x.w;
                            const float* irow = ip + (y + dy) * x.w + dx;
                            float* gxrow = gxp + (y + dy) * x.w + dx;
                            for (int xx = x0; xx < x1; ++xx) {
                                wsum += static_cast<double>(grow[xx]) * irow[xx];
                                gxrow[xx] += wv * grow[xx];
                            }
                        }
                        w->g[widx] += static_cast<float>(wsum);
                    }
                }
            }
        }
    }
    return gx;
}

// ---- BatchNorm2d ----

BatchNorm2d::BatchNorm2d(ParamSet& ps, const std::string& prefix, int channels) {
    scale = ps.add(prefix + ".scale", {channels});
    shift = ps.add(prefix + ".shift", {channels});
    run_mean = ps.add(prefix + ".run_mean", {channels}, /*trainable=*/false);
    run_var = ps.add(prefix + ".run_var", {channels}, /*trainable=*/false);
    std::fill(scale->v.begin(), scale->v.end(), 1.0f);
    std::fill(run_var->v.begin(), run_var->v.end(), 1.0f);
}

Tensor4 BatchNorm2d::forward(const Tensor4& x, bool train) {
    const int C = static_cast<int>(scale->size());
    if (x.c != C) throw DataError("batchnorm " + scale->name + ": channel mismatch");
    const std::size_t per_c = static_cast<std::size_t>(x.n) * x.h * x.w;
    if (per_c == 0) throw DataError("batchnorm: zero spatial extent");

    train_cache = train;
    invstd_cache.assign(C, 0.0f);
    Tensor4 out(x.n, x.c, x.h, x.w);
    xhat_cache = Tensor4(x.n, x.c, x.h, x.w);

    for (int c = 0; c < C; ++c) {
        float mean, var;
        if (train) {
            double s = 0.0;
            for (int in = 0; in < x.n; ++in) {
                const float* p = x.plane(in, c);
                for (int i = 0; i < x.h * x.w; ++i) s += p[i];
            }
            mean = static_cast<float>(s / static_cast<double>(per_c));
            double sq = 0.0;
            for (int in = 0; in < x.n; ++in) {
                const float* p = x.plane(in, c);
                for (int i = 0; i < x.h * x.w; ++i) {
                    const double d = p[i] - mean;
                    sq += d * d;
                }
            }
            var = static_cast<float>(sq / static_cast<double>(per_c));
            run_mean->v[c] = momentum * run_mean->v[c] + (1.0f - momentum) * mean;
            run_var->v[c] = momentum * run_var->v[c] + (1.0f - momentum) * var;
        } else {
            mean = run_mean->v[c];
            var = run_var->v[c];
        }
        const float invstd = 1.0f / std::sqrt(var + eps);
        invstd_cache[c] = invstd;
        const float sc = scale->v[c], sh = shift->v[c];
        for (int in = 0; in < x.n; ++in) {
            const float* p = x.plane(in, c);
            float* xh = xhat_cache.plane(in, c);
            float* op = out.plane(in, c);
            for (int i = 0; i < x.h * x.w; ++i) {
                xh[i] = (p[i] - mean) * invstd;
                op[i] = sc * xh[i] + sh;
            }
        }
    }
    return out;
}

Tensor4 BatchNorm2d::backward(const Tensor4& gy) {
    const Tensor4& xh = xhat_cache;
    if (!gy.same_shape(xh)) throw DataError("batchnorm backward: shape mismatch");
    const int C = gy.c;
    const std::size_t per_c = static_cast<std::size_t>(gy.n) * gy.h * gy.w;
    Tensor4 gx(gy.n, gy.c, gy.h, gy.w);

    for (int c = 0; c < C; ++c) {
        double sum_gy = 0.0, sum_gy_xh = 0.0;
        for (int in = 0; in < gy.n; ++in) {
            const float* gp = gy.plane(in, c);
            const float* xp = xh.plane(in, c);
            for (int i = 0; i < gy.h * gy.w; ++i) {
                sum_gy += gp[i];
                sum_gy_xh += static_cast<double>(gp[i]) * xp[i];
            }
        }
        shift->g[c] += static_cast<float>(sum_gy);
        scale->g[c] += static_cast<float>(sum_gy_xh);

        const float sc = scale->v[c];
        const float invstd = invstd_cache[c];
        if (train_cache) {
            const float mg = static_cast<float>(sum_gy / static_cast<double>(per_c));
            const float mgx = static_cast<float>(sum_gy_xh / static_cast<double>(per_c));
            for (int in = 0; in < gy.n; ++in) {
                const float* gp = gy.plane(in, c);
                const float* xp = xh.plane(in, c);
                float* op = gx.plane(in, c);
                for (int i = 0; i < gy.h * gy.w; ++i)
                    op[i] = sc * invstd * (gp[i] - mg - xp[i] * mgx);
            }
        } else {
            for (int in = 0; in < gy.n; ++in) {
                const float* gp = gy.plane(in, c);
                float* op = gx.plane(in, c);
                for (int i = 0; i < gy.h * gy.w; ++i) op[i] = sc * invstd * gp[i];
            }
        }
    }
    return gx;
}

// ---- ReLU / Sigmoid ----

Tensor4 ReLULayer::forward(const Tensor4& x) {
    mask.assign(x.size(), 0);
    Tensor4 out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.v[i] > 0.0f) {
            mask[i] = 1;
        } else {
            out.v[i] = 0.0f;
        }
    }
    return out;
}

Tensor4 ReLULayer::backward(const Tensor4& gy) const {
    if (gy.size() != mask.size()) throw DataError("relu backward: shape mismatch");
    Tensor4 gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
        if (!mask[i]) gx.v[i] = 0.0f;
    return gx;
}

Tensor4 SigmoidLayer::forward(const Tensor4& x) {
    Tensor4 out = x;
    for (std::size_t i = 0; i < x.size(); ++i) out.v[i] = 1.0f / (1.0f + std::exp(-x.v[i]));
    y_cache = out;
    return out;
}

Tensor4 SigmoidLayer::backward(const Tensor4& gy) const {
    if (!gy.same_shape(y_cache)) throw DataError("sigmoid backward: shape mismatch");
    Tensor4 gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        const float y = y_cache.v[i];
        gx.v[i] = gy.v[i] * y * (1.0f - y);
    }
    return gx;
}

// ---- resampling ----

Tensor4 Down2x::forward(const Tensor4& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0) throw DataError("downsample2x: odd spatial extent");
    Tensor4 out(x.n, x.c, x.h / 2, x.w / 2);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c) {
            const float* ip = x.plane(in, c);
            float* op = out.plane(in, c);
            for (int y = 0; y < out.h; ++y)
                for (int xx = 0; xx < out.w; ++xx) {
                    const float* r0 = ip + (2 * y) * x.w + 2 * xx;
                    const float* r1 = r0 + x.w;
                    op[y * out.w + xx] = 0.25f * (r0[0] + r0[1] + r1[0] + r1[1]);
                }
        }
    return out;
}

Tensor4 Down2x::backward(const Tensor4& gy) {
    Tensor4 gx(gy.n, gy.c, gy.h * 2, gy.w * 2);
    for (int in = 0; in < gy.n; ++in)
        for (int c = 0; c < gy.c; ++c) {
            const float* gp = gy.plane(in, c);
            float* op = gx.plane(in, c);
            for (int y = 0; y < gy.h; ++y)
                for (int xx = 0; xx < gy.w; ++xx) {
                    const float v = 0.25f * gp[y * gy.w + xx];
                    float* r0 = op + (2 * y) * gx.w + 2 * xx;
                    float* r1 = r0 + gx.w;
                    r0[0] = r0[1] = r1[0] = r1[1] = v;
                }
        }
    return gx;
}

Tensor4 Up2x::forward(const Tensor4& x) {
    Tensor4 out(x.n, x.c, x.h * 2, x.w * 2);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c) {
            const float* ip = x.plane(in, c);
            float* op = out.plane(in, c);
            for (int y = 0; y < x.h; ++y)
                for (int xx = 0; xx < x.w; ++xx) {
                    const float v = ip[y * x.w + xx];
                    float* r0 = op + (2 * y) * out.w + 2 * xx;
                    float* r1 = r0 + out.w;
                    r0[0] = r0[1] = r1[0] = r1[1] = v;
                }
        }
    return out;
}

Tensor4 Up2x::backward(const Tensor4& gy) {
    if (gy.h % 2 != 0 || gy.w % 2 != 0) throw DataError("upsample2x backward: odd spatial extent");
    Tensor4 gx(gy.n, gy.c, gy.h / 2, gy.w / 2);
    for (int in = 0; in < gy.n; ++in)
        for (int c = 0; c < gy.c; ++c) {
            const float* gp = gy.plane(in, c);
            float* op = gx.plane(in, c);
            for (int y = 0; y < gx.h; ++y)
                for (int xx = 0; xx < gx.w; ++xx) {
                    const float* r0 = gp + (2 * y) * gy.w + 2 * xx;
                    const float* r1 = r0 + gy.w;
                    op[y * gx.w + xx] = r0[0] + r0[1] + r1[0] + r1[1];
                }
        }
    return gx;
}

} // namespace dsu
