#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dsu/adam.hpp"
#include "dsu/checkpoint.hpp"
#include "dsu/losses.hpp"
#include "dsu/networks.hpp"
#include "dsu/trainer.hpp"
#include "test_util.hpp"

using namespace dsu;
using namespace testutil;

TEST_CASE("conv1x1 with identity weights is the identity map") {
    ParamSet ps;
    Rng rng(1);
    Conv2d conv(ps, "c", 2, 2, 1, rng);
    std::fill(conv.w->v.begin(), conv.w->v.end(), 0.0f);
    conv.w->v[0] = 1.0f; // out0 <- in0
    conv.w->v[3] = 1.0f; // out1 <- in1
    Tensor4 x(1, 2, 4, 4);
    fill_uniform(x, rng);
    const Tensor4 y = conv.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.v[i] == x.v[i]);
}

TEST_CASE("conv forward broadcasts bias on zero input") {
    ParamSet ps;
    Rng rng(2);
    Conv2d conv(ps, "c", 3, 2, 3, rng);
    conv.b->v = {0.25f, -1.5f};
    Tensor4 x(2, 3, 6, 6);
    const Tensor4 y = conv.forward(x);
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 2; ++c) {
            const float* p = y.plane(n, c);
            for (int i = 0; i < 36; ++i) CHECK(p[i] == conv.b->v[c]);
        }
}

namespace {
// direct six-nested-loop cross-correlation, zero padding
Tensor4 conv_oracle(const Tensor4& x, const Param& w, const Param& b, int k, int out_c) {
    const int pad = k / 2;
    Tensor4 y(x.n, out_c, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
        for (int oc = 0; oc < out_c; ++oc)
            for (int yy = 0; yy < x.h; ++yy)
                for (int xx = 0; xx < x.w; ++xx) {
                    double acc = b.v[oc];
                    for (int ic = 0; ic < x.c; ++ic)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int sy = yy + ky - pad, sx = xx + kx - pad;
                                if (sy < 0 || sy >= x.h || sx < 0 || sx >= x.w) continue;
                                acc += static_cast<double>(
                                           w.v[((static_cast<std::size_t>(oc) * x.c + ic) * k +
                                                ky) * k + kx]) *
                                       x.at(n, ic, sy, sx);
                            }
                    y.at(n, oc, yy, xx) = static_cast<float>(acc);
                }
    return y;
}
} // namespace

TEST_CASE("conv3x3 matches the naive loop oracle") {
    ParamSet ps;
    Rng rng(3);
    Conv2d conv(ps, "c", 2, 3, 3, rng);
    for (float& v : conv.b->v) v = static_cast<float>(rng.uniform(-0.5, 0.5));
    Tensor4 x(1, 2, 5, 5);
    fill_uniform(x, rng, -1.0, 1.0);
    const Tensor4 got = conv.forward(x);
    const Tensor4 want = conv_oracle(x, *conv.w, *conv.b, 3, 3);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-5));
}

TEST_CASE("conv backward zero and scalar cases") {
    ParamSet ps;
    Rng rng(4);
    Conv2d conv(ps, "c", 2, 2, 3, rng);
    Tensor4 x(1, 2, 4, 4);
    fill_uniform(x, rng);
    conv.forward(x);
    const Tensor4 gx = conv.backward(Tensor4(1, 2, 4, 4)); // zero upstream grad
    for (const float v : gx.v) CHECK(v == 0.0f);
    for (const float v : conv.w->g) CHECK(v == 0.0f);
    for (const float v : conv.b->g) CHECK(v == 0.0f);

    // single pixel, 1x1 kernel: grad_w = x * gy, grad_x = w * gy
    ParamSet ps1;
    Conv2d c1(ps1, "c", 1, 1, 1, rng);
    c1.w->v[0] = 0.7f;
    Tensor4 px(1, 1, 1, 1);
    px.v[0] = 0.3f;
    c1.forward(px);
    Tensor4 gy(1, 1, 1, 1);
    gy.v[0] = 2.0f;
    const Tensor4 gx1 = c1.backward(gy);
    CHECK(c1.w->g[0] == doctest::Approx(0.3f * 2.0f));
    CHECK(c1.b->g[0] == doctest::Approx(2.0f));
    CHECK(gx1.v[0] == doctest::Approx(0.7f * 2.0f));
}

TEST_CASE("batchnorm statistics") {
    ParamSet ps;
    Rng rng(5);
    BatchNorm2d bn(ps, "bn", 3);

    // already standardized input passes through (up to the eps floor)
    Tensor4 x(2, 3, 4, 4);
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0, sq = 0.0;
        std::vector<float*> planes = {x.plane(0, c), x.plane(1, c)};
        for (float* p : planes)
            for (int i = 0; i < 16; ++i) {
                p[i] = static_cast<float>(rng.normal());
                sum += p[i];
            }
        const double mean = sum / 32.0;
        for (float* p : planes)
            for (int i = 0; i < 16; ++i) {
                p[i] = static_cast<float>(p[i] - mean);
                sq += static_cast<double>(p[i]) * p[i];
            }
        const double std = std::sqrt(sq / 32.0);
        for (float* p : planes)
            for (int i = 0; i < 16; ++i) p[i] = static_cast<float>(p[i] / std);
    }
    const Tensor4 y = bn.forward(x, true);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(y.v[i] == doctest::Approx(x.v[i]).epsilon(1e-3).scale(1.0));

    // constant channel collapses to the shift
    BatchNorm2d bn2(ps, "bn2", 1);
    bn2.shift->v[0] = 0.4f;
    const Tensor4 yc = bn2.forward(Tensor4(2, 1, 3, 3, 5.0f), true);
    for (const float v : yc.v) CHECK(v == doctest::Approx(0.4f).epsilon(1e-4));

    // per-channel output mean ~ shift, variance ~ scale^2
    BatchNorm2d bn3(ps, "bn3", 2);
    bn3.scale->v = {1.5f, 0.5f};
    bn3.shift->v = {-0.2f, 0.8f};
    Tensor4 z(3, 2, 8, 8);
    fill_uniform(z, rng, -2.0, 5.0);
    const Tensor4 yz = bn3.forward(z, true);
    for (int c = 0; c < 2; ++c) {
        double sum = 0.0, sq = 0.0;
        for (int n = 0; n < 3; ++n) {
            const float* p = yz.plane(n, c);
            for (int i = 0; i < 64; ++i) sum += p[i];
        }
        const double mean = sum / 192.0;
        for (int n = 0; n < 3; ++n) {
            const float* p = yz.plane(n, c);
            for (int i = 0; i < 64; ++i) sq += (p[i] - mean) * (p[i] - mean);
        }
        CHECK(mean == doctest::Approx(bn3.shift->v[c]).epsilon(1e-4));
        CHECK(sq / 192.0 ==
              doctest::Approx(static_cast<double>(bn3.scale->v[c]) * bn3.scale->v[c])
                  .epsilon(1e-3));
    }
}

TEST_CASE("losses") {
    Tensor4 a(2, 1, 3, 3);
    Rng rng(6);
    fill_uniform(a, rng);
    CHECK(mse(a, a) == 0.0);

    Tensor4 half(2, 1, 4, 4, 0.5f);
    Tensor4 target(2, 1, 4, 4);
    for (float& v : target.v) v = rng.coin() ? 1.0f : 0.0f;
    for (const double l : bce_per_sample(half, target))
        CHECK(l == doctest::Approx(std::log(2.0)).epsilon(1e-6));

    // direct double-loop oracle
    Tensor4 pred(3, 1, 4, 4), tgt(3, 1, 4, 4);
    fill_uniform(pred, rng, 0.01, 0.99);
    fill_uniform(tgt, rng);
    const std::vector<double> got = bce_per_sample(pred, tgt);
    for (int n = 0; n < 3; ++n) {
        double want = 0.0;
        for (int i = 0; i < 16; ++i) {
            const double p = pred.v[n * 16 + i], t = tgt.v[n * 16 + i];
            want -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
        want /= 16.0;
        CHECK(got[n] == doctest::Approx(want).epsilon(1e-6));
    }

    Tensor4 p2(1, 1, 2, 2), t2(1, 1, 2, 2);
    fill_uniform(p2, rng);
    fill_uniform(t2, rng);
    double want_mse = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double d = static_cast<double>(p2.v[i]) - t2.v[i];
        want_mse += d * d;
    }
    CHECK(mse(p2, t2) == doctest::Approx(want_mse / 4.0).epsilon(1e-6));
}

TEST_CASE("adam") {
    ParamSet ps;
    Param* p = ps.add("w", {4});
    p->v = {1.0f, -2.0f, 0.5f, 3.0f};
    const std::vector<float> before = p->v;

    Adam opt({p}, 1e-3);
    opt.step(); // zero gradients: unchanged
    CHECK(p->v == before);

    // lr = 0: unchanged even with gradients
    Adam opt0({p}, 0.0);
    p->g = {1.0f, 1.0f, 1.0f, 1.0f};
    opt0.step();
    CHECK(p->v == before);

    // constant scalar gradient vs an independent double recursion
    ParamSet ps2;
    Param* s = ps2.add("s", {1});
    s->v[0] = 0.0f;
    Adam opt2({s}, 0.01);
    const double g = 0.37;
    double m = 0.0, v = 0.0, x = 0.0;
    for (int t = 1; t <= 10; ++t) {
        s->g[0] = static_cast<float>(g);
        opt2.step();
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(s->v[0] == doctest::Approx(x).epsilon(1e-4));
    }

    s->g[0] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_WITH_AS(opt2.step(), doctest::Contains("s"), NumericError);
}

TEST_CASE("network definitions have consistent channel chains") {
    for (const int c : {4, 8, 16}) {
        CHECK_NOTHROW(validate_chain(SaliencyNet::describe(c), "saliency"));
        CHECK_NOTHROW(validate_chain(TrunkNet::describe(3, c), "depth trunk"));
        CHECK_NOTHROW(validate_chain(describe_disentangle_head(c), "disentangle head"));
        CHECK_NOTHROW(validate_chain(describe_scoring_head(c), "scoring head"));
    }
    // the saliency net: 4 encoder conv blocks + 2 decoder blocks, two down,
    // two up, one 1x1 sigmoid head
    const auto chain = SaliencyNet::describe(16);
    int conv3 = 0, conv1 = 0, down = 0, up = 0, sigmoid = 0;
    for (const LayerSpec& l : chain) {
        conv3 += l.kind == LayerKind::Conv3x3;
        conv1 += l.kind == LayerKind::Conv1x1;
        down += l.kind == LayerKind::Downsample2x;
        up += l.kind == LayerKind::Upsample2x;
        sigmoid += l.kind == LayerKind::Sigmoid;
    }
    CHECK(conv3 == 6);
    CHECK(conv1 == 1);
    CHECK(down == 2);
    CHECK(up == 2);
    CHECK(sigmoid == 1);
    CHECK(chain.front().in_channels == 3);
    CHECK(chain.back().out_channels == 1);

    // a broken chain is rejected with the offending layer named
    std::vector<LayerSpec> bad = {{LayerKind::Conv3x3, 3, 8}, {LayerKind::ReLU, 16, 16}};
    CHECK_THROWS_WITH_AS(validate_chain(bad, "bad"), doctest::Contains("relu"), DataError);
}

TEST_CASE("network builders match the declared shapes") {
    TrainConfig cfg;
    Models models(cfg, 123);

    Tensor4 rgb(1, 3, 64, 64);
    Rng rng(7);
    fill_uniform(rgb, rng);
    const Tensor4 pred = models.saliency.forward(rgb, false);
    CHECK(pred.n == 1);
    CHECK(pred.c == 1);
    CHECK(pred.h == 64);
    CHECK(pred.w == 64);
    for (const float v : pred.v) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }

    const Tensor4 f = models.depth.trunk.forward(rgb, false);
    CHECK(f.c == 16);
    CHECK(f.h == 64);
    CHECK(f.w == 64);

    Tensor4 fs = models.depth.dsal.forward_feature(f, false);
    Tensor4 fn = models.depth.dnonsal.forward_feature(f, false);
    const Tensor4 ft = add(fs, fn);
    CHECK(ft.same_shape(f));
}

TEST_CASE("every layer kind: analytic backward matches finite differences") {
    Rng rng(8);
    const double tol = 1e-3;

    auto check_layer = [&](auto&& forward, auto&& backward, Tensor4& x,
                           std::vector<Param*> params) {
        // random linear projection makes the loss scalar
        Tensor4 probe = forward();
        std::vector<double> r(probe.size());
        for (double& v : r) v = rng.uniform(-1.0, 1.0);
        auto loss = [&]() {
            const Tensor4 y = forward();
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y.v[i];
            return s;
        };
        loss();
        Tensor4 gy = probe;
        for (std::size_t i = 0; i < gy.size(); ++i) gy.v[i] = static_cast<float>(r[i]);
        for (Param* p : params) std::fill(p->g.begin(), p->g.end(), 0.0f);
        const Tensor4 gx = backward(gy);

        for (int i = 0; i < 12; ++i) {
            const std::size_t idx = rng.next_u64() % x.size();
            const double fd = central_diff(loss, x.v[idx], 1e-3);
            CHECK(rel_err(gx.v[idx], fd) < tol);
        }
        for (Param* p : params)
            for (int i = 0; i < std::min<int>(8, static_cast<int>(p->size())); ++i) {
                const std::size_t idx = rng.next_u64() % p->size();
                const double fd = central_diff(loss, p->v[idx], 1e-3);
                CHECK(rel_err(p->g[idx], fd) < tol);
            }
    };

    for (int inst = 0; inst < 4; ++inst) {
        ParamSet ps;
        Conv2d conv3(ps, "c3", 2, 3, 3, rng);
        Tensor4 x1(2, 2, 6, 6);
        fill_uniform(x1, rng, -1.0, 1.0);
        check_layer([&]() { return conv3.forward(x1); },
                    [&](const Tensor4& gy) { return conv3.backward(gy); }, x1,
                    {conv3.w, conv3.b});

        Conv2d conv1(ps, "c1", 3, 2, 1, rng);
        Tensor4 x2(1, 3, 5, 5);
        fill_uniform(x2, rng, -1.0, 1.0);
        check_layer([&]() { return conv1.forward(x2); },
                    [&](const Tensor4& gy) { return conv1.backward(gy); }, x2,
                    {conv1.w, conv1.b});

        BatchNorm2d bn(ps, "bn", 3);
        for (float& v : bn.scale->v) v = static_cast<float>(rng.uniform(0.5, 1.5));
        for (float& v : bn.shift->v) v = static_cast<float>(rng.uniform(-0.5, 0.5));
        Tensor4 x3(2, 3, 4, 4);
        fill_uniform(x3, rng, -1.0, 1.0);
        check_layer([&]() { return bn.forward(x3, true); },
                    [&](const Tensor4& gy) { return bn.backward(gy); }, x3,
                    {bn.scale, bn.shift});

        ReLULayer relu;
        Tensor4 x4(2, 2, 5, 5);
        fill_away_from_zero(x4, rng);
        check_layer([&]() { return relu.forward(x4); },
                    [&](const Tensor4& gy) { return relu.backward(gy); }, x4, {});

        SigmoidLayer sig;
        Tensor4 x5(1, 2, 4, 4);
        fill_uniform(x5, rng, -2.0, 2.0);
        check_layer([&]() { return sig.forward(x5); },
                    [&](const Tensor4& gy) { return sig.backward(gy); }, x5, {});

        Tensor4 x6(1, 2, 6, 6);
        fill_uniform(x6, rng, -1.0, 1.0);
        check_layer([&]() { return Down2x::forward(x6); },
                    [&](const Tensor4& gy) { return Down2x::backward(gy); }, x6, {});

        Tensor4 x7(1, 2, 3, 3);
        fill_uniform(x7, rng, -1.0, 1.0);
        check_layer([&]() { return Up2x::forward(x7); },
                    [&](const Tensor4& gy) { return Up2x::backward(gy); }, x7, {});
    }
}

TEST_CASE("forward+backward leaves no NaN or Inf across 100 seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        TrainConfig cfg;
        cfg.channels = 8;
        Models models(cfg, seed);
        Rng rng(seed + 1000);
        Tensor4 rgb(1, 3, 8, 8);
        fill_uniform(rgb, rng);
        Tensor4 target(1, 1, 8, 8);
        fill_uniform(target, rng);

        Tensor4 pred = models.saliency.forward(rgb, true);
        models.saliency.backward(mse_grad(pred, target, 1.0));
        CHECK(pred.all_finite());
        bool ok = true;
        for (const auto& p : models.params.all()) {
            for (const float v : p->v) ok = ok && std::isfinite(v);
            for (const float v : p->g) ok = ok && std::isfinite(v);
        }
        CHECK(ok);
    }
}

TEST_CASE("checkpoint save -> load -> forward is bit-identical") {
    TrainConfig cfg;
    cfg.channels = 8;
    Models a(cfg, 42);
    Rng rng(9);
    Tensor4 rgb(1, 3, 16, 16);
    fill_uniform(rgb, rng);

    // dirty the adam moments so they round-trip too
    Tensor4 pred = a.saliency.forward(rgb, true);
    a.saliency.backward(mse_grad(pred, Tensor4(1, 1, 16, 16, 0.5f), 1.0));
    Adam opt(a.params.trainable_with_prefix("sal."), 1e-3);
    opt.step();

    const Tensor4 before = a.saliency.forward(rgb, false);
    const std::string path =
        (std::filesystem::temp_directory_path() / "dsu_ckpt_test.dsu").string();
    save_checkpoint(path, a.params, opt.step_count(), 0);

    Models b(cfg, 777); // different init; must be fully overwritten
    const CheckpointMeta meta = load_checkpoint(path, b.params);
    CHECK(meta.sal_steps == 1);
    const Tensor4 after = b.saliency.forward(rgb, false);
    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < after.size(); ++i) CHECK(after.v[i] == before.v[i]);

    for (const auto& p : a.params.all()) {
        Param* q = b.params.find(p->name);
        REQUIRE(q != nullptr);
        CHECK(p->m == q->m);
        CHECK(p->v2 == q->v2);
    }
}
