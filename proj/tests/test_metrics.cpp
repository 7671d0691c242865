#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsu/field_ops.hpp"
#include "dsu/metrics.hpp"
#include "dsu/rng.hpp"

using namespace dsu;

namespace {
ScalarField random_field(int w, int h, Rng& rng) {
    ScalarField f(w, h);
    for (float& v : f.data) v = static_cast<float>(rng.uniform());
    return f;
}

ScalarField random_binary(int w, int h, Rng& rng, double p = 0.5) {
    ScalarField f(w, h);
    for (float& v : f.data) v = rng.coin(p) ? 1.0f : 0.0f;
    return f;
}

// ground truth with at least one fg and one bg pixel
ScalarField random_binary_mixed(int w, int h, Rng& rng) {
    while (true) {
        ScalarField g = random_binary(w, h, rng);
        const float m = field_mean(g);
        if (m > 0.0f && m < 1.0f) return g;
    }
}
} // namespace

TEST_CASE("mae examples, oracle and symmetries") {
    Rng rng(71);
    const ScalarField g = random_field(8, 8, rng);
    CHECK(mae(g, g) == 0.0);
    CHECK(mae(ScalarField(4, 4, 1.0f), ScalarField(4, 4, 0.0f)) == 1.0);

    for (int trial = 0; trial < 50; ++trial) {
        const ScalarField s = random_field(8, 8, rng);
        const ScalarField t = random_field(8, 8, rng);
        double want = 0.0;
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) want += std::fabs(s.at(y, x) - t.at(y, x));
        want /= 64.0;
        CHECK(mae(s, t) == doctest::Approx(want).epsilon(1e-7));
        CHECK(mae(s, t) == mae(t, s));

        ScalarField si(8, 8), ti(8, 8);
        for (std::size_t i = 0; i < s.size(); ++i) {
            si.data[i] = 1.0f - s.data[i];
            ti.data[i] = 1.0f - t.data[i];
        }
        CHECK(mae(si, ti) == doctest::Approx(mae(s, t)).epsilon(1e-7));
    }
    CHECK_THROWS_AS(mae(ScalarField(2, 2), ScalarField(3, 3)), DataError);
}

TEST_CASE("f-measure: perfect prediction and P=R identity") {
    Rng rng(72);
    const ScalarField g = random_binary_mixed(8, 8, rng);
    const auto curve = f_measure_curve(g, g);
    for (int t = 0; t < 255; ++t) CHECK(curve[t] == 1.0);
    CHECK(curve[255] == 0.0);

    // P = R = 0.5: predict half the foreground plus as many background pixels
    ScalarField gt(8, 8);
    for (int i = 0; i < 10; ++i) gt.data[i] = 1.0f;
    ScalarField pred(8, 8);
    for (int i = 0; i < 5; ++i) pred.data[i] = 1.0f;       // 5 true positives
    for (int i = 10; i < 15; ++i) pred.data[i] = 1.0f;     // 5 false positives
    const auto c2 = f_measure_curve(pred, gt);
    CHECK(c2[100] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("f-measure single threshold matches a confusion-matrix oracle") {
    Rng rng(73);
    for (int trial = 0; trial < 200; ++trial) {
        const ScalarField s = random_field(8, 8, rng);
        const ScalarField g = random_binary_mixed(8, 8, rng);
        const auto curve = f_measure_curve(s, g);
        const int t = static_cast<int>(rng.uniform_int(0, 255));

        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const int q = static_cast<int>(std::lround(s.data[i] * 255.0f));
            const bool fg = q > t;
            if (fg && g.data[i] > 0.5f) ++tp;
            else if (fg) ++fp;
            else if (g.data[i] > 0.5f) ++fn;
        }
        const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double want = (p <= 0.0 && r <= 0.0) ? 0.0 : 1.3 * p * r / (0.3 * p + r);
        CHECK(curve[t] == doctest::Approx(want).epsilon(1e-7));
    }
}

TEST_CASE("f-curve is piecewise constant between quantized levels") {
    Rng rng(74);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField s(8, 8);
        for (float& v : s.data)
            v = static_cast<float>(rng.uniform_int(0, 255)) / 255.0f;
        const ScalarField g = random_binary_mixed(8, 8, rng);
        const auto base = f_measure_curve(s, g);

        ScalarField s2 = s;
        for (float& v : s2.data) {
            const float delta = static_cast<float>(rng.uniform(-1.0, 1.0)) * (0.5f / 255.0f) *
                                0.98f;
            v = std::clamp(v + delta, 0.0f, 1.0f);
        }
        const auto perturbed = f_measure_curve(s2, g);
        CHECK(base == perturbed);
    }
}

TEST_CASE("binary prediction: f_max equals the single-threshold value") {
    Rng rng(75);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField s = random_binary(8, 8, rng);
        const ScalarField g = random_binary_mixed(8, 8, rng);
        const auto curve = f_measure_curve(s, g);
        const double f_max = *std::max_element(curve.begin(), curve.end());

        long tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.data[i] > 0.5f && g.data[i] > 0.5f) ++tp;
            else if (s.data[i] > 0.5f) ++fp;
            else if (g.data[i] > 0.5f) ++fn;
        }
        const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double single = (p <= 0.0 && r <= 0.0) ? 0.0 : 1.3 * p * r / (0.3 * p + r);
        CHECK(f_max == doctest::Approx(single).epsilon(1e-9));
    }
}

TEST_CASE("e-measure exact identities") {
    Rng rng(76);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField g = random_binary_mixed(8, 8, rng);
        CHECK(e_measure(g, g) == 1.0);
        ScalarField inv(8, 8);
        for (std::size_t i = 0; i < g.size(); ++i) inv.data[i] = 1.0f - g.data[i];
        CHECK(e_measure(inv, g) == 0.0);
    }
}

TEST_CASE("e-measure matches the pointwise formula oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const ScalarField s = random_binary_mixed(8, 8, rng);
        const ScalarField g = random_binary_mixed(8, 8, rng);
        const double got = e_measure(s, g);

        // oracle: binarize at min(2 mean, 1), subtract means, align, enhance
        const double th = std::min(2.0 * field_mean(s), 1.0);
        std::vector<double> sb(64);
        for (int i = 0; i < 64; ++i) sb[i] = s.data[i] >= th ? 1.0 : 0.0;
        double ms = 0.0, mg = 0.0;
        for (int i = 0; i < 64; ++i) {
            ms += sb[i];
            mg += g.data[i];
        }
        ms /= 64.0;
        mg /= 64.0;
        double want = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double fs = sb[i] - ms, fg = g.data[i] - mg;
            const double den = fs * fs + fg * fg;
            const double xi = den > 0.0 ? 2.0 * fs * fg / den : 0.0;
            want += (1.0 + xi) * (1.0 + xi) / 4.0;
        }
        want /= 64.0;
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("e-measure constant ground-truth convention") {
    Rng rng(78);
    const ScalarField s = random_field(6, 6, rng);
    const double th = std::min(2.0 * field_mean(s), 1.0);
    double want_bg = 0.0, want_fg = 0.0;
    for (const float v : s.data) {
        const double b = v >= th ? 1.0 : 0.0;
        want_bg += 1.0 - b;
        want_fg += b;
    }
    CHECK(e_measure(s, ScalarField(6, 6, 0.0f)) == doctest::Approx(want_bg / 36.0));
    CHECK(e_measure(s, ScalarField(6, 6, 1.0f)) == doctest::Approx(want_fg / 36.0));
}

namespace {
// weighted F oracle: unoptimized transcription of the dependency-weighted
// precision/recall construction, written separately from the library path
double weighted_f_oracle(const ScalarField& s, const ScalarField& g) {
    const int W = s.width, H = s.height;
    const int n = W * H;
    std::vector<int> fg;
    for (int i = 0; i < n; ++i)
        if (g.data[i] > 0.5f) fg.push_back(i);
    if (fg.empty()) return 0.0;

    std::vector<double> E(n), Et(n), D(n, 0.0);
    for (int i = 0; i < n; ++i) E[i] = std::fabs(s.data[i] - g.data[i]);
    Et = E;
    for (int i = 0; i < n; ++i) {
        if (g.data[i] > 0.5f) continue;
        double best = 1e18;
        int bj = fg[0];
        for (int j : fg) {
            const double dy = i / W - j / W, dx = i % W - j % W;
            const double d2 = dy * dy + dx * dx;
            if (d2 < best) {
                best = d2;
                bj = j;
            }
        }
        D[i] = std::sqrt(best);
        Et[i] = E[bj];
    }

    std::vector<double> EA(n, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0, norm = 0.0;
            for (int ky = -3; ky <= 3; ++ky)
                for (int kx = -3; kx <= 3; ++kx) {
                    const double kv = std::exp(-(ky * ky + kx * kx) / 50.0);
                    norm += kv;
                    const int sy = y + ky, sx = x + kx;
                    if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
                    acc += kv * Et[sy * W + sx];
                }
            EA[y * W + x] = acc / norm;
        }

    double ew_fg = 0.0, ew_bg = 0.0;
    for (int i = 0; i < n; ++i) {
        if (g.data[i] > 0.5f) {
            ew_fg += (EA[i] < E[i]) ? EA[i] : E[i];
        } else {
            ew_bg += E[i] * (2.0 - std::exp(std::log(0.5) / 5.0 * D[i]));
        }
    }
    const double eps = 2.220446049250313e-16;
    const double tpw = static_cast<double>(fg.size()) - ew_fg;
    const double R = 1.0 - ew_fg / fg.size();
    const double P = tpw / (eps + tpw + ew_bg);
    return 2.0 * R * P / (eps + R + P);
}
} // namespace

TEST_CASE("weighted F examples") {
    Rng rng(79);
    const ScalarField g = random_binary_mixed(8, 8, rng);
    CHECK(weighted_f(g, g) == doctest::Approx(1.0).epsilon(1e-6));

    // empty prediction, interior foreground blob: recall 0
    ScalarField blob(12, 12);
    for (int y = 4; y < 8; ++y)
        for (int x = 4; x < 8; ++x) blob.at(y, x) = 1.0f;
    CHECK(weighted_f(ScalarField(12, 12, 0.0f), blob) == doctest::Approx(0.0).epsilon(1e-6));

    // empty ground truth is defined as 0
    CHECK(weighted_f(random_field(8, 8, rng), ScalarField(8, 8, 0.0f)) == 0.0);
}

TEST_CASE("weighted F matches the formula-transcription oracle") {
    Rng rng(80);
    for (int trial = 0; trial < 200; ++trial) {
        const ScalarField s = random_field(8, 8, rng);
        const ScalarField g = random_binary_mixed(8, 8, rng);
        CHECK(weighted_f(s, g) == doctest::Approx(weighted_f_oracle(s, g)).epsilon(1e-5));
    }
}

TEST_CASE("permutation covariance of mae and f-curve") {
    Rng rng(81);
    const ScalarField s = random_field(8, 8, rng);
    const ScalarField g = random_binary_mixed(8, 8, rng);

    std::vector<int> perm(64);
    for (int i = 0; i < 64; ++i) perm[i] = i;
    rng.shuffle(perm);
    ScalarField sp(8, 8), gp(8, 8);
    for (int i = 0; i < 64; ++i) {
        sp.data[perm[i]] = s.data[i];
        gp.data[perm[i]] = g.data[i];
    }
    CHECK(mae(sp, gp) == doctest::Approx(mae(s, g)).epsilon(1e-9));
    CHECK(f_measure_curve(sp, gp) == f_measure_curve(s, g));
}

TEST_CASE("report invariants") {
    Rng rng(82);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField s = random_field(8, 8, rng);
        const ScalarField g = random_binary_mixed(8, 8, rng);
        const MetricsReport r = evaluate_pair(s, g);
        CHECK(r.f_max == *std::max_element(r.f_curve.begin(), r.f_curve.end()));
        CHECK(r.f_max >= r.f_mean);
        for (const double v : {r.mae, r.f_max, r.f_mean, r.f_weighted, r.e_measure}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(f_measure_curve(ScalarField(2, 2), ScalarField(2, 2, 0.3f)), DataError);
}
