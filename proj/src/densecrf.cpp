#include "dsu/densecrf.hpp"

#include <cmath>
#include <vector>

#include "dsu/error.hpp"

namespace dsu {

void CrfParams::validate() const {
    if (w_app < 0.0f || w_smooth < 0.0f) throw DataError("crf: kernel weights must be >= 0");
    if (!(theta_alpha > 0.0f) || !(theta_beta > 0.0f) || !(theta_gamma > 0.0f))
        throw DataError("crf: kernel stddevs must be > 0");
    if (iterations < 1) throw DataError("crf: iterations must be >= 1");
    if (window < 0) throw DataError("crf: window must be >= 0");
}

ScalarField densecrf_refine(const RgbImage& rgb, const ScalarField& unary, const CrfParams& p) {
    return densecrf_refine(rgb, unary, p, CrfObserver{});
}

ScalarField densecrf_refine(const RgbImage& rgb, const ScalarField& unary, const CrfParams& p,
                            const CrfObserver& observer) {
    p.validate();
    if (rgb.width != unary.width || rgb.height != unary.height)
        throw DataError("crf: image and unary dimensions differ");
    const int W = unary.width, H = unary.height;
    const std::size_t N = unary.size();
    if (p.window == 0 && (W > 128 || H > 128))
        throw DataError("crf: exact message passing is limited to 128x128; set a window");

    // clamped foreground probabilities; exp(-unary) recovers these exactly
    std::vector<double> pf(N);
    for (std::size_t i = 0; i < N; ++i) {
        double v = unary.data[i];
        if (v < 1e-6) v = 1e-6;
        if (v > 1.0 - 1e-6) v = 1.0 - 1e-6;
        pf[i] = v;
    }

    // spatial factors per absolute offset, shared across all pixel pairs
    std::vector<double> spat_app(static_cast<std::size_t>(H) * W);
    std::vector<double> spat_smooth(spat_app.size());
    const double ia = 1.0 / (2.0 * static_cast<double>(p.theta_alpha) * p.theta_alpha);
    const double ig = 1.0 / (2.0 * static_cast<double>(p.theta_gamma) * p.theta_gamma);
    for (int dy = 0; dy < H; ++dy)
        for (int dx = 0; dx < W; ++dx) {
            const double d2 = static_cast<double>(dy) * dy + static_cast<double>(dx) * dx;
            spat_app[static_cast<std::size_t>(dy) * W + dx] = std::exp(-d2 * ia);
            spat_smooth[static_cast<std::size_t>(dy) * W + dx] = std::exp(-d2 * ig);
        }

    const double ib = 1.0 / (2.0 * static_cast<double>(p.theta_beta) * p.theta_beta);
    const float* cr = rgb.plane[0].data();
    const float* cg = rgb.plane[1].data();
    const float* cb = rgb.plane[2].data();

    std::vector<double> qf = pf, qb(N);
    for (std::size_t i = 0; i < N; ++i) qb[i] = 1.0 - qf[i];
    std::vector<double> mf(N), mb(N);

    const bool pairwise = p.w_app > 0.0f || p.w_smooth > 0.0f;
    for (int it = 0; it < p.iterations; ++it) {
        std::fill(mf.begin(), mf.end(), 0.0);
        std::fill(mb.begin(), mb.end(), 0.0);
        if (pairwise) {
            // symmetric kernel: walk unordered pairs once
            for (int y1 = 0; y1 < H; ++y1)
                for (int x1 = 0; x1 < W; ++x1) {
                    const std::size_t i = static_cast<std::size_t>(y1) * W + x1;
                    for (int y2 = y1; y2 < H; ++y2) {
                        const int dy = y2 - y1;
                        if (p.window > 0 && dy > p.window) break;
                        const int x_start = (y2 == y1) ? x1 + 1 : 0;
                        for (int x2 = x_start; x2 < W; ++x2) {
                            const int dx = x2 >= x1 ? x2 - x1 : x1 - x2;
                            if (p.window > 0 && dx > p.window) continue;
                            const std::size_t off = static_cast<std::size_t>(dy) * W + dx;
                            const double sa = p.w_app * spat_app[off];
                            const double sg = p.w_smooth * spat_smooth[off];
                            if (sa + sg < 1e-12) continue;
                            const std::size_t j = static_cast<std::size_t>(y2) * W + x2;
                            const double d0 = cr[i] - cr[j], d1 = cg[i] - cg[j], d2 = cb[i] - cb[j];
                            const double k =
                                sa * std::exp(-(d0 * d0 + d1 * d1 + d2 * d2) * ib) + sg;
                            mf[i] += k * qb[j];
                            mb[i] += k * qf[j];
                            mf[j] += k * qb[i];
                            mb[j] += k * qf[i];
                        }
                    }
                }
        }
        for (std::size_t i = 0; i < N; ++i) {
            const double m0 = std::min(mf[i], mb[i]);
            const double a = pf[i] * std::exp(-(mf[i] - m0));
            const double b = (1.0 - pf[i]) * std::exp(-(mb[i] - m0));
            qf[i] = a / (a + b);
            qb[i] = b / (a + b);
        }
        if (observer) observer(it, qf, qb);
    }

    ScalarField out(W, H);
    for (std::size_t i = 0; i < N; ++i) {
        const double v = p.binarize ? (qf[i] > 0.5 ? 1.0 : 0.0) : qf[i];
        out.data[i] = static_cast<float>(v);
    }
    return out;
}

} // namespace dsu
