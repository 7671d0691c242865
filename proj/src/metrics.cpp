#include "dsu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsu/field_ops.hpp"

namespace dsu {

namespace {
constexpr double kFBeta2 = 0.3;
constexpr double kEps = 2.220446049250313e-16;

void require_same_shape(const ScalarField& s, const ScalarField& g, const char* what) {
    if (!s.same_shape(g)) throw DataError(std::string(what) + ": dimension mismatch");
}
} // namespace

void require_binary(const ScalarField& g, const char* what) {
    for (const float v : g.data)
        if (std::fabs(v) > 1e-6f && std::fabs(v - 1.0f) > 1e-6f)
            throw DataError(std::string(what) + ": ground truth must be binary");
}

double mae(const ScalarField& s, const ScalarField& g) {
    require_same_shape(s, g, "mae");
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        sum += std::fabs(static_cast<double>(s.data[i]) - g.data[i]);
    return sum / static_cast<double>(s.size());
}

std::array<double, 256> f_measure_curve(const ScalarField& s, const ScalarField& g) {
    require_same_shape(s, g, "f_measure_curve");
    require_binary(g, "f_measure_curve");

    // Predictions are quantized to 8-bit levels q = round(255 s) and a pixel
    // counts as foreground at threshold t when q > t; this is the uint8
    // toolkit convention and makes the curve piecewise constant in s.
    // Histogram per level, split by ground-truth class; each threshold then
    // reduces to suffix sums.
    std::array<std::int64_t, 256> pos_hist{}, neg_hist{};
    std::int64_t gt_pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int lvl = std::clamp(static_cast<int>(std::lround(s.data[i] * 255.0f)), 0, 255);
        if (g.data[i] > 0.5f) {
            ++gt_pos;
            ++pos_hist[lvl];
        } else {
            ++neg_hist[lvl];
        }
    }

    std::array<double, 256> curve{};
    std::int64_t tp = 0, fp = 0;
    for (int t = 255; t >= 0; --t) {
        if (t < 255) {
            tp += pos_hist[t + 1];
            fp += neg_hist[t + 1];
        }
        const std::int64_t pred_pos = tp + fp;
        const double precision = pred_pos > 0 ? static_cast<double>(tp) / pred_pos : 0.0;
        const double recall = gt_pos > 0 ? static_cast<double>(tp) / gt_pos : 0.0;
        curve[t] = (precision <= 0.0 && recall <= 0.0)
                       ? 0.0
                       : (1.0 + kFBeta2) * precision * recall / (kFBeta2 * precision + recall);
    }
    return curve;
}

double e_measure(const ScalarField& s, const ScalarField& g) {
    require_same_shape(s, g, "e_measure");
    require_binary(g, "e_measure");

    const double th = std::min(2.0 * field_mean(s), 1.0);
    ScalarField sb(s.width, s.height);
    for (std::size_t i = 0; i < s.size(); ++i) sb.data[i] = s.data[i] >= th ? 1.0f : 0.0f;

    const double mg = field_mean(g);
    const std::size_t n = g.size();
    if (mg <= 0.0 || mg >= 1.0) {
        // all-background / all-foreground convention
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += mg <= 0.0 ? 1.0 - sb.data[i] : sb.data[i];
        return sum / static_cast<double>(n);
    }

    const double ms = field_mean(sb);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi_s = sb.data[i] - ms;
        const double phi_g = g.data[i] - mg;
        const double denom = phi_s * phi_s + phi_g * phi_g;
        const double align = denom > 0.0 ? 2.0 * phi_s * phi_g / denom : 0.0;
        const double enhanced = (1.0 + align) * (1.0 + align) / 4.0;
        sum += enhanced;
    }
    return sum / static_cast<double>(n);
}

double weighted_f(const ScalarField& s, const ScalarField& g) {
    require_same_shape(s, g, "weighted_f");
    require_binary(g, "weighted_f");
    const int W = s.width, H = s.height;
    const std::size_t n = s.size();

    std::vector<std::size_t> fg;
    for (std::size_t i = 0; i < n; ++i)
        if (g.data[i] > 0.5f) fg.push_back(i);
    if (fg.empty()) return 0.0;

    // absolute error and, for background pixels, the error of the nearest
    // foreground pixel (ties to the smallest row-major index)
    std::vector<double> err(n), err_dep(n), dist(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        err[i] = std::fabs(static_cast<double>(s.data[i]) - g.data[i]);
    err_dep = err;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.data[i] > 0.5f) continue;
        const int y = static_cast<int>(i) / W, x = static_cast<int>(i) % W;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = fg[0];
        for (const std::size_t j : fg) {
            const int jy = static_cast<int>(j) / W, jx = static_cast<int>(j) % W;
            const double d2 = static_cast<double>(y - jy) * (y - jy) +
                              static_cast<double>(x - jx) * (x - jx);
            if (d2 < best) {
                best = d2;
                best_j = j;
            }
        }
        dist[i] = std::sqrt(best);
        err_dep[i] = err[best_j];
    }

    // 7x7 Gaussian (sigma 5) smoothing of the dependent error, zero padded
    const int K = 7, half = 3;
    double kern[K][K];
    double ksum = 0.0;
    for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) {
            const double dy = ky - half, dx = kx - half;
            kern[ky][kx] = std::exp(-(dy * dy + dx * dx) / (2.0 * 25.0));
            ksum += kern[ky][kx];
        }
    for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) kern[ky][kx] /= ksum;

    std::vector<double> ea(n, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < K; ++ky) {
                const int sy = y + ky - half;
                if (sy < 0 || sy >= H) continue;
                for (int kx = 0; kx < K; ++kx) {
                    const int sx = x + kx - half;
                    if (sx < 0 || sx >= W) continue;
                    acc += kern[ky][kx] * err_dep[static_cast<std::size_t>(sy) * W + sx];
                }
            }
            ea[static_cast<std::size_t>(y) * W + x] = acc;
        }

    // foreground: allow the smoothed neighbourhood error to stand in when it
    // is smaller; background: exponential importance decay with distance
    const double decay = std::log(0.5) / 5.0;
    double sum_ew_fg = 0.0, sum_ew_bg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.data[i] > 0.5f) {
            sum_ew_fg += std::min(err[i], ea[i]);
        } else {
            const double importance = 2.0 - std::exp(decay * dist[i]);
            sum_ew_bg += err[i] * importance;
        }
    }

    const double tpw = static_cast<double>(fg.size()) - sum_ew_fg;
    const double fpw = sum_ew_bg;
    const double recall = 1.0 - sum_ew_fg / static_cast<double>(fg.size());
    const double precision = tpw / (kEps + tpw + fpw);
    return (1.0 + 1.0) * recall * precision / (kEps + recall + 1.0 * precision);
}

MetricsReport evaluate_pair(const ScalarField& s, const ScalarField& g) {
    MetricsReport r;
    r.mae = mae(s, g);
    r.f_curve = f_measure_curve(s, g);
    r.f_max = *std::max_element(r.f_curve.begin(), r.f_curve.end());
    double fsum = 0.0;
    for (const double f : r.f_curve) fsum += f;
    r.f_mean = fsum / 256.0;
    r.f_weighted = weighted_f(s, g);
    r.e_measure = e_measure(s, g);
    return r;
}

} // namespace dsu
