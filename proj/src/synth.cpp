#include "dsu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dsu/field_ops.hpp"
#include "dsu/image_io.hpp"
#include "dsu/metrics.hpp"
#include "dsu/rng.hpp"

namespace fs = std::filesystem;

namespace dsu {

namespace {

struct Shape {
    bool ellipse = true;
    double cx = 0, cy = 0, rx = 0, ry = 0;

    bool contains(int x, int y) const {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        return ellipse ? dx * dx + dy * dy <= 1.0
                       : std::fabs(dx) <= 1.0 && std::fabs(dy) <= 1.0;
    }
};

Shape random_shape(Rng& rng, const SynthSpec& spec, double min_r, double max_r) {
    Shape sh;
    if (spec.ellipses && spec.rectangles) sh.ellipse = rng.coin();
    else sh.ellipse = spec.ellipses;
    const double W = spec.size;
    sh.rx = rng.uniform(min_r, max_r) * W;
    sh.ry = rng.uniform(min_r, max_r) * W;
    sh.cx = rng.uniform(sh.rx + 2.0, W - sh.rx - 2.0);
    sh.cy = rng.uniform(sh.ry + 2.0, W - sh.ry - 2.0);
    return sh;
}

void paint_disc(ScalarField& label, double cx, double cy, double r, float value) {
    const int x0 = std::max(0, static_cast<int>(cx - r) - 1);
    const int x1 = std::min(label.width - 1, static_cast<int>(cx + r) + 1);
    const int y0 = std::max(0, static_cast<int>(cy - r) - 1);
    const int y1 = std::min(label.height - 1, static_cast<int>(cy + r) + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) label.at(y, x) = value;
}

// structuring element is a real-radius disc; fractional radii matter at
// small image sizes where integer rings overshoot the corruption target
ScalarField morph(const ScalarField& mask, double radius, bool dilate) {
    if (radius < 1.0) return mask;
    const int r = static_cast<int>(std::ceil(radius));
    const double r2 = radius * radius;
    ScalarField out = mask;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            const bool fg = mask.at(y, x) > 0.5f;
            if (dilate == fg) continue; // dilation only grows bg px, erosion only clears fg px
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy)
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    if (dx * dx + dy * dy > r2) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= mask.height || nx < 0 || nx >= mask.width) continue;
                    const bool nfg = mask.at(ny, nx) > 0.5f;
                    if (nfg == dilate) hit = true;
                }
            if (hit) out.at(y, x) = dilate ? 1.0f : 0.0f;
        }
    return out;
}

struct Scene {
    std::vector<Shape> objects;
    std::vector<Shape> distractors;
};

// One corruption attempt. The op mix is the sample's fixed profile; the
// dilation ring and blob radii scale with `scale`, which the caller adapts
// until the target MAE window is hit.
ScalarField corrupt_once(const ScalarField& gt, const Scene& scene, const SynthSpec& spec,
                         bool adversarial, double scale, Rng& rng) {
    ScalarField label = gt;
    const int size = spec.size;
    const double base = scale * size;

    if (adversarial && !scene.distractors.empty()) {
        // wrong-region blobs: pseudo-label claims distractor area is salient
        for (const Shape& d : scene.distractors) {
            const double r =
                std::min(0.45 * spec.mag_blob * base, 0.9 * std::min(d.rx, d.ry));
            if (r < 1.0) continue;
            paint_disc(label, d.cx + rng.uniform(-1.5, 1.5), d.cy + rng.uniform(-1.5, 1.5),
                       r, 1.0f);
        }
        label = morph(label, 0.05 * spec.mag_dilate * base, /*dilate=*/true);
    } else {
        // small fixed nuisance ops, then a scale-driven boundary ring
        for (const Shape& o : scene.objects) {
            if (std::min(o.rx, o.ry) >= 4.0 && rng.coin(0.4))
                label = morph(label, spec.mag_erode, /*dilate=*/false);
            break; // erosion applies to the whole label once
        }
        for (const Shape& o : scene.objects) {
            if (!rng.coin(0.6)) continue;
            const double r =
                std::min(1.0 + 0.15 * spec.mag_hole * base, 0.6 * std::min(o.rx, o.ry));
            if (r < 1.0) continue;
            paint_disc(label, o.cx + rng.uniform(-0.3, 0.3) * o.rx,
                       o.cy + rng.uniform(-0.3, 0.3) * o.ry, r, 0.0f);
        }
        if (rng.coin(0.6))
            paint_disc(label, rng.uniform(4.0, size - 4.0), rng.uniform(4.0, size - 4.0),
                       0.15 * spec.mag_blob * base, 1.0f);
        label = morph(label, 0.09 * spec.mag_dilate * base, /*dilate=*/true);
    }
    return label;
}

// Trims or grows the corrupted region at its boundary until the number of
// disagreeing pixels lands in [lo, hi]. Peeling/growing whole layers keeps
// the corruption compact; layer order is shuffled for texture.
bool trim_to_window(ScalarField& cand, const ScalarField& gt, std::size_t lo, std::size_t hi,
                    Rng& rng) {
    const int W = gt.width, H = gt.height;
    auto differs = [&](std::size_t i) {
        return (cand.data[i] > 0.5f) != (gt.data[i] > 0.5f);
    };
    auto count_diff = [&]() {
        std::size_t c = 0;
        for (std::size_t i = 0; i < gt.size(); ++i) c += differs(i) ? 1 : 0;
        return c;
    };
    auto neighbors = [&](std::size_t i, auto&& fn) {
        const int y = static_cast<int>(i) / W, x = static_cast<int>(i) % W;
        if (y > 0) fn(i - W);
        if (y < H - 1) fn(i + W);
        if (x > 0) fn(i - 1);
        if (x < W - 1) fn(i + 1);
    };

    std::size_t count = count_diff();
    const std::size_t mid = (lo + hi) / 2;
    for (int guard = 0; guard < 4 * W * H && (count < lo || count > hi); ++guard) {
        std::vector<std::size_t> layer;
        if (count > hi) {
            for (std::size_t i = 0; i < gt.size(); ++i) {
                if (!differs(i)) continue;
                bool edge = false;
                neighbors(i, [&](std::size_t j) { edge = edge || !differs(j); });
                if (edge) layer.push_back(i);
            }
            rng.shuffle(layer);
            for (const std::size_t i : layer) {
                if (count <= mid) break;
                cand.data[i] = gt.data[i];
                --count;
            }
        } else {
            for (std::size_t i = 0; i < gt.size(); ++i) {
                if (differs(i)) continue;
                bool edge = false;
                neighbors(i, [&](std::size_t j) { edge = edge || differs(j); });
                // with no corruption left, grow from the object boundary
                if (!edge && count == 0 && gt.data[i] > 0.5f) {
                    neighbors(i, [&](std::size_t j) { edge = edge || gt.data[j] <= 0.5f; });
                }
                if (edge) layer.push_back(i);
            }
            if (layer.empty()) return false;
            rng.shuffle(layer);
            for (const std::size_t i : layer) {
                if (count >= mid) break;
                cand.data[i] = gt.data[i] > 0.5f ? 0.0f : 1.0f;
                ++count;
            }
        }
    }
    return count >= lo && count <= hi;
}

} // namespace

SynthSample synth_sample(const SynthSpec& spec, int index) {
    if (spec.size < 8) throw DataError("synth: size must be >= 8");
    if (!spec.ellipses && !spec.rectangles) throw DataError("synth: empty shape set");
    if (spec.objects_min < 1 || spec.objects_max < spec.objects_min)
        throw DataError("synth: bad object count range");

    Rng rng = named_stream(spec.seed, "synth/sample", static_cast<std::uint64_t>(index));
    const int W = spec.size;

    Scene scene;
    const int n_obj = static_cast<int>(rng.uniform_int(spec.objects_min, spec.objects_max));
    for (int i = 0; i < n_obj; ++i) scene.objects.push_back(random_shape(rng, spec, 0.12, 0.24));
    const int n_dis = static_cast<int>(rng.uniform_int(1, 2));
    for (int i = 0; i < n_dis; ++i)
        scene.distractors.push_back(random_shape(rng, spec, 0.08, 0.16));

    // colors: objects and distractors share a palette so RGB alone is
    // ambiguous; depth is what separates them
    float bg_col[3], obj_col[3], dis_col[3];
    for (int c = 0; c < 3; ++c) bg_col[c] = static_cast<float>(rng.uniform(0.12, 0.42));
    for (int c = 0; c < 3; ++c)
        obj_col[c] = static_cast<float>(std::clamp(bg_col[c] + rng.uniform(0.28, 0.5), 0.0, 0.98));
    for (int c = 0; c < 3; ++c)
        dis_col[c] = static_cast<float>(std::clamp(obj_col[c] + rng.uniform(-0.07, 0.07), 0.0, 1.0));

    const double bg_depth = rng.uniform(0.12, 0.25);
    const double grad = rng.uniform(0.04, 0.12);
    const double obj_depth = std::min(0.97, bg_depth + grad + spec.depth_separation *
                                                                rng.uniform(0.85, 1.0));

    SynthSample out;
    out.rgb = RgbImage(W, W);
    out.depth = ScalarField(W, W);
    out.gt = ScalarField(W, W);

    for (int y = 0; y < W; ++y) {
        for (int x = 0; x < W; ++x) {
            int owner = 0; // 0 bg, 1 object, 2 distractor
            for (const Shape& s : scene.objects)
                if (s.contains(x, y)) owner = 1;
            if (owner == 0)
                for (const Shape& s : scene.distractors)
                    if (s.contains(x, y)) owner = 2;

            const float* col = owner == 1 ? obj_col : (owner == 2 ? dis_col : bg_col);
            for (int c = 0; c < 3; ++c)
                out.rgb.at(c, y, x) = static_cast<float>(
                    std::clamp(col[c] + rng.normal() * 0.03, 0.0, 1.0));

            double d = owner == 1 ? obj_depth
                                  : bg_depth + grad * (static_cast<double>(y) / W);
            d += rng.normal() * 0.02;
            out.depth.at(y, x) = static_cast<float>(std::clamp(d, 0.0, 1.0));
            out.gt.at(y, x) = owner == 1 ? 1.0f : 0.0f;
        }
    }

    // corruption: adversarial samples put their label noise on distractors,
    // where appearance agrees with the object and only depth disagrees
    const bool adversarial = !scene.distractors.empty() && rng.coin(0.35);
    if (spec.corruption_mae <= 0.0) {
        out.pseudo = out.gt;
        out.achieved_mae = 0.0;
        return out;
    }
    const std::size_t px = out.gt.size();
    const std::size_t lo =
        static_cast<std::size_t>(std::ceil(0.8 * spec.corruption_mae * px));
    const std::size_t hi =
        static_cast<std::size_t>(std::floor(1.2 * spec.corruption_mae * px));
    double scale = 1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng crng = named_stream(spec.seed, "synth/corrupt",
                                static_cast<std::uint64_t>(index),
                                static_cast<std::uint64_t>(attempt));
        ScalarField cand = corrupt_once(out.gt, scene, spec, adversarial, scale, crng);
        double achieved = mae(cand, out.gt);
        if (achieved < 0.8 * spec.corruption_mae || achieved > 1.2 * spec.corruption_mae) {
            // structural ops are quantized; fine-trim the region boundary
            if (!trim_to_window(cand, out.gt, lo, hi, crng)) {
                scale = achieved > 1e-9
                            ? std::clamp(scale * spec.corruption_mae / achieved, 0.02, 30.0)
                            : scale * 2.0;
                continue;
            }
            achieved = mae(cand, out.gt);
        }
        out.pseudo = std::move(cand);
        out.achieved_mae = achieved;
        return out;
    }
    throw DataError("synth: could not reach corruption target for sample " +
                    std::to_string(index) + " after 100 attempts");
}

SynthSummary synth_generate(const SynthSpec& spec, const std::string& out_dir) {
    const int n_train = static_cast<int>(std::lround(spec.count * spec.train_frac));
    SynthSummary sum;
    double mae_total = 0.0;

    for (const char* split : {"train", "eval"})
        for (const char* sub : {"rgb", "depth", "pseudo", "gt"})
            fs::create_directories(fs::path(out_dir) / split / sub);

    std::string manifest = "id,split,corruption_mae\n";
    char row[128];
    for (int i = 0; i < spec.count; ++i) {
        const SynthSample s = synth_sample(spec, i);
        const bool train = i < n_train;
        const fs::path base = fs::path(out_dir) / (train ? "train" : "eval");
        char id[32];
        std::snprintf(id, sizeof(id), "s%04d", i);
        save_rgb((base / "rgb" / (std::string(id) + ".png")).string(), s.rgb);
        save_gray((base / "depth" / (std::string(id) + ".pgm")).string(), s.depth);
        save_gray((base / "pseudo" / (std::string(id) + ".pgm")).string(), s.pseudo);
        save_gray((base / "gt" / (std::string(id) + ".pgm")).string(), s.gt);
        std::snprintf(row, sizeof(row), "%s,%s,%.6f\n", id, train ? "train" : "eval",
                      s.achieved_mae);
        manifest += row;
        mae_total += s.achieved_mae;
        if (train) ++sum.train_count;
        else ++sum.eval_count;
    }
    atomic_write_file((fs::path(out_dir) / "corpus.csv").string(), manifest);
    sum.mean_corruption_mae = mae_total / std::max(1, spec.count);
    return sum;
}

} // namespace dsu
