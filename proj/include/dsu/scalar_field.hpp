#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dsu/error.hpp"

namespace dsu {

// H x W grid of 32-bit reals, row major. The universal carrier for saliency
// maps, depth maps, pseudo-labels and masks.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    ScalarField() = default;
    ScalarField(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}
    ScalarField(int w, int h, std::vector<float> d) : width(w), height(h), data(std::move(d)) {
        if (data.size() != static_cast<std::size_t>(w) * h)
            throw DataError("ScalarField: data length does not match width*height");
    }

    std::size_t size() const { return data.size(); }
    float& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool same_shape(const ScalarField& o) const {
        return width == o.width && height == o.height;
    }
};

// Construction gate for fields playing a saliency/depth/label role: every
// element must be finite and in [0,1].
ScalarField make_unit_field(int w, int h, std::vector<float> data);
void check_unit_range(const ScalarField& f, const char* what);

// Three planes sharing dimensions, values in [0,1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::array<std::vector<float>, 3> plane;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h) {
        for (auto& p : plane) p.assign(static_cast<std::size_t>(w) * h, 0.0f);
    }

    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
    float& at(int c, int y, int x) { return plane[c][static_cast<std::size_t>(y) * width + x]; }
    float at(int c, int y, int x) const {
        return plane[c][static_cast<std::size_t>(y) * width + x];
    }
};

} // namespace dsu
