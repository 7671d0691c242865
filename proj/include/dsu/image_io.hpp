#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsu/scalar_field.hpp"

namespace dsu {

// Readers/writers for 8-bit grayscale PGM (P5, maxval 255) and 8-bit
// grayscale / RGB PNG. Pixel value v in {0..255} maps to v/255 exactly;
// round-trip through save/load is bit-exact for 8-bit data.

ScalarField load_gray(const std::string& path);
// `invert` flips depth polarity at load time (v -> 1 - v); the datasets'
// near-is-bright convention is not standardized.
ScalarField load_gray(const std::string& path, bool invert);
RgbImage load_rgb(const std::string& path);

void save_gray(const std::string& path, const ScalarField& f); // by extension: .pgm or .png
void save_rgb(const std::string& path, const RgbImage& img);   // .png only

std::uint8_t quantize8(float v);

// Optional audit hook: when set, every path passed to a loader is reported.
// Used by the ground-truth firewall check.
void set_io_audit(std::function<void(const std::string&)> cb);

// Write-then-rename so partially written outputs are never observed.
void atomic_write_file(const std::string& path, const std::string& bytes);

} // namespace dsu
