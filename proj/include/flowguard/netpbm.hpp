#pragma once

#include <filesystem>

#include "flowguard/image.hpp"

namespace flowguard {

// Binary netpbm I/O: P5 (grayscale) and P6 (RGB), maxval 255. Byte values
// map linearly to [0, 1] on load; saving rounds back to 8 bits.

ImageF loadPgm(const std::filesystem::path& path);
void savePgm(const ImageF& img, const std::filesystem::path& path);

RgbImage loadPpm(const std::filesystem::path& path);
void savePpm(const RgbImage& img, const std::filesystem::path& path);

// Dispatches on the magic number; P6 input is converted to grayscale.
ImageF loadImage(const std::filesystem::path& path);

}  // namespace flowguard
