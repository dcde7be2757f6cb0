#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flowguard/errors.hpp"

namespace flowguard {

using Index = Eigen::Index;

// Single-channel raster. Rows index y, columns index x, and storage is row
// major so data() walks the image in scanline order. Intensities live in
// [0, 1]; quantization to 8 bits happens only at the file boundary.
template <class Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageF = Image<float>;
using ImageD = Image<double>;

// Interleaved 8-bit RGB raster as stored in a P6 file.
struct RgbImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> data;  // 3 * width * height bytes, RGB order

  bool sizeConsistent() const {
    return width >= 1 && height >= 1 &&
           data.size() == static_cast<std::size_t>(3 * width * height);
  }
};

template <class Scalar>
bool inUnitRange(const Image<Scalar>& img) {
  return (img >= Scalar(0)).all() && (img <= Scalar(1)).all();
}

// Clamp-to-edge pixel read; the border policy used throughout the library.
template <class Scalar>
inline Scalar pixelClamped(const Image<Scalar>& img, Index x, Index y) {
  x = std::clamp<Index>(x, 0, img.cols() - 1);
  y = std::clamp<Index>(y, 0, img.rows() - 1);
  return img(y, x);
}

// Bilinear read at subpixel coordinates, clamp-to-edge outside the raster.
template <class Scalar>
inline double sampleBilinear(const Image<Scalar>& img, double x, double y) {
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  const Index x0 = static_cast<Index>(xf);
  const Index y0 = static_cast<Index>(yf);
  const double ax = x - xf;
  const double ay = y - yf;
  const double v00 = pixelClamped(img, x0, y0);
  const double v01 = pixelClamped(img, x0 + 1, y0);
  const double v10 = pixelClamped(img, x0, y0 + 1);
  const double v11 = pixelClamped(img, x0 + 1, y0 + 1);
  const double top = v00 + ax * (v01 - v00);
  const double bot = v10 + ax * (v11 - v10);
  return top + ay * (bot - top);
}

}  // namespace flowguard
