#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowguard/image.hpp"

namespace flowguard {

// Per-pixel horizontal/vertical derivatives plus their magnitude, all the
// same shape as the source image.
template <class Scalar>
struct GradientField {
  Image<Scalar> gx;
  Image<Scalar> gy;
  Image<Scalar> magnitude;
};

// Coarse-to-fine stack; level 0 is full resolution, each next level is
// blurred and downsampled by 2 (floor division) per axis.
template <class Scalar>
struct ImagePyramid {
  std::vector<Image<Scalar>> levels;

  int levelCount() const { return static_cast<int>(levels.size()); }
  Index width() const { return levels.empty() ? 0 : levels.front().cols(); }
  Index height() const { return levels.empty() ? 0 : levels.front().rows(); }
};

// BT.601 luminance. 8-bit channels map linearly onto [0, 1]; the result is
// clamped so a (255,255,255) pixel is exactly 1 despite rounding.
template <class Scalar = float>
Image<Scalar> rgbToGrayscale(std::span<const std::uint8_t> rgb, Index width, Index height) {
  if (width < 1 || height < 1)
    throw InvalidInput("rgbToGrayscale: dimensions must be at least 1x1");
  if (rgb.size() != static_cast<std::size_t>(3 * width * height))
    throw InvalidInput("rgbToGrayscale: buffer holds " + std::to_string(rgb.size()) +
                       " bytes, expected " + std::to_string(3 * width * height));
  Image<Scalar> out(height, width);
  const std::uint8_t* px = rgb.data();
  Scalar* dst = out.data();
  for (Index i = 0; i < width * height; ++i, px += 3) {
    const double gray = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
    dst[i] = static_cast<Scalar>(std::clamp(gray, 0.0, 1.0));
  }
  return out;
}

template <class Scalar = float>
Image<Scalar> rgbToGrayscale(const RgbImage& rgb) {
  return rgbToGrayscale<Scalar>(std::span<const std::uint8_t>(rgb.data), rgb.width, rgb.height);
}

namespace detail {

// Normalized 1-D Gaussian taps for offsets -radius..radius.
inline std::vector<double> gaussianKernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i / sigma) * (i / sigma));
    taps[i + radius] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

}  // namespace detail

// Separable Gaussian convolution, kernel radius ceil(3*sigma), clamp-to-edge
// borders. Pure linear filtering: no clamping of the output values, so the
// operator is exactly linear in the input.
template <class Scalar>
Image<Scalar> gaussianBlur(const Image<Scalar>& img, double sigma) {
  if (!(sigma > 0.0)) throw InvalidParameter("gaussianBlur: sigma must be > 0");
  const std::vector<double> taps = detail::gaussianKernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const Index h = img.rows();
  const Index w = img.cols();

  Image<double> tmp(h, w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Index xi = std::clamp<Index>(x + i, 0, w - 1);
        acc += taps[i + radius] * static_cast<double>(img(y, xi));
      }
      tmp(y, x) = acc;
    }
  }
  Image<Scalar> out(h, w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Index yi = std::clamp<Index>(y + i, 0, h - 1);
        acc += taps[i + radius] * tmp(yi, x);
      }
      out(y, x) = static_cast<Scalar>(acc);
    }
  }
  return out;
}

// Standard 3x3 Sobel stencils (correlation form), clamp-to-edge borders.
template <class Scalar>
GradientField<Scalar> sobelGradients(const Image<Scalar>& img) {
  const Index h = img.rows();
  const Index w = img.cols();
  if (h < 3 || w < 3)
    throw InvalidInput("sobelGradients: image must be at least 3x3");

  GradientField<Scalar> g{Image<Scalar>(h, w), Image<Scalar>(h, w), Image<Scalar>(h, w)};
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const double p00 = pixelClamped(img, x - 1, y - 1);
      const double p01 = pixelClamped(img, x, y - 1);
      const double p02 = pixelClamped(img, x + 1, y - 1);
      const double p10 = pixelClamped(img, x - 1, y);
      const double p12 = pixelClamped(img, x + 1, y);
      const double p20 = pixelClamped(img, x - 1, y + 1);
      const double p21 = pixelClamped(img, x, y + 1);
      const double p22 = pixelClamped(img, x + 1, y + 1);
      const double gx = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
      const double gy = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
      g.gx(y, x) = static_cast<Scalar>(gx);
      g.gy(y, x) = static_cast<Scalar>(gy);
      g.magnitude(y, x) = static_cast<Scalar>(std::sqrt(gx * gx + gy * gy));
    }
  }
  return g;
}

// Canny edge map: blur, Sobel, non-maximum suppression along the gradient
// direction quantized to 4 bins, then 8-connected double-threshold
// hysteresis. Output pixels are exactly 0 or 1.
template <class Scalar>
Image<Scalar> canny(const Image<Scalar>& img, double low, double high, double sigma = 1.4) {
  if (!(low > 0.0) || !(low < high))
    throw InvalidParameter("canny: thresholds must satisfy 0 < low < high");
  const GradientField<Scalar> g = sobelGradients(gaussianBlur(img, sigma));
  const Index h = img.rows();
  const Index w = img.cols();

  // Out-of-bounds neighbors count as magnitude 0 so border edges survive.
  auto magAt = [&](Index x, Index y) -> double {
    if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
    return g.magnitude(y, x);
  };

  constexpr double kTan22 = 0.41421356237309503;  // tan(22.5 deg)
  Image<std::uint8_t> thin(h, w);
  thin.setZero();
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const double mag = g.magnitude(y, x);
      if (mag <= 0.0) continue;
      const double gx = g.gx(y, x);
      const double gy = g.gy(y, x);
      const double ax = std::abs(gx);
      const double ay = std::abs(gy);
      Index dx, dy;
      if (ay <= kTan22 * ax) {
        dx = 1; dy = 0;
      } else if (ax <= kTan22 * ay) {
        dx = 0; dy = 1;
      } else if ((gx > 0) == (gy > 0)) {
        dx = 1; dy = 1;
      } else {
        dx = 1; dy = -1;
      }
      // Asymmetric tie rule keeps exactly one pixel when two neighbors on
      // a symmetric profile share the peak magnitude.
      if (mag > magAt(x + dx, y + dy) && mag >= magAt(x - dx, y - dy))
        thin(y, x) = 1;
    }
  }

  Image<Scalar> out(h, w);
  out.setZero();
  std::vector<Index> stack;
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      if (!thin(y, x) || g.magnitude(y, x) < high || out(y, x) != Scalar(0)) continue;
      out(y, x) = Scalar(1);
      stack.push_back(y * w + x);
      while (!stack.empty()) {
        const Index idx = stack.back();
        stack.pop_back();
        const Index cy = idx / w;
        const Index cx = idx % w;
        for (Index ny = cy - 1; ny <= cy + 1; ++ny) {
          for (Index nx = cx - 1; nx <= cx + 1; ++nx) {
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (out(ny, nx) != Scalar(0) || !thin(ny, nx)) continue;
            if (g.magnitude(ny, nx) < low) continue;
            out(ny, nx) = Scalar(1);
            stack.push_back(ny * w + nx);
          }
        }
      }
    }
  }
  return out;
}

// Level k+1 = every second pixel of gaussianBlur(level k, sigma = 1).
// The level count is truncated so the coarsest level keeps both dimensions
// at or above minDim; level 0 is always present.
template <class Scalar>
ImagePyramid<Scalar> buildPyramid(const Image<Scalar>& img, int levels, Index minDim = 16) {
  ImagePyramid<Scalar> pyr;
  pyr.levels.push_back(img);
  while (pyr.levelCount() < std::max(levels, 1)) {
    const Image<Scalar>& cur = pyr.levels.back();
    const Index nh = cur.rows() / 2;
    const Index nw = cur.cols() / 2;
    if (nh < minDim || nw < minDim) break;
    const Image<Scalar> blurred = gaussianBlur(cur, 1.0);
    Image<Scalar> down(nh, nw);
    for (Index y = 0; y < nh; ++y)
      for (Index x = 0; x < nw; ++x) down(y, x) = blurred(2 * y, 2 * x);
    pyr.levels.push_back(std::move(down));
  }
  return pyr;
}

// Nearest-neighbor resize with center-aligned sampling; binary inputs stay
// binary.
template <class Scalar>
Image<Scalar> resizeNearest(const Image<Scalar>& img, Index outWidth, Index outHeight) {
  if (outWidth < 1 || outHeight < 1)
    throw InvalidParameter("resizeNearest: output dimensions must be at least 1x1");
  Image<Scalar> out(outHeight, outWidth);
  for (Index y = 0; y < outHeight; ++y) {
    const Index sy = std::min<Index>(img.rows() - 1,
                                     static_cast<Index>((y + 0.5) * img.rows() / outHeight));
    for (Index x = 0; x < outWidth; ++x) {
      const Index sx = std::min<Index>(img.cols() - 1,
                                       static_cast<Index>((x + 0.5) * img.cols() / outWidth));
      out(y, x) = img(sy, sx);
    }
  }
  return out;
}

// Frame simplification for the lane model: grayscale, Canny, then resize to
// the fixed 128x128 network input. Output values are exactly 0 or 1.
template <class Scalar = float>
Image<Scalar> simplifyLaneFrame(const RgbImage& rgb, double low = 0.1, double high = 0.2,
                                double sigma = 1.4) {
  const Image<Scalar> gray = rgbToGrayscale<Scalar>(rgb);
  return resizeNearest(canny(gray, low, high, sigma), 128, 128);
}

}  // namespace flowguard
