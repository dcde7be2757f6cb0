#pragma once

// Brute-force reference implementations and data generators used to check
// the library. Everything here is deliberately written the slow, direct
// way, independent of the code paths under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "flowguard/features.hpp"
#include "flowguard/flow.hpp"
#include "flowguard/image.hpp"

namespace oracles {

using flowguard::Image;
using flowguard::Index;

// Deterministic helpers on top of the pinned mt19937 sequence.
struct TestRng {
  std::mt19937 rng;

  explicit TestRng(std::uint32_t seed) : rng(seed) {}

  double uniform01() { return rng() * (1.0 / 4294967296.0); }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  int uniformInt(int a, int b) { return a + static_cast<int>(rng() % (b - a + 1)); }
  double gaussian() {
    const double u1 = std::max(uniform01(), 1e-12);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

template <class Scalar>
Image<Scalar> randomImage(Index w, Index h, TestRng& rng) {
  Image<Scalar> img(h, w);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<Scalar>(rng.uniform01());
  return img;
}

// Dark background with isolated 2x2 dots at integer positions. Brightness
// varies per dot so distinct dots are distinguishable to a tracker.
template <class Scalar>
Image<Scalar> randomDotImage(Index w, Index h, int dots, TestRng& rng, int margin = 8,
                             std::vector<Eigen::Vector2i>* positions = nullptr) {
  Image<Scalar> img(h, w);
  img.setConstant(Scalar(0.1));
  for (int i = 0; i < dots; ++i) {
    const int x = rng.uniformInt(margin, static_cast<int>(w) - margin - 2);
    const int y = rng.uniformInt(margin, static_cast<int>(h) - margin - 2);
    const Scalar value = static_cast<Scalar>(0.55 + 0.4 * rng.uniform01());
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) img(y + dy, x + dx) = value;
    if (positions) positions->push_back({x, y});
  }
  return img;
}

template <class Scalar>
Image<Scalar> shiftImage(const Image<Scalar>& img, int dx, int dy, Scalar fill = Scalar(0.1)) {
  Image<Scalar> out(img.rows(), img.cols());
  out.setConstant(fill);
  for (Index y = 0; y < img.rows(); ++y) {
    for (Index x = 0; x < img.cols(); ++x) {
      const Index sx = x - dx;
      const Index sy = y - dy;
      if (sx >= 0 && sx < img.cols() && sy >= 0 && sy < img.rows()) out(y, x) = img(sy, sx);
    }
  }
  return out;
}

// Full 2-D convolution with an explicitly assembled Gaussian kernel,
// clamp-to-edge borders.
template <class Scalar>
Image<Scalar> directGaussianBlur(const Image<Scalar>& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int size = 2 * radius + 1;
  std::vector<double> kernel(size * size);
  double sum = 0.0;
  for (int ky = -radius; ky <= radius; ++ky)
    for (int kx = -radius; kx <= radius; ++kx) {
      const double w = std::exp(-0.5 * (kx * kx + ky * ky) / (sigma * sigma));
      kernel[(ky + radius) * size + (kx + radius)] = w;
      sum += w;
    }
  for (double& w : kernel) w /= sum;

  Image<Scalar> out(img.rows(), img.cols());
  for (Index y = 0; y < img.rows(); ++y) {
    for (Index x = 0; x < img.cols(); ++x) {
      double acc = 0.0;
      for (int ky = -radius; ky <= radius; ++ky)
        for (int kx = -radius; kx <= radius; ++kx) {
          const Index sx = std::clamp<Index>(x + kx, 0, img.cols() - 1);
          const Index sy = std::clamp<Index>(y + ky, 0, img.rows() - 1);
          acc += kernel[(ky + radius) * size + (kx + radius)] * img(sy, sx);
        }
      out(y, x) = static_cast<Scalar>(acc);
    }
  }
  return out;
}

// Direct 3x3 Sobel stencil at an interior pixel.
template <class Scalar>
std::pair<double, double> sobelStencilAt(const Image<Scalar>& img, Index x, Index y) {
  const double gx = (img(y - 1, x + 1) + 2.0 * img(y, x + 1) + img(y + 1, x + 1)) -
                    (img(y - 1, x - 1) + 2.0 * img(y, x - 1) + img(y + 1, x - 1));
  const double gy = (img(y + 1, x - 1) + 2.0 * img(y + 1, x) + img(y + 1, x + 1)) -
                    (img(y - 1, x - 1) + 2.0 * img(y - 1, x) + img(y - 1, x + 1));
  return {gx, gy};
}

// Segment test tried at all 16 arc rotations, the slow way.
template <class Scalar>
std::vector<flowguard::Corner> fastSegmentOracle(const Image<Scalar>& img, double t, int n) {
  std::vector<flowguard::Corner> corners;
  for (Index y = 3; y + 3 < img.rows(); ++y) {
    for (Index x = 3; x + 3 < img.cols(); ++x) {
      const double center = img(y, x);
      double ring[16];
      for (int k = 0; k < 16; ++k)
        ring[k] = img(y + flowguard::kFastCircle[k][1], x + flowguard::kFastCircle[k][0]);

      double bestScore = 0.0;
      for (int polarity = 0; polarity < 2; ++polarity) {
        auto qualifies = [&](int k) {
          return polarity == 0 ? ring[k % 16] > center + t : ring[k % 16] < center - t;
        };
        bool hit = false;
        for (int start = 0; start < 16 && !hit; ++start) {
          bool all = true;
          for (int k = start; k < start + n; ++k)
            if (!qualifies(k)) {
              all = false;
              break;
            }
          hit = hit || all;
        }
        if (!hit) continue;
        // The (unique) maximal qualifying run: extend from each start.
        int bestLen = 0, bestStart = 0;
        for (int start = 0; start < 16; ++start) {
          if (!qualifies(start)) continue;
          int len = 0;
          while (len < 16 && qualifies(start + len)) ++len;
          if (len > bestLen) {
            bestLen = len;
            bestStart = start;
          }
        }
        double score = 0.0;
        for (int k = bestStart; k < bestStart + bestLen; ++k)
          score += std::abs(ring[k % 16] - center) - t;
        bestScore = std::max(bestScore, score);
      }
      if (bestScore > 0.0)
        corners.push_back({static_cast<int>(x), static_cast<int>(y), bestScore});
    }
  }
  return corners;
}

// Explicit normal-equations solve of the 2-column least-squares problem,
// with the 2x2 inverse written out. Returns {solution, cond(A^T A)}.
inline std::pair<Eigen::Vector2d, double> normalEquationsSolve(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& A, const Eigen::VectorXd& b) {
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, r0 = 0.0, r1 = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    s00 += A(i, 0) * A(i, 0);
    s01 += A(i, 0) * A(i, 1);
    s11 += A(i, 1) * A(i, 1);
    r0 += A(i, 0) * b(i);
    r1 += A(i, 1) * b(i);
  }
  const double det = s00 * s11 - s01 * s01;
  const Eigen::Vector2d x((s11 * r0 - s01 * r1) / det, (-s01 * r0 + s00 * r1) / det);
  const double tr = s00 + s11;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double eigMax = 0.5 * (tr + disc);
  const double eigMin = 0.5 * (tr - disc);
  const double cond = eigMin > 0.0 ? eigMax / eigMin : std::numeric_limits<double>::infinity();
  return {x, cond};
}

// Exact radial flow field about foe: v = k (p - foe), k > 0 per vector.
// Guaranteed to contain at least two non-parallel directions.
inline std::vector<flowguard::FlowVector> radialField(const Eigen::Vector2d& foe, int count,
                                                      TestRng& rng, double w = 128,
                                                      double h = 128) {
  std::vector<flowguard::FlowVector> field;
  while (static_cast<int>(field.size()) < count) {
    const Eigen::Vector2d p(rng.uniform(0.0, w), rng.uniform(0.0, h));
    if ((p - foe).norm() < 1.0) continue;
    const double k = rng.uniform(0.05, 2.0);
    field.push_back({p, k * (p - foe)});
  }
  // Cross products certify the directions span the plane.
  bool spanning = false;
  for (std::size_t i = 1; i < field.size() && !spanning; ++i) {
    const double cross =
        field[0].v.x() * field[i].v.y() - field[0].v.y() * field[i].v.x();
    spanning = std::abs(cross) > 1e-9;
  }
  if (!spanning) return radialField(foe, count, rng, w, h);
  return field;
}

}  // namespace oracles
